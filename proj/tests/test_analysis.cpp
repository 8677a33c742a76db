#include <catch2/catch.hpp>

#include "bidisk/analysis.hpp"
#include "bidisk/random.hpp"

using namespace bidisk;

namespace {

BiPoly four_minus_z1_minus_z2() {
    BiPoly p = BiPoly::zero(1, 1);
    p.coeff(0, 0) = 4.0;
    p.coeff(1, 0) = -1.0;
    p.coeff(0, 1) = -1.0;
    return p;
}

}  // namespace

TEST_CASE("matrix commutator", "[analysis]") {
    OperatorMatrix id{Eigen::MatrixXcd::Identity(4, 4), "id"};
    CHECK(commutator(id).entries.cwiseAbs().maxCoeff() == 0.0);

    // 2x2 truncated shift: [S*, S] = diag(1, -1)
    Eigen::MatrixXcd s(2, 2);
    s << 0, 0, 1, 0;
    const OperatorMatrix c = commutator({s, "shift"});
    Eigen::MatrixXcd want(2, 2);
    want << 1, 0, 0, -1;
    CHECK((c.entries - want).cwiseAbs().maxCoeff() == 0.0);

    // normal matrices commute with their adjoints
    Eigen::MatrixXcd u(2, 2);
    u << Complex(0, 1), 0, 0, std::polar(1.0, 0.4);
    CHECK(commutator({u, "normal"}).entries.cwiseAbs().maxCoeff() < 1e-12);

    // trace of any finite self-commutator vanishes
    Rng rng(9);
    Eigen::MatrixXcd a(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a(i, j) = Complex(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const OperatorMatrix ca = commutator({a, "random"});
    CHECK(std::abs(ca.entries.trace()) < 1e-10);
    CHECK((ca.entries - ca.entries.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank ladder stabilizes at the second-variable degree", "[analysis]") {
    const RationalInner z1z2 = make_rational_inner(BiPoly::constant(1.0, 1, 1));
    const RankReport rep = rank_ladder(z1z2, 1, {3, 4, 5, 6}, 1e-7, 128);
    CHECK(rep.verdict == RankVerdict::stabilized);
    CHECK(rep.rank == 1);
    CHECK(rep.gap >= 1e4);

    const RationalInner z2cubed = make_rational_inner(BiPoly::constant(1.0, 0, 3));
    const RankReport rep3 = rank_ladder(z2cubed, 1, {3, 4, 5, 6}, 1e-7, 128);
    CHECK(rep3.verdict == RankVerdict::stabilized);
    CHECK(rep3.rank == 3);
}

TEST_CASE("rank ladder grows for degree (2,1)", "[analysis]") {
    const RationalInner theta = make_rational_inner(BiPoly::constant(1.0, 2, 1));  // z1^2 z2
    const RankReport rep = rank_ladder(theta, 1, {3, 4, 5, 6}, 1e-7, 128);
    CHECK(rep.verdict == RankVerdict::growing);
    for (std::size_t i = 1; i < rep.ladder.size(); ++i)
        CHECK(rep.ladder[i].numerical_rank > rep.ladder[i - 1].numerical_rank);
}

TEST_CASE("both commutators stabilize at rank one for degree (1,1)", "[analysis]") {
    const RationalInner theta = make_rational_inner(four_minus_z1_minus_z2());
    for (int var : {1, 2}) {
        const RankReport rep = rank_ladder(theta, var, {3, 4, 5, 6}, 1e-7, 128);
        CHECK(rep.verdict == RankVerdict::stabilized);
        CHECK(rep.rank == 1);
    }
}

TEST_CASE("kernel sampling rank", "[analysis]") {
    const RationalInner z1z2 = make_rational_inner(BiPoly::constant(1.0, 1, 1));
    CHECK(kernel_sampling_rank(z1z2, bidisk_points(8, 0.8, 31), 128) == 1);

    const RationalInner z2 = make_rational_inner(BiPoly::constant(1.0, 0, 1));
    CHECK(kernel_sampling_rank(z2, bidisk_points(8, 0.8, 31), 128) == 1);

    // agreement with the ladder on degree (1,n) cases
    const RationalInner p4 = make_rational_inner(four_minus_z1_minus_z2());
    const RankReport rep = rank_ladder(p4, 1, {3, 4, 5, 6}, 1e-7, 128);
    CHECK(kernel_sampling_rank(p4, bidisk_points(8, 0.8, 31), 128) == rep.rank);

    const ProductInner deg12{BlaschkeProduct({Complex(0.5)}),
                             BlaschkeProduct({Complex(0.3), Complex(-0.25, 0.1)})};
    const RationalInner t12 = product_to_rational(deg12);
    const RankReport rep12 = rank_ladder(t12, 1, {3, 4, 5, 6}, 1e-7, 128);
    CHECK(rep12.rank == 2);
    CHECK(kernel_sampling_rank(t12, bidisk_points(10, 0.8, 31), 128) == 2);
}

TEST_CASE("eigenvalue clustering", "[analysis]") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(5, 5);
    a.diagonal() << 1.0, 1.0 + 1e-9, 0.5, 1e-12, -0.25;
    const auto clusters = eigen_multiplicities({a, "diag"}, 1e-6);
    REQUIRE(clusters.size() == 3);
    CHECK(clusters[0].first == Approx(1.0).margin(1e-8));
    CHECK(clusters[0].second == 2);
    CHECK(clusters[1].first == Approx(0.5));
    CHECK(clusters[2].first == Approx(-0.25));

    Eigen::MatrixXcd bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(eigen_multiplicities({bad, "nonherm"}, 1e-6), NotHermitian);
}

TEST_CASE("block commutator spectra for products", "[analysis]") {
    // S1max block: eigenvalue 1 with multiplicity deg(psi) = 2
    const ProductInner f{BlaschkeProduct({Complex(0.0)}),
                         BlaschkeProduct({Complex(0.3), Complex(-0.2)})};
    const RationalInner theta = product_to_rational(f);
    const ModelSpace ms(theta, 128);
    const ProductBlocks pb = product_blocks(f, 5, 128);
    {
        const Eigen::MatrixXcd c = commutator_form(ms, pb.s1, 1);
        const auto clusters = eigen_multiplicities({c, "block1"}, 1e-6);
        REQUIRE(clusters.size() == 1);
        CHECK(clusters[0].first == Approx(1.0).margin(1e-8));
        CHECK(clusters[0].second == 2);
    }

    // single Blaschke factor: the S2min block commutator vanishes
    const ProductInner single{BlaschkeProduct({Complex(0.5)}), BlaschkeProduct({Complex(0.0)})};
    const RationalInner ts = product_to_rational(single);
    const ModelSpace mss(ts, 128);
    const ProductBlocks pbs = product_blocks(single, 5, 128);
    {
        const Eigen::MatrixXcd c = commutator_form(mss, pbs.s2, 1);
        CHECK(c.cwiseAbs().maxCoeff() <= 1e-8);
    }

    // deg phi = 2: the 2x2 traceless block factor gives the +/- lambda pair,
    // so exactly two nonzero clusters whose multiplicities grow with D
    const ProductInner deg2{BlaschkeProduct({Complex(0.3), Complex(-0.4)}),
                            BlaschkeProduct({Complex(0.0)})};
    const RationalInner t2 = product_to_rational(deg2);
    const ModelSpace ms2(t2, 128);
    int prev_mult = 0;
    for (int d : {3, 5}) {
        const ProductBlocks pb2 = product_blocks(deg2, d, 128);
        const Eigen::MatrixXcd c = commutator_form(ms2, pb2.s2, 1);
        const auto clusters = eigen_multiplicities({c, "block2"}, 1e-6);
        REQUIRE(clusters.size() == 2);
        CHECK(clusters[0].first == Approx(-clusters[1].first).margin(1e-9));
        CHECK(clusters[0].second == clusters[1].second);
        CHECK(clusters[0].second == d + 1);
        CHECK(clusters[0].second > prev_mult);
        prev_mult = clusters[0].second;
    }

    // The one-variable factor of the block commutator is
    // |P_K 1><P_K 1| - |T_z̄ phi><T_z̄ phi|, a traceless rank <= 2 operator,
    // so the nonzero spectrum is the +/- lambda pair for every deg phi >= 2.
    // From deg phi = 3 on, the zero eigenvalue joins the spectrum with
    // multiplicity growing in D: three eigenvalue groups {+l, 0, -l} in all.
    const ProductInner deg3{BlaschkeProduct({Complex(0.3), Complex(-0.4), Complex(0.1, 0.2)}),
                            BlaschkeProduct({Complex(0.0)})};
    const RationalInner t3 = product_to_rational(deg3);
    const ModelSpace ms3(t3, 128);
    const ProductBlocks pb3 = product_blocks(deg3, 4, 128);
    const Eigen::MatrixXcd c3 = commutator_form(ms3, pb3.s2, 1);
    const auto clusters3 = eigen_multiplicities({c3, "block2"}, 1e-6);
    REQUIRE(clusters3.size() == 2);
    CHECK(clusters3[0].first == Approx(-clusters3[1].first).margin(1e-9));
    // kernel dimension: block dim 3*(D+1) minus the two lambda-clusters
    const int zero_dim = static_cast<int>(c3.rows()) - clusters3[0].second - clusters3[1].second;
    CHECK(zero_dim == 5);  // (deg phi - 2) * (D + 1)
}

TEST_CASE("point spectrum contains the Blaschke zeros", "[analysis]") {
    const ProductInner f{BlaschkeProduct({Complex(0.5)}), BlaschkeProduct({Complex(0.0)})};
    const auto rep = point_spectrum_check(f, 4, 128);
    CHECK(rep.contains_zeros(1e-7));
    CHECK(rep.max_modulus <= 1.0 + 1e-8);

    const ProductInner g{BlaschkeProduct({Complex(0.3), Complex(-0.4)}),
                         BlaschkeProduct({Complex(0.0)})};
    const auto rep2 = point_spectrum_check(g, 4, 128);
    CHECK(rep2.contains_zeros(1e-7));
    // each eigenvalue repeats once per truncated psi H^2 dimension
    int near_03 = 0;
    for (Eigen::Index i = 0; i < rep2.eigenvalues.size(); ++i)
        if (std::abs(rep2.eigenvalues(i) - Complex(0.3)) < 1e-7) ++near_03;
    CHECK(near_03 == 5);

    const ProductInner mono{BlaschkeProduct({Complex(0.0)}), BlaschkeProduct({Complex(0.0)})};
    const auto rep3 = point_spectrum_check(mono, 4, 128);
    CHECK(rep3.contains_zeros(1e-7));
}

TEST_CASE("rank-law harness", "[analysis]") {
    const RationalInner z1z2 = make_rational_inner(BiPoly::constant(1.0, 1, 1));
    const RankLawReport r1 = rank_law_harness(z1z2, 128, {3, 4, 5, 6});
    CHECK(r1.consistent);
    CHECK(r1.ladder.rank == 1);

    const RationalInner p4 = make_rational_inner(four_minus_z1_minus_z2());
    const RankLawReport r2 = rank_law_harness(p4, 128, {3, 4, 5, 6});
    CHECK(r2.consistent);
    CHECK(r2.sampling_rank == 1);

    const ProductInner prod{BlaschkeProduct({Complex(0.5)}),
                            BlaschkeProduct({Complex(0.3), Complex(-0.25, 0.1)})};
    const RankLawReport r3 = rank_law_harness(product_to_rational(prod), 128, {3, 4, 5, 6});
    CHECK(r3.consistent);
    CHECK(r3.ladder.rank == 2);
    CHECK(r3.rank_bound_ok);

    const RationalInner z1sq = make_rational_inner(BiPoly::constant(1.0, 2, 1));
    const RankLawReport r4 = rank_law_harness(z1sq, 128, {3, 4, 5, 6});
    CHECK(r4.consistent);
    CHECK_FALSE(r4.predicted_finite);
}
