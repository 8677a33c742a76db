#include <catch2/catch.hpp>

#include "bidisk/inner_function.hpp"
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

BiPoly two_minus_z1_minus_z2() {
    BiPoly p = four_minus_z1_minus_z2();
    p.coeff(0, 0) = 2.0;
    return p;
}

}  // namespace

TEST_CASE("Blaschke validation", "[inner]") {
    CHECK_THROWS_AS(BlaschkeProduct({Complex(1.0, 0.0)}), DegenerateInput);
    CHECK_THROWS_AS(BlaschkeProduct({Complex(0.5, 0.0)}, Complex(2.0, 0.0)), DegenerateInput);
    const BlaschkeProduct b({Complex(0.5, 0.0)});
    CHECK(std::abs(b(Complex(0.5, 0.0))) < 1e-15);
    CHECK(std::abs(std::abs(b(std::polar(1.0, 1.3))) - 1.0) < 1e-14);
}

TEST_CASE("product evaluation factorizes", "[inner]") {
    const ProductInner f{BlaschkeProduct({Complex(0.3, 0.1), Complex(-0.2, 0.0)}),
                         BlaschkeProduct({Complex(0.0, 0.4)})};
    Rng rng(8);
    for (int s = 0; s < 20; ++s) {
        const Complex z1 = rng.disk(0.9), z2 = rng.disk(0.9);
        CHECK(std::abs(f(z1, z2) - f.phi(z1) * f.psi(z2)) < 1e-15);
    }
}

TEST_CASE("make_rational_inner from padded constant gives z1 z2", "[inner]") {
    const RationalInner theta = make_rational_inner(BiPoly::constant(1.0, 1, 1));
    CHECK(theta.degree() == std::pair<int, int>{1, 1});
    Rng rng(2);
    for (int s = 0; s < 10; ++s) {
        const Complex z1 = rng.disk(0.9), z2 = rng.disk(0.9);
        CHECK(std::abs(theta(z1, z2) - z1 * z2) < 1e-15);
    }
}

TEST_CASE("make_rational_inner validates the denominator", "[inner]") {
    const RationalInner theta = make_rational_inner(four_minus_z1_minus_z2());
    CHECK(verify_inner(theta, 64) < 1e-12);
    CHECK_THROWS_AS(make_rational_inner(two_minus_z1_minus_z2()), UnstableDenominator);
}

TEST_CASE("shared-factor detection", "[inner]") {
    const BiPoly p = four_minus_z1_minus_z2();
    BiPoly q = BiPoly::zero(1, 1);
    q.coeff(0, 0) = 3.0;
    q.coeff(1, 0) = -1.0;
    q.coeff(1, 1) = 0.5;
    CHECK(detail::shares_common_factor(p, p * q));
    CHECK(detail::shares_common_factor(p * q, q));
    CHECK_FALSE(detail::shares_common_factor(p, p.reflect()));
    CHECK_FALSE(detail::shares_common_factor(p, q));
}

TEST_CASE("product_to_rational", "[inner]") {
    // phi = z1, psi = z2: p = 1 at declared degree (1,1)
    const ProductInner mono{BlaschkeProduct({Complex(0.0, 0.0)}),
                            BlaschkeProduct({Complex(0.0, 0.0)})};
    const RationalInner tm = product_to_rational(mono);
    CHECK(tm.degree() == std::pair<int, int>{1, 1});
    CHECK(std::abs(tm(0.3, -0.2) - Complex(0.3) * Complex(-0.2)) < 1e-14);

    // phi = (z1 - 1/2)/(1 - z1/2), psi = z2: p = 1 - z1/2
    const ProductInner half{BlaschkeProduct({Complex(0.5, 0.0)}),
                            BlaschkeProduct({Complex(0.0, 0.0)})};
    const RationalInner th = product_to_rational(half);
    CHECK(th.degree() == std::pair<int, int>{1, 1});
    CHECK(std::abs(th.p().coeff(0, 0) - Complex(1.0)) < 1e-15);
    CHECK(std::abs(th.p().coeff(1, 0) - Complex(-0.5)) < 1e-15);
    CHECK(verify_inner(th, 64) < 1e-12);
    Rng rng(4);
    for (int s = 0; s < 20; ++s) {
        const Complex z1 = rng.disk(0.9), z2 = rng.disk(0.9);
        CHECK(std::abs(th(z1, z2) - half(z1, z2)) < 1e-12);
    }

    // empty phi, psi = z2^2: degree (0, 2)
    const ProductInner sq{BlaschkeProduct{}, BlaschkeProduct({0.0, 0.0})};
    CHECK(product_to_rational(sq).degree() == std::pair<int, int>{0, 2});

    // degree counts zeros, and folded constants keep evaluation pointwise equal
    const ProductInner gen{BlaschkeProduct({Complex(0.3, 0.1), Complex(-0.4, 0.2)},
                                           std::polar(1.0, 0.7)),
                           BlaschkeProduct({Complex(0.1, -0.5)}, std::polar(1.0, -1.1))};
    const RationalInner tg = product_to_rational(gen);
    CHECK(tg.degree() == std::pair<int, int>{2, 1});
    for (int s = 0; s < 20; ++s) {
        const Complex z1 = rng.disk(0.9), z2 = rng.disk(0.9);
        CHECK(std::abs(tg(z1, z2) - gen(z1, z2)) < 1e-12);
    }
}

TEST_CASE("verify_inner flags non-inner candidates", "[inner]") {
    // (z1 + z2)/2 drops to modulus 0 at antipodal torus points
    BiPoly num = BiPoly::zero(1, 1);
    num.coeff(1, 0) = 0.5;
    num.coeff(0, 1) = 0.5;
    const RationalFn f{num, BiPoly::constant(1.0)};
    CHECK(verify_inner(f, 64) >= 0.9);
}

TEST_CASE("backshift_theta", "[inner]") {
    const RationalInner z1z2 = make_rational_inner(BiPoly::constant(1.0, 1, 1));
    const RationalFn bs = backshift_theta(z1z2, 1);
    CHECK(std::abs(bs(0.2, 0.7) - Complex(0.7)) < 1e-14);

    const RationalInner z2cubed = make_rational_inner(BiPoly::constant(1.0, 0, 3));
    CHECK(std::abs(backshift_theta(z2cubed, 1)(0.3, 0.4)) < 1e-14);
    CHECK(std::abs(backshift_theta(z2cubed, 2)(0.3, 0.4) - Complex(0.16)) < 1e-14);

    // reconstruction identity theta = z_var * backshift + theta|_{z_var = 0}
    const RationalInner th = make_rational_inner(four_minus_z1_minus_z2());
    const RationalFn tb = backshift_theta(th, 1);
    Rng rng(6);
    for (int s = 0; s < 40; ++s) {
        const Complex z1 = rng.disk(0.9), z2 = rng.disk(0.9);
        CHECK(std::abs(th(z1, z2) - (z1 * tb(z1, z2) + th(Complex(0.0), z2))) < 1e-10);
    }
}

TEST_CASE("Takenaka-Malmquist basis is orthonormal on the circle", "[inner]") {
    const BlaschkeProduct phi({Complex(0.3, 0.0), Complex(-0.4, 0.1), Complex(0.2, 0.5)});
    const int n = 1024;
    Eigen::VectorXcd pts(n);
    for (int j = 0; j < n; ++j) pts(j) = std::polar(1.0, 2.0 * M_PI * j / n);
    const Eigen::MatrixXcd e = tm_basis_at(phi, pts);
    const Eigen::MatrixXcd gram = (e.adjoint() * e) / static_cast<double>(n);
    CHECK((gram - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("one-variable compressed shift has the zeros as eigenvalues", "[inner]") {
    const BlaschkeProduct phi({Complex(0.3, 0.0), Complex(-0.4, 0.0)});
    const Eigen::MatrixXcd s = one_var_compressed_shift(phi);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(s, false);
    std::vector<double> dist;
    for (const Complex& zero : phi.zeros) {
        double d = 1e300;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            d = std::min(d, std::abs(es.eigenvalues()(i) - zero));
        dist.push_back(d);
    }
    for (double d : dist) CHECK(d < 1e-10);
}
