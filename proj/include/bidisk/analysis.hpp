#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shift_operator.hpp"

namespace bidisk {

/// Self-commutator of a finite matrix: A*A - AA*. Hermitian with zero trace;
/// both are verified on every call.
inline OperatorMatrix commutator(const OperatorMatrix& a) {
    if (a.entries.rows() != a.entries.cols())
        throw DegenerateInput("commutator: matrix must be square");
    OperatorMatrix out;
    out.entries = a.entries.adjoint() * a.entries - a.entries * a.entries.adjoint();
    out.label = "commutator(" + a.label + ")";
    const double scale = std::max(1.0, a.entries.squaredNorm());
    if (std::abs(out.entries.trace()) > 1e-10 * scale ||
        (out.entries - out.entries.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw NotHermitian("commutator: output failed the symmetry/trace consistency check");
    return out;
}

/// Compression of the true commutator [S*_{z_var}, S_{z_var}] to the span of
/// the given orthonormal grid columns:
///   C[j][k] = <S e_k, S e_j> - <S* e_k, S* e_j>,
/// with S e = P_theta(z e) and S* e = T_z̄ e applied exactly on the grid. The
/// truncated-matrix product S*S - SS* is not used here: it carries a spurious
/// unit singular value at the truncation edge that never decays with D.
inline Eigen::MatrixXcd commutator_form(const ModelSpace& ms, const Eigen::MatrixXcd& ortho,
                                        int var) {
    const int n = ms.grid_n();
    const double n2 = static_cast<double>(n) * n;
    const Eigen::VectorXcd zf = detail::coordinate_factor(n, var);
    const Eigen::Index cols = ortho.cols();
    Eigen::MatrixXcd se(ortho.rows(), cols), be(ortho.rows(), cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
        Eigen::MatrixXcd g = ortho.col(k).reshaped(n, n);
        const TorusGrid ek(n, std::move(g));
        se.col(k) = ms.project(TorusGrid(n, times_coord(ek, var).samples())).samples().reshaped();
        be.col(k) = backshift_grid(ek, var).samples().reshaped();
    }
    Eigen::MatrixXcd c = (se.adjoint() * se - be.adjoint() * be) / n2;
    return 0.5 * (c + c.adjoint());
}

inline OperatorMatrix model_commutator(const ModelSpace& ms, const ModelSpaceFrame& fr, int var) {
    OperatorMatrix out;
    out.entries = commutator_form(ms, fr.ortho, var);
    out.label = var == 1 ? "commutator_z1" : "commutator_z2";
    return out;
}

enum class RankVerdict { stabilized, growing, inconclusive };

inline const char* to_string(RankVerdict v) {
    switch (v) {
        case RankVerdict::stabilized: return "stabilized";
        case RankVerdict::growing: return "growing";
        default: return "inconclusive";
    }
}

struct RankRung {
    int trunc_degree = 0;
    Eigen::VectorXd singular_values;  // descending
    int numerical_rank = 0;
};

struct RankReport {
    std::vector<RankRung> ladder;
    RankVerdict verdict = RankVerdict::inconclusive;
    int rank = -1;       // meaningful when stabilized
    double gap = 0.0;    // sigma_r / sigma_{r+1} at the last rung
    double tol = 1e-7;
};

namespace detail {

inline Eigen::VectorXd hermitian_singular_values(const Eigen::MatrixXcd& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c, Eigen::EigenvaluesOnly);
    Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
    std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
    return sv;
}

inline int count_rank(const Eigen::VectorXd& sv, double tol, double abs_floor = 1e-12) {
    if (sv.size() == 0 || sv(0) <= abs_floor) return 0;
    int r = 0;
    while (r < sv.size() && sv(r) > tol * sv(0)) ++r;
    return r;
}

}  // namespace detail

/// Singular-value ladders of [S*_{z_var}, S_{z_var}] across truncation
/// degrees, with a stabilization verdict: stabilized requires the last two
/// rungs to agree on the rank with a spectral gap of at least 1e4; growing
/// requires the rank to increase at every rung.
inline RankReport rank_ladder(const RationalInner& theta, int var,
                              std::vector<int> degrees = {4, 6, 8, 10, 12}, double tol = 1e-7,
                              int grid_n = 256, double drop_tol = 1e-8) {
    RankReport rep;
    rep.tol = tol;
    const ModelSpace ms(theta, grid_n);
    for (int d : degrees) {
        const ModelSpaceFrame fr = build_frame(ms, d, d, drop_tol);
        const Eigen::MatrixXcd c = commutator_form(ms, fr.ortho, var);
        RankRung rung;
        rung.trunc_degree = d;
        rung.singular_values = detail::hermitian_singular_values(c);
        rung.numerical_rank = detail::count_rank(rung.singular_values, tol);
        rep.ladder.push_back(std::move(rung));
    }
    const auto& last = rep.ladder.back();
    const int r = last.numerical_rank;
    const bool two_equal =
        rep.ladder.size() >= 2 && rep.ladder[rep.ladder.size() - 2].numerical_rank == r;
    if (r == 0) {
        rep.gap = std::numeric_limits<double>::infinity();
    } else if (r >= last.singular_values.size() || last.singular_values(r) <= 1e-300) {
        rep.gap = std::numeric_limits<double>::infinity();
    } else {
        rep.gap = last.singular_values(r - 1) / last.singular_values(r);
    }
    bool growing = rep.ladder.size() >= 4;
    for (std::size_t i = 1; i < rep.ladder.size(); ++i)
        growing = growing && rep.ladder[i].numerical_rank > rep.ladder[i - 1].numerical_rank;
    if (two_equal && rep.gap >= 1e4) {
        rep.verdict = RankVerdict::stabilized;
        rep.rank = r;
    } else if (growing) {
        rep.verdict = RankVerdict::growing;
    } else {
        rep.verdict = RankVerdict::inconclusive;
    }
    return rep;
}

/// Frame-free rank probe: applies [S*_{z1}, S_{z1}] to reproducing kernels at
/// the sample points via the closed-form backward shift
///   T_z̄1 K_w = w̄1 K_w - conj(theta(w)) T_z̄1(theta)(z) / (1 - z2 w̄2)
/// and the explicit shift formula, then ranks the Gram of the images.
inline int kernel_sampling_rank(const RationalInner& theta,
                                const std::vector<std::pair<Complex, Complex>>& ws,
                                int grid_n = 256, double tol = 1e-7) {
    const ModelSpace ms(theta, grid_n);
    const int n = grid_n;
    const double n2 = static_cast<double>(n) * n;
    Eigen::MatrixXcd h(static_cast<Eigen::Index>(n) * n, ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const auto [w1, w2] = ws[i];
        const TorusGrid kw = ms.kernel_grid(w1, w2);
        const TorusGrid skw = ms.shift_explicit(kw, 1, false);
        const TorusGrid geom = TorusGrid::from_function(
            n, [&](Complex, Complex z2) { return 1.0 / (1.0 - z2 * std::conj(w2)); });
        const TorusGrid bkw =
            std::conj(w1) * kw -
            std::conj(theta(w1, w2)) * pointwise(ms.backshifted_theta(1), geom);
        const TorusGrid comm = backshift_grid(skw, 1) - ms.shift_explicit(bkw, 1, false);
        h.col(i) = comm.samples().reshaped();
    }
    const Eigen::MatrixXcd gram = (h.adjoint() * h) / n2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    Eigen::VectorXd sv = es.eigenvalues().cwiseMax(0.0);
    std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
    return detail::count_rank(sv, tol, 1e-14);
}

/// Eigenvalues of a Hermitian matrix clustered within cluster_tol after
/// normalizing by the largest modulus; the zero cluster is excluded. Returns
/// (eigenvalue, multiplicity) sorted by decreasing eigenvalue.
inline std::vector<std::pair<double, int>> eigen_multiplicities(const OperatorMatrix& a,
                                                                double cluster_tol = 1e-6) {
    const double scale0 = std::max(1.0, a.entries.cwiseAbs().maxCoeff());
    if ((a.entries - a.entries.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale0)
        throw NotHermitian("eigen_multiplicities: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a.entries + a.entries.adjoint()),
                                                       Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    std::vector<std::pair<double, int>> out;
    if (top <= 0.0) return out;
    std::sort(ev.data(), ev.data() + ev.size());
    std::vector<std::pair<double, int>> clusters;
    double sum = ev(0);
    int count = 1;
    for (Eigen::Index i = 1; i <= ev.size(); ++i) {
        if (i < ev.size() && std::abs(ev(i) - ev(i - 1)) / top <= cluster_tol) {
            sum += ev(i);
            ++count;
        } else {
            clusters.emplace_back(sum / count, count);
            if (i < ev.size()) {
                sum = ev(i);
                count = 1;
            }
        }
    }
    for (const auto& [val, mult] : clusters)
        if (std::abs(val) / top > cluster_tol) out.emplace_back(val, mult);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first > y.first; });
    return out;
}

struct PointSpectrumReport {
    Eigen::VectorXcd eigenvalues;       // of the S2min diagonal block of S_z1
    std::vector<double> zero_distances; // per Blaschke zero of phi
    double max_distance = 0.0;
    double max_modulus = 0.0;
    int block_dim = 0;
    bool contains_zeros(double tol = 1e-7) const { return max_distance <= tol; }
};

/// The point spectrum of the S2min block of S_z1 must contain the zeros of
/// phi (degree-preserved exactly since the zeros are stored data).
inline PointSpectrumReport point_spectrum_check(const ProductInner& f, int d, int grid_n) {
    if (f.phi.degree() == 0)
        throw DegenerateInput("point_spectrum_check: phi must be nonconstant");
    const ProductBlocks pb = product_blocks(f, d, grid_n);
    const double n2 = static_cast<double>(grid_n) * grid_n;
    const Eigen::VectorXcd zf = detail::coordinate_factor(grid_n, 1);
    Eigen::MatrixXcd z2 = pb.s2;
    z2.array().colwise() *= zf.array();
    const Eigen::MatrixXcd m22 = (pb.s2.adjoint() * z2) / n2;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m22, false);
    PointSpectrumReport rep;
    rep.eigenvalues = es.eigenvalues();
    rep.block_dim = static_cast<int>(m22.rows());
    rep.max_modulus = rep.eigenvalues.size() ? rep.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    for (const Complex& zero : f.phi.zeros) {
        double dist = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
            dist = std::min(dist, std::abs(rep.eigenvalues(i) - zero));
        rep.zero_distances.push_back(dist);
        rep.max_distance = std::max(rep.max_distance, dist);
    }
    return rep;
}

struct RankLawReport {
    int deg1 = 0, deg2 = 0;
    bool predicted_finite = false;  // deg1 <= 1 predicts rank = deg2
    RankReport ladder;
    int sampling_rank = -1;
    bool rank_bound_ok = true;      // every rung rank <= deg2 when finite is predicted
    bool consistent = false;
    std::string detail;
};

/// Rank-law harness: predicts rank deg2 when deg1 <= 1 (else unbounded
/// growth), runs the truncation ladder and the frame-free sampling rank, and
/// checks the per-rung upper bound in the finite case.
inline RankLawReport rank_law_harness(const RationalInner& theta, int grid_n = 256,
                                       std::vector<int> degrees = {4, 6, 8, 10, 12},
                                       double tol = 1e-7, std::uint64_t seed = 11) {
    RankLawReport rep;
    rep.deg1 = theta.deg1();
    rep.deg2 = theta.deg2();
    rep.predicted_finite = rep.deg1 <= 1;
    rep.ladder = rank_ladder(theta, 1, degrees, tol, grid_n);
    if (rep.predicted_finite) {
        const int npts = std::max(8, 2 * (rep.deg2 + 2));
        rep.sampling_rank = kernel_sampling_rank(theta, bidisk_points(npts, 0.8, seed), grid_n, tol);
        for (const auto& rung : rep.ladder.ladder)
            rep.rank_bound_ok = rep.rank_bound_ok && rung.numerical_rank <= rep.deg2;
        rep.consistent = rep.ladder.verdict == RankVerdict::stabilized &&
                         rep.ladder.rank == rep.deg2 && rep.sampling_rank == rep.deg2 &&
                         rep.rank_bound_ok;
        if (!rep.consistent)
            rep.detail = "expected stabilized rank " + std::to_string(rep.deg2) + ", got verdict " +
                         to_string(rep.ladder.verdict) + " rank " + std::to_string(rep.ladder.rank) +
                         ", sampling rank " + std::to_string(rep.sampling_rank);
    } else {
        rep.consistent = rep.ladder.verdict == RankVerdict::growing;
        if (!rep.consistent)
            rep.detail = std::string("expected growing ladder, got ") + to_string(rep.ladder.verdict);
    }
    return rep;
}

}  // namespace bidisk
