#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "agler.hpp"
#include "errors.hpp"
#include "inner_function.hpp"
#include "torus_grid.hpp"

namespace bidisk {

namespace detail {

/// Grid samples vectorized column-major: entry j + N*k is the value at
/// (tau_j, tau_k). These factors multiply a vectorized grid by a coordinate.
inline Eigen::VectorXcd coordinate_factor(int n, int var) {
    const Eigen::VectorXcd tau = TorusGrid::nodes(n);
    Eigen::VectorXcd f(static_cast<Eigen::Index>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) f(j + static_cast<Eigen::Index>(n) * k) = var == 1 ? tau(j) : tau(k);
    return f;
}

struct PivotedGram {
    std::vector<int> pivots;        // retained raw indices, elimination order
    Eigen::MatrixXcd transform;     // raw-count x rank, raw * transform orthonormal
};

/// Pivoted Cholesky of a Gram matrix with a drop rule on the Cholesky
/// diagonal (the squared residual over the retained span): a vector is
/// dropped once that diagonal falls to drop_tol. Directions closer to the
/// span than sqrt(drop_tol) cannot be orthonormalized accurately in double
/// precision anyway. ordered = true eliminates in natural order instead of by
/// largest residual, which keeps block bookkeeping intact.
inline PivotedGram pivoted_gram_orthonormalize(const Eigen::MatrixXcd& gram, double drop_tol,
                                               bool ordered = false) {
    const int k = static_cast<int>(gram.rows());
    Eigen::VectorXd d = gram.diagonal().real().cwiseMax(0.0);
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(k, k);
    std::vector<bool> used(k, false);
    std::vector<int> piv;
    const double cut = drop_tol;
    for (int step = 0; step < k; ++step) {
        int p = -1;
        if (ordered) {
            for (int i = 0; i < k && p < 0; ++i)
                if (!used[i] && d(i) > cut) p = i;
        } else {
            double best = cut;
            for (int i = 0; i < k; ++i)
                if (!used[i] && d(i) > best) {
                    best = d(i);
                    p = i;
                }
        }
        if (p < 0) break;
        used[p] = true;
        const double ell = std::sqrt(d(p));
        l(p, step) = ell;
        for (int i = 0; i < k; ++i) {
            if (used[i]) continue;
            Complex acc = gram(i, p);
            for (int t = 0; t < step; ++t) acc -= l(i, t) * std::conj(l(p, t));
            l(i, step) = acc / ell;
            d(i) = std::max(0.0, d(i) - std::norm(l(i, step)));
        }
        piv.push_back(p);
        d(p) = 0.0;
    }
    const int r = static_cast<int>(piv.size());
    Eigen::MatrixXcd lp(r, r);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) lp(i, j) = l(piv[i], j);
    const Eigen::MatrixXcd inv_lh =
        lp.adjoint().triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(r, r));
    Eigen::MatrixXcd transform = Eigen::MatrixXcd::Zero(k, r);
    for (int i = 0; i < r; ++i) transform.row(piv[i]) = inv_lh.row(i);
    return {std::move(piv), std::move(transform)};
}

}  // namespace detail

/// A rational inner function realized on a fixed torus grid, with the
/// model-space projection and the explicit shift action.
class ModelSpace {
  public:
    ModelSpace(RationalInner theta, int grid_n)
        : theta_(std::move(theta)),
          n_(grid_n),
          theta_grid_(sample_inner(theta_, grid_n)) {}

    const RationalInner& theta() const { return theta_; }
    int grid_n() const { return n_; }
    const TorusGrid& theta_grid() const { return theta_grid_; }

    /// T_{z̄_var} theta as a grid (cached).
    const TorusGrid& backshifted_theta(int var) const {
        auto& slot = var == 1 ? tbs1_ : tbs2_;
        if (!slot) {
            const RationalFn f = backshift_theta(theta_, var);
            // denominator p * p|_{z_var=0} is stable by construction
            slot = TorusGrid::from_function(n_, [&](Complex z1, Complex z2) { return f(z1, z2); });
        }
        return *slot;
    }

    TorusGrid project(const TorusGrid& f) const { return project_model(f, theta_grid_); }

    /// Reproducing kernel of the model space at w, as a grid in z.
    TorusGrid kernel_grid(Complex w1, Complex w2) const {
        const Complex tw = std::conj(theta_(w1, w2));
        return TorusGrid::from_function(n_, [&](Complex z1, Complex z2) {
            return (1.0 - theta_(z1, z2) * tw) /
                   ((1.0 - z1 * std::conj(w1)) * (1.0 - z2 * std::conj(w2)));
        });
    }

    /// Explicit compressed shift:
    ///   S_{z1} f = z1 f - <f(w), T_{z̄1}theta(w) / (1 - z̄2 w2)>_{H2} theta(z),
    /// the pairing term extracted as the w1-constant, w2-analytic frequency
    /// slice of f * conj(T_{z̄1}theta). var = 2 is the symmetric formula.
    TorusGrid shift_explicit(const TorusGrid& f, int var = 1, bool check_membership = true) const {
        if (check_membership) {
            const double nf = grid_norm(f);
            if (grid_norm(project(f) - f) > 1e-8 * std::max(1.0, nf))
                throw NotInModelSpace("shift_explicit: input is not in the model space");
        }
        const TorusGrid h = pointwise(f, conj_grid(backshifted_theta(var)));
        // frequency-zero slice in z_var of h, analytic part in the other variable
        Eigen::VectorXcd mean(n_);
        if (var == 1)
            mean = h.samples().colwise().mean().transpose();
        else
            mean = h.samples().rowwise().mean();
        detail::Fft fwd(n_, -1), inv(n_, +1);
        fwd.run(mean.data());
        mean /= static_cast<double>(n_);
        mean.tail(n_ / 2).setZero();
        inv.run(mean.data());
        Eigen::MatrixXcd gs(n_, n_);
        if (var == 1)
            gs = mean.transpose().replicate(n_, 1);
        else
            gs = mean.replicate(1, n_);
        const TorusGrid g(n_, std::move(gs));
        return times_coord(f, var) - pointwise(g, theta_grid_);
    }

    /// [S*_{z_var}, S_{z_var}] applied to a model-space grid function.
    TorusGrid apply_commutator(const TorusGrid& f, int var = 1) const {
        const TorusGrid sf = shift_explicit(f, var, false);
        const TorusGrid bf = backshift_grid(f, var);
        return backshift_grid(sf, var) - shift_explicit(bf, var, false);
    }

  private:
    RationalInner theta_;
    int n_;
    TorusGrid theta_grid_;
    mutable std::optional<TorusGrid> tbs1_, tbs2_;
};

/// Orthonormalized finite frame for a truncation of the model space: the
/// projections P_theta(z1^a z2^b), a <= D1, b <= D2, orthonormalized by
/// pivoted Gram factorization with a residual drop rule.
struct ModelSpaceFrame {
    int d1 = 0, d2 = 0;
    int grid_n = 0;
    double drop_tol = 1e-8;
    std::vector<std::pair<int, int>> monomials;  // raw column -> (a, b)
    Eigen::MatrixXcd raw;                        // N^2 x K grid columns
    Eigen::MatrixXcd transform;                  // K x dim
    Eigen::MatrixXcd ortho;                      // N^2 x dim, orthonormal in the grid pairing
    int dim = 0;

    TorusGrid member(int k) const {
        Eigen::MatrixXcd s = ortho.col(k).reshaped(grid_n, grid_n);
        return TorusGrid(grid_n, std::move(s));
    }
};

inline ModelSpaceFrame build_frame(const ModelSpace& ms, int d1, int d2, double drop_tol = 1e-8) {
    const int n = ms.grid_n();
    const int deg = std::max(ms.theta().deg1(), ms.theta().deg2());
    if (n < 4 * (d1 + d2 + deg))
        throw DegenerateInput("build_frame: grid too small for the requested truncation");
    ModelSpaceFrame fr;
    fr.d1 = d1;
    fr.d2 = d2;
    fr.grid_n = n;
    fr.drop_tol = drop_tol;
    const int k = (d1 + 1) * (d2 + 1);
    fr.raw.resize(static_cast<Eigen::Index>(n) * n, k);
    const Eigen::VectorXcd tau = TorusGrid::nodes(n);
    for (int a = 0; a <= d1; ++a)
        for (int b = 0; b <= d2; ++b) {
            Eigen::VectorXcd t1(n), t2(n);
            for (int j = 0; j < n; ++j) {
                t1(j) = std::pow(tau(j), a);
                t2(j) = std::pow(tau(j), b);
            }
            const Eigen::MatrixXcd mono = t1 * t2.transpose();
            const TorusGrid proj = ms.project(TorusGrid(n, mono));
            fr.monomials.emplace_back(a, b);
            fr.raw.col(a * (d2 + 1) + b) = proj.samples().reshaped();
        }
    const Eigen::MatrixXcd gram = (fr.raw.adjoint() * fr.raw) / (static_cast<double>(n) * n);
    auto piv = detail::pivoted_gram_orthonormalize(gram, drop_tol);
    fr.transform = std::move(piv.transform);
    fr.dim = static_cast<int>(fr.transform.cols());
    if (fr.dim == 0) throw DegenerateFrame("build_frame: model space truncation is trivial");
    fr.ortho = fr.raw * fr.transform;
    return fr;
}

/// Expansion coefficients over the frame of the projection of the reproducing
/// kernel K_w.
inline Eigen::VectorXcd kernel_at(const ModelSpace& ms, const ModelSpaceFrame& fr, Complex w1,
                                  Complex w2) {
    const TorusGrid kw = ms.kernel_grid(w1, w2);
    return (fr.ortho.adjoint() * kw.samples().reshaped()) /
           (static_cast<double>(fr.grid_n) * fr.grid_n);
}

/// A square matrix over a frame's orthonormal basis.
struct OperatorMatrix {
    Eigen::MatrixXcd entries;
    std::string label;
};

/// Matrix of the compressed shift S_{z_var} over the frame. Since the frame
/// members lie in the model space, <P_theta(z e_k), e_j> = <z e_k, e_j>, so
/// no projection is applied entrywise.
inline OperatorMatrix compress_shift(const ModelSpace& ms, const ModelSpaceFrame& fr, int var) {
    const Eigen::VectorXcd zf = detail::coordinate_factor(fr.grid_n, var);
    Eigen::MatrixXcd ze = fr.ortho;
    ze.array().colwise() *= zf.array();
    OperatorMatrix out;
    out.entries = (fr.ortho.adjoint() * ze) / (static_cast<double>(fr.grid_n) * fr.grid_n);
    out.label = var == 1 ? "S_z1" : "S_z2";
    (void)ms;
    return out;
}

/// Matrix of the backward shift T_{z̄_var} over the frame, built from the
/// pointwise backshift (independent route used for adjoint-consistency checks).
inline OperatorMatrix backshift_matrix(const ModelSpace& ms, const ModelSpaceFrame& fr, int var) {
    const Eigen::Index sz = fr.ortho.rows();
    Eigen::MatrixXcd be(sz, fr.dim);
    for (int k = 0; k < fr.dim; ++k)
        be.col(k) = backshift_grid(fr.member(k), var).samples().reshaped();
    OperatorMatrix out;
    out.entries = (fr.ortho.adjoint() * be) / (static_cast<double>(fr.grid_n) * fr.grid_n);
    out.label = var == 1 ? "T_z1bar" : "T_z2bar";
    (void)ms;
    return out;
}

/// Orthonormal grid columns spanning truncations of the product-case Agler
/// subspaces: block1 = K_psi^2 (x) span{z1^a}, block2 = K_phi^1 (x) psi span{z2^b}.
struct ProductBlocks {
    int n = 0, m = 0, d = 0;
    int grid_n = 0;
    Eigen::MatrixXcd s1;  // column (i, a) = i*(d+1)+a : tm_psi_i(z2) z1^a
    Eigen::MatrixXcd s2;  // column (j, b) = j*(d+1)+b : tm_phi_j(z1) psi(z2) z2^b
};

inline ProductBlocks product_blocks(const ProductInner& f, int d, int grid_n) {
    ProductBlocks pb;
    pb.n = f.psi.degree();
    pb.m = f.phi.degree();
    pb.d = d;
    pb.grid_n = grid_n;
    const Eigen::VectorXcd tau = TorusGrid::nodes(grid_n);
    const Eigen::MatrixXcd tm_psi = tm_basis_at(f.psi, tau);  // grid x n
    const Eigen::MatrixXcd tm_phi = tm_basis_at(f.phi, tau);  // grid x m
    Eigen::VectorXcd psi_vals(grid_n);
    for (int k = 0; k < grid_n; ++k) psi_vals(k) = f.psi(tau(k));

    const Eigen::Index sz = static_cast<Eigen::Index>(grid_n) * grid_n;
    pb.s1.resize(sz, static_cast<Eigen::Index>(pb.n) * (d + 1));
    for (int i = 0; i < pb.n; ++i)
        for (int a = 0; a <= d; ++a) {
            Eigen::VectorXcd t1(grid_n);
            for (int j = 0; j < grid_n; ++j) t1(j) = std::pow(tau(j), a);
            const Eigen::MatrixXcd g = t1 * tm_psi.col(i).transpose();
            pb.s1.col(static_cast<Eigen::Index>(i) * (d + 1) + a) = g.reshaped();
        }
    pb.s2.resize(sz, static_cast<Eigen::Index>(pb.m) * (d + 1));
    for (int j = 0; j < pb.m; ++j)
        for (int b = 0; b <= d; ++b) {
            Eigen::VectorXcd t2(grid_n);
            for (int k = 0; k < grid_n; ++k) t2(k) = psi_vals(k) * std::pow(tau(k), b);
            const Eigen::MatrixXcd g = tm_phi.col(j) * t2.transpose();
            pb.s2.col(static_cast<Eigen::Index>(j) * (d + 1) + b) = g.reshaped();
        }
    return pb;
}

struct BlockStructureReport {
    int dim1 = 0, dim2 = 0;
    double off_diag_max = 0.0;    // coupling between the two blocks in S_z1
    double cross_gram_max = 0.0;  // orthogonality defect between the blocks
    double diag1_err = 0.0;       // block 1 against T_z1 restricted (product case)
    double diag2_err = 0.0;       // block 2 against the 1-variable model shift (x) I
    bool pass(double tol = 1e-8) const {
        return off_diag_max <= tol && cross_gram_max <= tol && diag1_err <= tol && diag2_err <= tol;
    }
};

/// Block-diagonality test for theta = phi(z1) psi(z2): in the split
/// basis of the two canonical Agler subspaces, S_z1 must be block diagonal
/// with the displayed diagonal blocks.
inline BlockStructureReport block_structure_check(const ProductInner& f, int d, int grid_n) {
    const ProductBlocks pb = product_blocks(f, d, grid_n);
    const double n2 = static_cast<double>(grid_n) * grid_n;
    BlockStructureReport rep;
    rep.dim1 = static_cast<int>(pb.s1.cols());
    rep.dim2 = static_cast<int>(pb.s2.cols());

    if (rep.dim1 > 0 && rep.dim2 > 0)
        rep.cross_gram_max = ((pb.s1.adjoint() * pb.s2) / n2).cwiseAbs().maxCoeff();

    const Eigen::VectorXcd zf = detail::coordinate_factor(grid_n, 1);
    auto shifted = [&](const Eigen::MatrixXcd& b) {
        Eigen::MatrixXcd zb = b;
        zb.array().colwise() *= zf.array();
        return zb;
    };
    const Eigen::MatrixXcd z1 = shifted(pb.s1), z2 = shifted(pb.s2);

    if (rep.dim1 > 0) {
        const Eigen::MatrixXcd m11 = (pb.s1.adjoint() * z1) / n2;
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(rep.dim1, rep.dim1);
        for (int i = 0; i < pb.n; ++i)
            for (int a = 0; a < pb.d; ++a)
                expected(i * (pb.d + 1) + a + 1, i * (pb.d + 1) + a) = 1.0;
        rep.diag1_err = (m11 - expected).cwiseAbs().maxCoeff();
    }
    if (rep.dim2 > 0) {
        const Eigen::MatrixXcd m22 = (pb.s2.adjoint() * z2) / n2;
        const Eigen::MatrixXcd sphi = one_var_compressed_shift(f.phi, grid_n);
        Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(rep.dim2, rep.dim2);
        for (int j = 0; j < pb.m; ++j)
            for (int j2 = 0; j2 < pb.m; ++j2)
                for (int b = 0; b <= pb.d; ++b)
                    expected(j * (pb.d + 1) + b, j2 * (pb.d + 1) + b) = sphi(j, j2);
        rep.diag2_err = (m22 - expected).cwiseAbs().maxCoeff();
    }
    if (rep.dim1 > 0 && rep.dim2 > 0) {
        const double up = ((pb.s1.adjoint() * z2) / n2).cwiseAbs().maxCoeff();
        const double lo = ((pb.s2.adjoint() * z1) / n2).cwiseAbs().maxCoeff();
        rep.off_diag_max = std::max(up, lo);
    }
    return rep;
}

/// The analogous split for a general rational inner function, built from the
/// column spaces of a computed Agler pair. Used as the non-reducing witness:
/// for non-products the upper off-diagonal corner carries mass.
inline BlockStructureReport block_structure_check(const ModelSpace& ms, const AglerPair& pair,
                                                  int d, double drop_tol = 1e-8) {
    const int grid_n = ms.grid_n();
    const double n2 = static_cast<double>(grid_n) * grid_n;
    auto column_functions = [&](const GramKernel& k) {
        std::vector<TorusGrid> fs;
        if (k.basis_size() == 0) return fs;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k.gram);
        const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
        for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
            // keep only numerical-rank columns; below this the eigenvectors
            // are solver noise
            if (es.eigenvalues()(e) <= 1e-8 * std::max(top, 1e-30)) continue;
            const Eigen::VectorXcd u = std::sqrt(es.eigenvalues()(e)) * es.eigenvectors().col(e);
            fs.push_back(TorusGrid::from_function(grid_n, [&](Complex z1, Complex z2) {
                const Eigen::VectorXcd v = monomial_vector(k.deg1, k.deg2, z1, z2);
                return (v.transpose() * u)(0) / k.denom(z1, z2);
            }));
        }
        return fs;
    };
    const auto f1 = column_functions(pair.k1);
    const auto f2 = column_functions(pair.k2);

    const Eigen::Index sz = static_cast<Eigen::Index>(grid_n) * grid_n;
    const int c1 = static_cast<int>(f1.size()) * (d + 1);
    const int c2 = static_cast<int>(f2.size()) * (d + 1);
    Eigen::MatrixXcd cols(sz, c1 + c2);
    const Eigen::VectorXcd zf1 = detail::coordinate_factor(grid_n, 1);
    const Eigen::VectorXcd zf2 = detail::coordinate_factor(grid_n, 2);
    int c = 0;
    for (const auto& f : f1) {
        Eigen::VectorXcd v = f.samples().reshaped();
        for (int a = 0; a <= d; ++a) {
            cols.col(c++) = v;
            v = v.cwiseProduct(zf1);
        }
    }
    for (const auto& f : f2) {
        Eigen::VectorXcd v = f.samples().reshaped();
        for (int b = 0; b <= d; ++b) {
            cols.col(c++) = v;
            v = v.cwiseProduct(zf2);
        }
    }
    const Eigen::MatrixXcd gram = (cols.adjoint() * cols) / n2;
    const auto piv = detail::pivoted_gram_orthonormalize(gram, drop_tol, /*ordered=*/true);
    Eigen::MatrixXcd e = cols * piv.transform;
    std::vector<int> block_of;
    for (int idx : piv.pivots) block_of.push_back(idx < c1 ? 0 : 1);

    Eigen::MatrixXcd ze = e;
    ze.array().colwise() *= zf1.array();
    const Eigen::MatrixXcd mat = (e.adjoint() * ze) / n2;

    BlockStructureReport rep;
    for (int b : block_of)
        (b == 0 ? rep.dim1 : rep.dim2)++;
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
        for (Eigen::Index j = 0; j < mat.cols(); ++j)
            if (block_of[i] != block_of[j])
                rep.off_diag_max = std::max(rep.off_diag_max, std::abs(mat(i, j)));
    return rep;
}

}  // namespace bidisk
