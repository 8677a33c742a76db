#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "bipoly.hpp"
#include "errors.hpp"
#include "inner_function.hpp"
#include "random.hpp"

namespace bidisk {

/// Monomial column vector v with v[(i,j)] = z1^i z2^j, 0 <= i <= d1,
/// 0 <= j <= d2, index (i,j) -> i*(d2+1)+j. Empty when a bound is negative.
inline Eigen::VectorXcd monomial_vector(int d1, int d2, Complex z1, Complex z2) {
    if (d1 < 0 || d2 < 0) return Eigen::VectorXcd(0);
    Eigen::VectorXcd v((d1 + 1) * (d2 + 1));
    Complex p1 = 1.0;
    for (int i = 0; i <= d1; ++i) {
        Complex p2 = 1.0;
        for (int j = 0; j <= d2; ++j) {
            v(i * (d2 + 1) + j) = p1 * p2;
            p2 *= z2;
        }
        p1 *= z1;
    }
    return v;
}

/// A positive semidefinite kernel in Gram form:
///   K(z, w) = v(z)^T gram conj(v(w)) / (p(z) conj(p(w))),
/// v the monomial vector up to (deg1, deg2). deg1 < 0 or deg2 < 0 encodes the
/// zero kernel on an empty basis.
struct GramKernel {
    BiPoly denom = BiPoly::constant(1.0);
    int deg1 = -1;
    int deg2 = -1;
    Eigen::MatrixXcd gram;

    int basis_size() const { return (deg1 < 0 || deg2 < 0) ? 0 : (deg1 + 1) * (deg2 + 1); }

    Complex eval(Complex z1, Complex z2, Complex w1, Complex w2) const {
        if (basis_size() == 0) return 0.0;
        const Eigen::VectorXcd vz = monomial_vector(deg1, deg2, z1, z2);
        const Eigen::VectorXcd vw = monomial_vector(deg1, deg2, w1, w2);
        const Complex q = (vz.transpose() * gram * vw.conjugate())(0);
        return q / (denom(z1, z2) * std::conj(denom(w1, w2)));
    }
};

inline Complex kernel_eval(const GramKernel& k, std::pair<Complex, Complex> z,
                           std::pair<Complex, Complex> w) {
    return k.eval(z.first, z.second, w.first, w.second);
}

/// Number of Gram eigenvalues above tol times the largest.
inline int kernel_rank(const GramKernel& k, double tol = 1e-8) {
    if (k.basis_size() == 0) return 0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k.gram, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (top <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > tol * top) ++r;
    return r;
}

enum class PairFlavor { max1min2, min1max2, generic };

inline const char* to_string(PairFlavor f) {
    switch (f) {
        case PairFlavor::max1min2: return "max1min2";
        case PairFlavor::min1max2: return "min1max2";
        default: return "generic";
    }
}

/// An Agler kernel pair: 1 - theta(z) conj(theta(w)) =
/// (1 - z1 conj(w1)) K2 + (1 - z2 conj(w2)) K1.
struct AglerPair {
    GramKernel k1;  // basis degree <= (m, n-1)
    GramKernel k2;  // basis degree <= (m-1, n)
    PairFlavor flavor = PairFlavor::generic;
};

/// Max absolute residual of the defining identity at random bidisk pairs.
inline double identity_residual(const RationalInner& theta, const AglerPair& pair, int count = 100,
                                std::uint64_t seed = 7) {
    Rng rng(seed);
    double worst = 0.0;
    for (int s = 0; s < count; ++s) {
        const Complex z1 = rng.disk(0.8), z2 = rng.disk(0.8);
        const Complex w1 = rng.disk(0.8), w2 = rng.disk(0.8);
        const Complex lhs = 1.0 - theta(z1, z2) * std::conj(theta(w1, w2));
        const Complex rhs = (1.0 - z1 * std::conj(w1)) * pair.k2.eval(z1, z2, w1, w2) +
                            (1.0 - z2 * std::conj(w2)) * pair.k1.eval(z1, z2, w1, w2);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

namespace detail {

/// Real parameterization of an M x M Hermitian matrix by M^2 parameters:
/// diagonal entries, then re/im of the strict upper triangle.
struct HermShape {
    int size = 0;

    int params() const { return size * size; }

    Eigen::MatrixXcd unpack(const Eigen::VectorXd& t, int offset) const {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(size, size);
        int k = offset;
        for (int i = 0; i < size; ++i) g(i, i) = t(k++);
        for (int i = 0; i < size; ++i)
            for (int j = i + 1; j < size; ++j) {
                const Complex v(t(k), t(k + 1));
                k += 2;
                g(i, j) = v;
                g(j, i) = std::conj(v);
            }
        return g;
    }

    void pack(const Eigen::MatrixXcd& g, Eigen::VectorXd& t, int offset) const {
        int k = offset;
        for (int i = 0; i < size; ++i) t(k++) = g(i, i).real();
        for (int i = 0; i < size; ++i)
            for (int j = i + 1; j < size; ++j) {
                t(k++) = g(i, j).real();
                t(k++) = g(i, j).imag();
            }
    }
};

/// Coefficient-matching map of the cleared kernel identity: contribution of
/// (G1, G2) to the (z^alpha w̄^beta) coefficient array, alpha, beta in the
/// (m+1) x (n+1) box.
inline Eigen::MatrixXcd lift_residual(const Eigen::MatrixXcd& g1, const Eigen::MatrixXcd& g2, int m,
                                      int n) {
    const int q = (m + 1) * (n + 1);
    auto box = [n](int i, int j) { return i * (n + 1) + j; };
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(q, q);
    if (n >= 1) {
        auto idx1 = [n](int i, int j) { return i * n + j; };
        for (int a1 = 0; a1 <= m; ++a1)
            for (int a2 = 0; a2 < n; ++a2)
                for (int b1 = 0; b1 <= m; ++b1)
                    for (int b2 = 0; b2 < n; ++b2) {
                        const Complex v = g1(idx1(a1, a2), idx1(b1, b2));
                        r(box(a1, a2), box(b1, b2)) += v;
                        r(box(a1, a2 + 1), box(b1, b2 + 1)) -= v;
                    }
    }
    if (m >= 1) {
        auto idx2 = [n](int i, int j) { return i * (n + 1) + j; };
        for (int a1 = 0; a1 < m; ++a1)
            for (int a2 = 0; a2 <= n; ++a2)
                for (int b1 = 0; b1 < m; ++b1)
                    for (int b2 = 0; b2 <= n; ++b2) {
                        const Complex v = g2(idx2(a1, a2), idx2(b1, b2));
                        r(box(a1, a2), box(b1, b2)) += v;
                        r(box(a1 + 1, a2), box(b1 + 1, b2)) -= v;
                    }
    }
    return r;
}

}  // namespace detail

/// The affine family of all Hermitian (G1, G2) matching the coefficients of
/// p(z) conj(p(w)) - num(z) conj(num(w)) in the cleared identity (positivity
/// not imposed). Points are offset + nullspace * t, t real of length dim().
class ConstraintSystem {
  public:
    explicit ConstraintSystem(const RationalInner& theta) : theta_(theta) {
        m_ = theta.deg1();
        n_ = theta.deg2();
        if (m_ == 0 && n_ == 0)
            throw DegenerateInput("solve_constraints: constant inner function");
        s1_.size = (m_ + 1) * n_;
        s2_.size = m_ * (n_ + 1);
        build();
    }

    int dim() const { return static_cast<int>(null_.cols()); }
    int deg1() const { return m_; }
    int deg2() const { return n_; }
    const RationalInner& theta() const { return theta_; }
    const detail::HermShape& shape1() const { return s1_; }
    const detail::HermShape& shape2() const { return s2_; }

    std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> matrices_at(const Eigen::VectorXd& t) const {
        Eigen::VectorXd full = offset_;
        if (t.size() > 0) full += null_ * t;
        return {s1_.unpack(full, 0), s2_.unpack(full, s1_.params())};
    }

    AglerPair pair_at(const Eigen::VectorXd& t, PairFlavor flavor = PairFlavor::generic) const {
        auto [g1, g2] = matrices_at(t);
        AglerPair out;
        out.flavor = flavor;
        out.k1 = GramKernel{theta_.p(), m_, n_ - 1, 0.5 * (g1 + g1.adjoint())};
        out.k2 = GramKernel{theta_.p(), m_ - 1, n_, 0.5 * (g2 + g2.adjoint())};
        return out;
    }

    /// Max coefficient residual of a (G1, G2) point against the identity.
    double residual(const Eigen::MatrixXcd& g1, const Eigen::MatrixXcd& g2) const {
        return (detail::lift_residual(g1, g2, m_, n_) - lhs_).cwiseAbs().maxCoeff();
    }

  private:
    void build() {
        const int q = (m_ + 1) * (n_ + 1);
        auto flat = [&](const BiPoly& poly, int i, int j) { return poly.coeff(i, j); };
        lhs_ = Eigen::MatrixXcd::Zero(q, q);
        for (int a1 = 0; a1 <= m_; ++a1)
            for (int a2 = 0; a2 <= n_; ++a2)
                for (int b1 = 0; b1 <= m_; ++b1)
                    for (int b2 = 0; b2 <= n_; ++b2)
                        lhs_(a1 * (n_ + 1) + a2, b1 * (n_ + 1) + b2) =
                            flat(theta_.p(), a1, a2) * std::conj(flat(theta_.p(), b1, b2)) -
                            flat(theta_.p_reflected(), a1, a2) *
                                std::conj(flat(theta_.p_reflected(), b1, b2));

        const int total = s1_.params() + s2_.params();
        Eigen::MatrixXd a(2 * q * q, total);
        for (int c = 0; c < total; ++c) {
            Eigen::VectorXd unit = Eigen::VectorXd::Zero(total);
            unit(c) = 1.0;
            const Eigen::MatrixXcd r = detail::lift_residual(
                s1_.unpack(unit, 0), s2_.unpack(unit, s1_.params()), m_, n_);
            a.col(c).head(q * q) = r.reshaped().real();
            a.col(c).tail(q * q) = r.reshaped().imag();
        }
        Eigen::VectorXd b(2 * q * q);
        b.head(q * q) = lhs_.reshaped().real();
        b.tail(q * q) = lhs_.reshaped().imag();

        Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        const double top = sv.size() > 0 ? sv(0) : 0.0;
        const double cut = std::max(1e-10 * top, 1e-13);
        int rank = 0;
        while (rank < sv.size() && sv(rank) > cut) ++rank;

        // least-squares particular solution restricted to the numerical rank
        Eigen::VectorXd ub = svd.matrixU().transpose() * b;
        Eigen::VectorXd y = Eigen::VectorXd::Zero(sv.size());
        for (int i = 0; i < rank; ++i) y(i) = ub(i) / sv(i);
        offset_ = svd.matrixV() * y;
        null_ = svd.matrixV().rightCols(total - rank);

        const double scale = std::max(1.0, lhs_.cwiseAbs().maxCoeff());
        auto [g1, g2] = matrices_at(Eigen::VectorXd::Zero(dim()));
        if (residual(g1, g2) > 1e-10 * scale)
            throw InfeasibleIdentity("solve_constraints: coefficient identity is inconsistent");
    }

    RationalInner theta_;
    int m_ = 0, n_ = 0;
    detail::HermShape s1_, s2_;
    Eigen::MatrixXcd lhs_;
    Eigen::VectorXd offset_;
    Eigen::MatrixXd null_;
};

inline ConstraintSystem solve_constraints(const RationalInner& theta) {
    return ConstraintSystem(theta);
}

namespace detail {

/// One-variable Christoffel-Darboux Gram: given denominator and numerator
/// coefficient vectors of an inner function (length q+1), the q x q matrix B
/// with d(z) conj(d(w)) - nu(z) conj(nu(w)) = (1 - z conj(w)) sum B_jl z^j conj(w)^l.
inline Eigen::MatrixXcd christoffel_darboux(const Eigen::VectorXcd& den,
                                            const Eigen::VectorXcd& num) {
    const int q = static_cast<int>(den.size()) - 1;
    const Eigen::MatrixXcd a = den * den.adjoint() - num * num.adjoint();
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(std::max(q, 0), std::max(q, 0));
    for (int j = 0; j < q; ++j)
        for (int l = 0; l < q; ++l) {
            Complex acc = 0.0;
            for (int t = 0; t <= std::min(j, l); ++t) acc += a(j - t, l - t);
            b(j, l) = acc;
        }
    return b;
}

inline GramKernel kron_kernel(const BiPoly& p, int d1, int d2, const Eigen::MatrixXcd& factor1,
                              const Eigen::MatrixXcd& factor2) {
    GramKernel k;
    k.denom = p;
    k.deg1 = d1;
    k.deg2 = d2;
    const int sz = k.basis_size();
    k.gram = Eigen::MatrixXcd::Zero(sz, sz);
    for (int i = 0; i <= d1; ++i)
        for (int j = 0; j <= d2; ++j)
            for (int i2 = 0; i2 <= d1; ++i2)
                for (int j2 = 0; j2 <= d2; ++j2)
                    k.gram(i * (d2 + 1) + j, i2 * (d2 + 1) + j2) = factor1(i, i2) * factor2(j, j2);
    return k;
}

}  // namespace detail

/// Closed-form canonical pairs for theta = phi(z1) psi(z2):
///   K1max = (1 - psi(z2) conj(psi(w2))) / (1 - z2 conj(w2)),
///   K2min = psi(z2) conj(psi(w2)) (1 - phi(z1) conj(phi(w1))) / (1 - z1 conj(w1)),
/// and symmetrically for (K1min, K2max), expressed as Gram kernels over the
/// shared denominator of the rational form.
inline std::pair<AglerPair, AglerPair> closed_form_product(const ProductInner& f) {
    const RationalInner theta = RationalInner::from_product(f);
    const int m = f.phi.degree(), n = f.psi.degree();
    const Eigen::VectorXcd d1 = f.phi.denominator_coeffs(), n1 = f.phi.numerator_coeffs();
    const Eigen::VectorXcd d2 = f.psi.denominator_coeffs(), n2 = f.psi.numerator_coeffs();
    const Eigen::MatrixXcd b1 = detail::christoffel_darboux(d1, n1);
    const Eigen::MatrixXcd b2 = detail::christoffel_darboux(d2, n2);
    const BiPoly& p = theta.p();

    AglerPair maxmin;
    maxmin.flavor = PairFlavor::max1min2;
    maxmin.k1 = (n >= 1) ? detail::kron_kernel(p, m, n - 1, Eigen::MatrixXcd(d1 * d1.adjoint()), b2)
                         : GramKernel{p, -1, -1, {}};
    maxmin.k2 = (m >= 1) ? detail::kron_kernel(p, m - 1, n, b1, Eigen::MatrixXcd(n2 * n2.adjoint()))
                         : GramKernel{p, -1, -1, {}};

    AglerPair minmax;
    minmax.flavor = PairFlavor::min1max2;
    minmax.k1 = (n >= 1) ? detail::kron_kernel(p, m, n - 1, Eigen::MatrixXcd(n1 * n1.adjoint()), b2)
                         : GramKernel{p, -1, -1, {}};
    minmax.k2 = (m >= 1) ? detail::kron_kernel(p, m - 1, n, b1, Eigen::MatrixXcd(d2 * d2.adjoint()))
                         : GramKernel{p, -1, -1, {}};
    return {maxmin, minmax};
}

struct ExtremalOptions {
    std::uint64_t seed = 20240601;
    int functional_points = 32;     // fixed evaluation points of the linear functional
    double point_radius = 0.8;
    double mu_min = 1e-8;           // barrier ladder 1 -> mu_min, factor 10
    int newton_max = 60;
    bool run_verification = true;   // sampled Loewner check of the result
    int verify_feasible_samples = 20;
    int verify_gram_points = 40;
};

namespace detail {

struct AffineSdp {
    // G_j(t) = c[j] + sum_a t_a b[j][a]; empty matrices are skipped.
    std::vector<Eigen::MatrixXcd> c;
    std::vector<std::vector<Eigen::MatrixXcd>> b;
    int dim = 0;

    double min_eig(const Eigen::VectorXd& t) const {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.size(); ++j) {
            Eigen::MatrixXcd g = c[j];
            for (int a = 0; a < dim; ++a) g += t(a) * b[j][a];
            if (g.rows() == 0) continue;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
            lo = std::min(lo, es.eigenvalues().minCoeff());
        }
        return std::isfinite(lo) ? lo : 1.0;
    }

    bool feasible(const Eigen::VectorXd& t, double slack = 0.0) const { return min_eig(t) >= -slack; }
};

/// Damped Newton descent of obj(t) = -objective . t - mu * sum_j logdet G_j(t).
/// Returns false when no strictly feasible progress is possible.
inline bool barrier_newton(const AffineSdp& sdp, const Eigen::VectorXd& objective, double mu,
                           Eigen::VectorXd& t, int max_iter) {
    const int d = sdp.dim;
    for (int it = 0; it < max_iter; ++it) {
        double logdet = 0.0;
        std::vector<std::vector<Eigen::MatrixXcd>> whitened(sdp.c.size());
        for (std::size_t j = 0; j < sdp.c.size(); ++j) {
            Eigen::MatrixXcd g = sdp.c[j];
            for (int a = 0; a < d; ++a) g += t(a) * sdp.b[j][a];
            if (g.rows() == 0) continue;
            Eigen::LLT<Eigen::MatrixXcd> llt(g);
            if (llt.info() != Eigen::Success) return false;
            const Eigen::MatrixXcd l = llt.matrixL();
            logdet += 2.0 * l.diagonal().real().array().log().sum();
            whitened[j].resize(d);
            for (int a = 0; a < d; ++a) {
                Eigen::MatrixXcd m = l.triangularView<Eigen::Lower>().solve(sdp.b[j][a]);
                m = l.triangularView<Eigen::Lower>().solve(m.adjoint()).adjoint();
                whitened[j][a] = std::move(m);
            }
        }
        Eigen::VectorXd grad = -objective;
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
        for (std::size_t j = 0; j < sdp.c.size(); ++j) {
            if (whitened[j].empty()) continue;
            for (int a = 0; a < d; ++a) {
                grad(a) -= mu * whitened[j][a].trace().real();
                for (int b2 = a; b2 < d; ++b2) {
                    const double v =
                        mu * (whitened[j][a].cwiseProduct(whitened[j][b2].transpose())).sum().real();
                    hess(a, b2) += v;
                    if (b2 != a) hess(b2, a) += v;
                }
            }
        }
        hess.diagonal().array() += 1e-13 * (1.0 + hess.trace() / std::max(d, 1));
        const Eigen::VectorXd step = hess.ldlt().solve(-grad);
        const double decrement = -grad.dot(step);
        if (!(decrement > 1e-11)) return true;

        const double f0 = -objective.dot(t) - mu * logdet;
        auto value = [&](const Eigen::VectorXd& tt, double& out) {
            double ld = 0.0;
            for (std::size_t j = 0; j < sdp.c.size(); ++j) {
                Eigen::MatrixXcd g = sdp.c[j];
                for (int a = 0; a < d; ++a) g += tt(a) * sdp.b[j][a];
                if (g.rows() == 0) continue;
                Eigen::LLT<Eigen::MatrixXcd> llt(g);
                if (llt.info() != Eigen::Success) return false;
                const Eigen::MatrixXcd l = llt.matrixL();
                ld += 2.0 * l.diagonal().real().array().log().sum();
            }
            out = -objective.dot(tt) - mu * ld;
            return true;
        };
        double alpha = 1.0;
        bool moved = false;
        while (alpha > 1e-14) {
            const Eigen::VectorXd cand = t + alpha * step;
            double f1;
            if (value(cand, f1) && f1 <= f0 - 0.25 * alpha * decrement) {
                t = cand;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return true;
    }
    return true;
}

}  // namespace detail

/// Interior-point machinery shared by extremal_pair, feasible sampling, and
/// the reducing-subspace harness.
class ExtremalSolver {
  public:
    ExtremalSolver(const ConstraintSystem& sys, const ExtremalOptions& opt = {})
        : sys_(sys), opt_(opt) {
        base_.dim = sys.dim();
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.dim());
        auto [c1, c2] = sys.matrices_at(zero);
        base_.c = {c1, c2};
        base_.b.resize(2);
        for (int a = 0; a < sys.dim(); ++a) {
            Eigen::VectorXd unit = Eigen::VectorXd::Zero(sys.dim());
            unit(a) = 1.0;
            auto [b1, b2] = sys.matrices_at(unit);
            base_.b[0].push_back(b1 - c1);
            base_.b[1].push_back(b2 - c2);
        }
    }

    /// A point with both blocks strictly positive definite (max-lambda-min
    /// phase). Returns the attained margin; a tiny margin means the feasible
    /// set has (numerically) empty interior.
    std::pair<Eigen::VectorXd, double> interior_point() const {
        const int d = sys_.dim();
        Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
        if (d == 0) return {t, base_.min_eig(t)};
        const double lam0 = base_.min_eig(t);
        double scale = 1.0;
        for (const auto& m : base_.c)
            if (m.rows() > 0) scale = std::max(scale, m.cwiseAbs().maxCoeff());

        detail::AffineSdp ext;  // variables (t, s): blocks G_j(t) - s I
        ext.dim = d + 1;
        ext.c = base_.c;
        ext.b.resize(base_.b.size());
        for (std::size_t j = 0; j < base_.b.size(); ++j) {
            ext.b[j] = base_.b[j];
            const Eigen::Index sz = base_.c[j].rows();
            ext.b[j].push_back(-Eigen::MatrixXcd::Identity(sz, sz));
        }
        Eigen::VectorXd objective = Eigen::VectorXd::Zero(d + 1);
        objective(d) = 1.0;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(d + 1);
        u(d) = lam0 - std::max(1.0, 0.01 * scale);

        for (double mu = std::max(1.0, scale); mu >= 1e-9 * scale; mu *= 0.1) {
            detail::barrier_newton(ext, objective, mu, u, opt_.newton_max);
            if (u(d) > 1e-3 * scale) break;  // comfortably interior already
        }
        const Eigen::VectorXd ti = u.head(d);
        return {ti, base_.min_eig(ti)};
    }

    /// Maximize a linear functional over the PSD slice of the affine family.
    Eigen::VectorXd maximize(const Eigen::VectorXd& functional) const {
        const int d = sys_.dim();
        if (d == 0) return Eigen::VectorXd::Zero(0);
        auto [t, margin] = interior_point();
        double scale = 1.0;
        for (const auto& m : base_.c)
            if (m.rows() > 0) scale = std::max(scale, m.cwiseAbs().maxCoeff());
        if (margin <= 1e-10 * scale) {
            // Numerically empty interior: the family is pinned to a face; fall
            // back to the max-margin point itself.
            return t;
        }
        const double fscale = std::max(1.0, functional.cwiseAbs().maxCoeff());
        for (double mu = fscale; mu >= opt_.mu_min; mu *= 0.1)
            detail::barrier_newton(base_, functional, mu, t, opt_.newton_max);
        return polish(functional, t);
    }

    /// Active-face rounding: chase the boundary the barrier converged to and
    /// solve for the exact vertex of the optimal face.
    Eigen::VectorXd polish(const Eigen::VectorXd& functional, Eigen::VectorXd t) const {
        const int d = sys_.dim();
        for (int round = 0; round < 3; ++round) {
            std::vector<Eigen::VectorXd> rows;
            std::vector<double> rhs;
            auto [g1, g2] = sys_.matrices_at(t);
            const Eigen::MatrixXcd* gs[2] = {&g1, &g2};
            for (int j = 0; j < 2; ++j) {
                const Eigen::MatrixXcd& g = *gs[j];
                if (g.rows() == 0) continue;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
                const double top = std::max(es.eigenvalues().maxCoeff(), 1e-30);
                for (Eigen::Index e = 0; e < es.eigenvalues().size(); ++e) {
                    if (es.eigenvalues()(e) >= 1e-5 * std::max(top, 1.0)) continue;
                    const Eigen::VectorXcd u = es.eigenvectors().col(e);
                    const Eigen::VectorXcd base_ru = base_.c[j] * u;
                    for (Eigen::Index r = 0; r < u.size(); ++r) {
                        Eigen::VectorXd row_re(d), row_im(d);
                        for (int a = 0; a < d; ++a) {
                            const Complex v = (base_.b[j][a].row(r) * u)(0);
                            row_re(a) = v.real();
                            row_im(a) = v.imag();
                        }
                        rows.push_back(row_re);
                        rhs.push_back(-base_ru(r).real());
                        rows.push_back(row_im);
                        rhs.push_back(-base_ru(r).imag());
                    }
                }
            }
            if (rows.empty()) break;
            Eigen::MatrixXd a(rows.size(), d);
            Eigen::VectorXd b(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                a.row(r) = rows[r].transpose();
                b(r) = rhs[r];
            }
            Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
            const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
            const double cut = std::max(1e-8 * top, 1e-12);
            int rank = 0;
            while (rank < svd.singularValues().size() && svd.singularValues()(rank) > cut) ++rank;
            Eigen::VectorXd ub = svd.matrixU().transpose() * b;
            Eigen::VectorXd y = Eigen::VectorXd::Zero(svd.singularValues().size());
            for (int i = 0; i < rank; ++i) y(i) = ub(i) / svd.singularValues()(i);
            Eigen::VectorXd tp = svd.matrixV() * y;
            const Eigen::MatrixXd z = svd.matrixV().rightCols(d - rank);
            if (z.cols() > 0) {
                if ((z.transpose() * functional).cwiseAbs().maxCoeff() >
                    1e-7 * (1.0 + functional.cwiseAbs().maxCoeff()))
                    break;  // face does not pin the functional; keep barrier point
                tp += z * (z.transpose() * (t - tp));
            }
            const double gain = functional.dot(tp) - functional.dot(t);
            if (gain < -1e-7 * (1.0 + std::abs(functional.dot(t)))) break;
            if (!base_.feasible(tp, 1e-9 * base_scale())) break;
            if ((tp - t).norm() <= 1e-14 * (1.0 + t.norm())) {
                t = tp;
                break;
            }
            t = tp;
        }
        return t;
    }

    double base_scale() const {
        double scale = 1.0;
        for (const auto& m : base_.c)
            if (m.rows() > 0) scale = std::max(scale, m.cwiseAbs().maxCoeff());
        return scale;
    }

    /// Random feasible parameter points, spread by walking from the interior
    /// point toward the boundary along random directions.
    std::vector<Eigen::VectorXd> sample_feasible(int count, std::uint64_t seed) const {
        const int d = sys_.dim();
        std::vector<Eigen::VectorXd> out;
        if (d == 0) {
            out.assign(count, Eigen::VectorXd::Zero(0));
            return out;
        }
        auto [tc, margin] = interior_point();
        Rng rng(seed);
        for (int s = 0; s < count; ++s) {
            Eigen::VectorXd dir(d);
            for (int a = 0; a < d; ++a) dir(a) = rng.normal();
            const double nrm = dir.norm();
            if (nrm <= 0.0) {
                out.push_back(tc);
                continue;
            }
            dir /= nrm;
            double lo = 0.0, hi = 1.0;
            while (base_.feasible(tc + hi * dir, 0.0) && hi < 1e6) {
                lo = hi;
                hi *= 2.0;
            }
            for (int it = 0; it < 50; ++it) {
                const double mid = 0.5 * (lo + hi);
                (base_.feasible(tc + mid * dir, 0.0) ? lo : hi) = mid;
            }
            out.push_back(tc + rng.uniform(0.2, 0.95) * lo * dir);
        }
        return out;
    }

  private:
    const ConstraintSystem& sys_;
    ExtremalOptions opt_;
    detail::AffineSdp base_;
};

namespace detail {

inline Eigen::VectorXd extremal_functional(const ConstraintSystem& sys, PairFlavor flavor,
                                           const ExtremalOptions& opt) {
    const int d = sys.dim();
    const auto pts = bidisk_points(opt.functional_points, opt.point_radius, opt.seed);
    const int m = sys.deg1(), n = sys.deg2();
    const bool on_k1 = flavor == PairFlavor::max1min2;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    for (int a = 0; a < d; ++a) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(d);
        unit(a) = 1.0;
        auto [b1c, b2c] = sys.matrices_at(unit);
        auto [o1, o2] = sys.matrices_at(Eigen::VectorXd::Zero(d));
        const Eigen::MatrixXcd b = on_k1 ? (b1c - o1) : (b2c - o2);
        double acc = 0.0;
        for (const auto& [x1, x2] : pts) {
            const Eigen::VectorXcd v = on_k1 ? monomial_vector(m, n - 1, x1, x2)
                                             : monomial_vector(m - 1, n, x1, x2);
            if (v.size() == 0) continue;
            const double pn = std::norm(sys.theta().p()(x1, x2));
            const double wgt = 1.0 - std::norm(on_k1 ? x1 : x2);
            acc += ((v.transpose() * b * v.conjugate())(0)).real() / (pn * wgt);
        }
        c(a) = acc;
    }
    return c;
}

}  // namespace detail

/// Canonical extremal pair via interior-point maximization of a strictly
/// monotone linear functional over the feasible spectrahedron, with sampled
/// Loewner post-verification of minimality/maximality.
inline AglerPair extremal_pair(const ConstraintSystem& sys, PairFlavor flavor,
                               const ExtremalOptions& opt = {}) {
    if (flavor == PairFlavor::generic)
        throw DegenerateInput("extremal_pair: flavor must be max1min2 or min1max2");
    ExtremalSolver solver(sys, opt);
    Eigen::VectorXd t;
    if (sys.dim() == 0) {
        t = Eigen::VectorXd::Zero(0);
    } else {
        const Eigen::VectorXd functional = detail::extremal_functional(sys, flavor, opt);
        t = solver.maximize(functional);
    }
    AglerPair pair = sys.pair_at(t, flavor);

    if (opt.run_verification && sys.dim() > 0) {
        const auto samples = solver.sample_feasible(opt.verify_feasible_samples, opt.seed ^ 0x9e3779b9u);
        Rng rng(opt.seed + 17);
        const bool on_k2 = flavor == PairFlavor::max1min2;  // K2 is minimal; others dominate it
        const GramKernel& extremal = on_k2 ? pair.k2 : pair.k1;
        for (const auto& ts : samples) {
            const AglerPair other = sys.pair_at(ts);
            const GramKernel& cand = on_k2 ? other.k2 : other.k1;
            if (extremal.basis_size() == 0) continue;
            const Eigen::MatrixXcd delta = cand.gram - extremal.gram;
            const int npts = opt.verify_gram_points;
            Eigen::MatrixXcd q(npts, npts);
            std::vector<std::pair<Complex, Complex>> ys(npts);
            for (auto& y : ys) y = {rng.disk(opt.point_radius), rng.disk(opt.point_radius)};
            for (int i = 0; i < npts; ++i)
                for (int j = 0; j < npts; ++j) {
                    const auto [zi1, zi2] = ys[i];
                    const auto [zj1, zj2] = ys[j];
                    const Eigen::VectorXcd vi = monomial_vector(extremal.deg1, extremal.deg2, zi1, zi2);
                    const Eigen::VectorXcd vj = monomial_vector(extremal.deg1, extremal.deg2, zj1, zj2);
                    const Complex num = (vi.transpose() * delta * vj.conjugate())(0);
                    const Complex den = sys.theta().p()(zi1, zi2) *
                                        std::conj(sys.theta().p()(zj1, zj2));
                    const Complex quot = on_k2 ? (1.0 - zi2 * std::conj(zj2)) : (1.0 - zi1 * std::conj(zj1));
                    q(i, j) = num / (den * quot);
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (q + q.adjoint()),
                                                               Eigen::EigenvaluesOnly);
            const double top = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
            if (es.eigenvalues().minCoeff() < -1e-7 * top)
                throw NotLoewnerMaximal("extremal_pair: sampled quotient-kernel comparison failed");
        }
    }
    return pair;
}

/// Random feasible Agler pairs of theta (PSD points of the affine family).
inline std::vector<AglerPair> sample_feasible_pairs(const ConstraintSystem& sys, int count,
                                                    std::uint64_t seed) {
    ExtremalSolver solver(sys);
    std::vector<AglerPair> out;
    for (const auto& t : solver.sample_feasible(count, seed)) out.push_back(sys.pair_at(t));
    return out;
}

}  // namespace bidisk
