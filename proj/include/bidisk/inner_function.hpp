#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "bipoly.hpp"
#include "torus_grid.hpp"

namespace bidisk {

/// Finite Blaschke product, stored by its zeros so that zero locations stay
/// exact for spectrum tests. The empty product is the constant.
struct BlaschkeProduct {
    std::vector<Complex> zeros;
    Complex unimodular_constant{1.0};

    BlaschkeProduct() = default;
    BlaschkeProduct(std::vector<Complex> zs, Complex c = 1.0)
        : zeros(std::move(zs)), unimodular_constant(c) {
        for (const Complex& a : zeros)
            if (std::abs(a) >= 1.0 - 1e-12)
                throw DegenerateInput("BlaschkeProduct: zero too close to the unit circle");
        if (std::abs(std::abs(c) - 1.0) > 1e-14)
            throw DegenerateInput("BlaschkeProduct: constant is not unimodular");
    }

    int degree() const { return static_cast<int>(zeros.size()); }

    Complex operator()(Complex z) const {
        Complex v = unimodular_constant;
        for (const Complex& a : zeros) v *= (z - a) / (1.0 - std::conj(a) * z);
        return v;
    }

    /// Denominator coefficients of prod (1 - conj(a) z), length degree + 1.
    Eigen::VectorXcd denominator_coeffs() const {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(degree() + 1);
        c(0) = 1.0;
        int len = 1;
        for (const Complex& a : zeros) {
            Eigen::VectorXcd next = Eigen::VectorXcd::Zero(degree() + 1);
            next.head(len) = c.head(len);
            next.segment(1, len) -= std::conj(a) * c.head(len);
            c = next;
            ++len;
        }
        return c;
    }

    /// Numerator coefficients of c * prod (z - a), length degree + 1.
    Eigen::VectorXcd numerator_coeffs() const {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(degree() + 1);
        c(0) = unimodular_constant;
        int len = 1;
        for (const Complex& a : zeros) {
            Eigen::VectorXcd next = Eigen::VectorXcd::Zero(degree() + 1);
            next.segment(1, len) = c.head(len);
            next.head(len) -= a * c.head(len);
            c = next;
            ++len;
        }
        return c;
    }
};

/// theta(z) = phi(z1) psi(z2).
struct ProductInner {
    BlaschkeProduct phi;
    BlaschkeProduct psi;

    Complex operator()(Complex z1, Complex z2) const { return phi(z1) * psi(z2); }
    std::pair<int, int> degree() const { return {phi.degree(), psi.degree()}; }
};

namespace detail {

/// Do p and q share a polynomial factor? Sampled resultant test: the
/// one-variable resultant in each variable, normalized by coefficient scale,
/// must be nonzero at every sampled slice of the other variable.
inline bool shares_common_factor(const BiPoly& p, const BiPoly& q, double tol = 1e-10) {
    for (int var = 1; var <= 2; ++var) {
        double best = 0.0;
        for (int s = 0; s < 7; ++s) {
            const Complex tau = std::polar(1.0, 2.0 * M_PI * (s + 0.31) / 7.0);
            const Eigen::VectorXcd a = slice_coeffs(p, var, tau);
            const Eigen::VectorXcd b = slice_coeffs(q, var, tau);
            const double sa = a.cwiseAbs().maxCoeff(), sb = b.cwiseAbs().maxCoeff();
            if (sa <= 0.0 || sb <= 0.0) continue;
            const int da = static_cast<int>(a.size()) - 1, db = static_cast<int>(b.size()) - 1;
            const double denom = std::pow(sa, db) * std::pow(sb, da);
            best = std::max(best, std::abs(sylvester_resultant(a, b)) / std::max(denom, 1e-300));
        }
        if (best < tol) return true;
    }
    return false;
}

}  // namespace detail

/// Rational inner function theta = numerator / p where p is strictly stable
/// and the numerator is the reflection of p, possibly times a unimodular
/// constant folded in when theta comes from a product of Blaschke factors.
class RationalInner {
  public:
    /// Validating constructor from a stable denominator: checks strict
    /// stability, rejects shared factors between p and its reflection, and
    /// samples |theta| on the torus.
    static RationalInner from_stable(BiPoly p, double margin = 1e-9, int stability_grid = 512) {
        const StabilityVerdict v = is_stable_bidisk(p, margin, stability_grid);
        if (v != StabilityVerdict::strictly_stable)
            throw UnstableDenominator(v == StabilityVerdict::boundary_zero
                                          ? "RationalInner: denominator has a boundary zero"
                                          : "RationalInner: denominator vanishes on the bidisk");
        BiPoly refl = p.reflect();
        if (detail::shares_common_factor(p, refl))
            throw CommonFactor("RationalInner: p and its reflection share a factor");
        RationalInner theta(std::move(p), std::move(refl));
        const double dev = theta.unimodularity_deviation(64);
        if (dev > 1e-10)
            throw DegenerateInput("RationalInner: |theta| deviates from 1 on the torus");
        return theta;
    }

    /// theta = phi(z1) psi(z2) in rational form: p = prod(1 - conj(a_i) z1) *
    /// prod(1 - conj(b_j) z2), declared degree (deg phi, deg psi), with the
    /// unimodular constants folded into the stored numerator so the two
    /// evaluations agree pointwise.
    static RationalInner from_product(const ProductInner& f) {
        const int m = f.phi.degree(), n = f.psi.degree();
        const Eigen::VectorXcd d1 = f.phi.denominator_coeffs();
        const Eigen::VectorXcd d2 = f.psi.denominator_coeffs();
        Eigen::MatrixXcd pc = Eigen::MatrixXcd::Zero(m + 1, n + 1);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= n; ++j) pc(i, j) = d1(i) * d2(j);
        BiPoly p(std::move(pc));
        const Complex c = f.phi.unimodular_constant * f.psi.unimodular_constant;
        return RationalInner(p, c * p.reflect());
    }

    const BiPoly& p() const { return p_; }
    const BiPoly& p_reflected() const { return num_; }
    int deg1() const { return p_.deg1(); }
    int deg2() const { return p_.deg2(); }
    std::pair<int, int> degree() const { return {deg1(), deg2()}; }

    Complex operator()(Complex z1, Complex z2) const { return num_(z1, z2) / p_(z1, z2); }

    RationalFn as_rational_fn() const { return RationalFn{num_, p_}; }

    double unimodularity_deviation(int grid_n) const {
        double worst = 0.0;
        for (int j = 0; j < grid_n; ++j)
            for (int k = 0; k < grid_n; ++k) {
                const Complex z1 = std::polar(1.0, 2.0 * M_PI * j / grid_n);
                const Complex z2 = std::polar(1.0, 2.0 * M_PI * k / grid_n);
                worst = std::max(worst, std::abs(std::abs((*this)(z1, z2)) - 1.0));
            }
        return worst;
    }

  private:
    RationalInner(BiPoly p, BiPoly num) : p_(std::move(p)), num_(std::move(num)) {}

    BiPoly p_;
    BiPoly num_;  // reflection of p, times a folded unimodular constant
};

inline RationalInner make_rational_inner(BiPoly p) { return RationalInner::from_stable(std::move(p)); }
inline RationalInner product_to_rational(const ProductInner& f) { return RationalInner::from_product(f); }

inline TorusGrid sample_inner(const RationalInner& theta, int n) {
    return TorusGrid::from_function(n, [&](Complex z1, Complex z2) { return theta(z1, z2); });
}

inline TorusGrid sample_inner(const ProductInner& theta, int n) {
    return TorusGrid::from_function(n, [&](Complex z1, Complex z2) { return theta(z1, z2); });
}

/// Sup-norm deviation of |theta| from 1 on the torus grid. Callers treat
/// values <= 1e-10 as inner.
inline double verify_inner(const RationalInner& theta, int grid_n = 256) {
    return theta.unimodularity_deviation(grid_n);
}

inline double verify_inner(const ProductInner& theta, int grid_n = 256) {
    double worst = 0.0;
    for (int j = 0; j < grid_n; ++j)
        for (int k = 0; k < grid_n; ++k) {
            const Complex z1 = std::polar(1.0, 2.0 * M_PI * j / grid_n);
            const Complex z2 = std::polar(1.0, 2.0 * M_PI * k / grid_n);
            worst = std::max(worst, std::abs(std::abs(theta(z1, z2)) - 1.0));
        }
    return worst;
}

inline double verify_inner(const RationalFn& f, int grid_n = 256) {
    double worst = 0.0;
    for (int j = 0; j < grid_n; ++j)
        for (int k = 0; k < grid_n; ++k) {
            const Complex z1 = std::polar(1.0, 2.0 * M_PI * j / grid_n);
            const Complex z2 = std::polar(1.0, 2.0 * M_PI * k / grid_n);
            worst = std::max(worst, std::abs(std::abs(f(z1, z2)) - 1.0));
        }
    return worst;
}

/// Backward shift of theta in one variable as a rational function, satisfying
/// theta(z) = z_var * result + theta|_{z_var=0}.
inline RationalFn backshift_theta(const RationalInner& theta, int var) {
    return backshift(theta.as_rational_fn(), var);
}

/// Takenaka-Malmquist orthonormal basis of the one-variable model space
/// K_phi = H^2 - phi H^2, evaluated at the given points: column k is
///   e_k(z) = sqrt(1-|a_k|^2)/(1 - conj(a_k) z) * prod_{l<k} (z-a_l)/(1 - conj(a_l) z).
inline Eigen::MatrixXcd tm_basis_at(const BlaschkeProduct& phi, const Eigen::VectorXcd& points) {
    const int q = phi.degree();
    Eigen::MatrixXcd out(points.size(), q);
    Eigen::VectorXcd prefix = Eigen::VectorXcd::Ones(points.size());
    for (int k = 0; k < q; ++k) {
        const Complex a = phi.zeros[k];
        const double w = std::sqrt(1.0 - std::norm(a));
        for (Eigen::Index i = 0; i < points.size(); ++i)
            out(i, k) = prefix(i) * w / (1.0 - std::conj(a) * points(i));
        for (Eigen::Index i = 0; i < points.size(); ++i)
            prefix(i) *= (points(i) - a) / (1.0 - std::conj(a) * points(i));
    }
    return out;
}

/// Matrix of the one-variable compressed shift P_{K_phi} T_z in the
/// Takenaka-Malmquist basis, via circle quadrature.
inline Eigen::MatrixXcd one_var_compressed_shift(const BlaschkeProduct& phi, int grid_n = 1024) {
    const int q = phi.degree();
    if (q == 0) return Eigen::MatrixXcd::Zero(0, 0);
    Eigen::VectorXcd pts(grid_n);
    for (int j = 0; j < grid_n; ++j) pts(j) = std::polar(1.0, 2.0 * M_PI * j / grid_n);
    const Eigen::MatrixXcd e = tm_basis_at(phi, pts);
    Eigen::MatrixXcd ze = e;
    ze.array().colwise() *= pts.array();
    // <P(z e_k), e_j> = <z e_k, e_j> since e_j is in the model space
    return (e.adjoint() * ze) / static_cast<double>(grid_n);
}

}  // namespace bidisk
