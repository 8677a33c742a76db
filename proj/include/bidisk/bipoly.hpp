#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace bidisk {

using Complex = std::complex<double>;

/// Dense bivariate polynomial with a declared bidegree. coeff(i, j) is the
/// coefficient of z1^i z2^j; the declared degree may exceed the true degree
/// (rows/columns of zeros), which matters for reflections.
class BiPoly {
  public:
    BiPoly() : c_(Eigen::MatrixXcd::Zero(1, 1)) {}

    explicit BiPoly(Eigen::MatrixXcd coeffs) : c_(std::move(coeffs)) {
        if (c_.rows() < 1 || c_.cols() < 1)
            throw DegenerateInput("BiPoly: empty coefficient array");
    }

    static BiPoly zero(int m, int n) { return BiPoly(Eigen::MatrixXcd::Zero(m + 1, n + 1)); }

    static BiPoly constant(Complex v, int m = 0, int n = 0) {
        BiPoly p = zero(m, n);
        p.c_(0, 0) = v;
        return p;
    }

    static BiPoly monomial(int i, int j, Complex v = 1.0) {
        BiPoly p = zero(i, j);
        p.c_(i, j) = v;
        return p;
    }

    int deg1() const { return static_cast<int>(c_.rows()) - 1; }
    int deg2() const { return static_cast<int>(c_.cols()) - 1; }

    const Eigen::MatrixXcd& coeffs() const { return c_; }
    Complex coeff(int i, int j) const { return c_(i, j); }
    Complex& coeff(int i, int j) { return c_(i, j); }

    double max_abs() const { return c_.cwiseAbs().maxCoeff(); }

    /// Horner evaluation, inner loop over z2 within each z1 row.
    Complex operator()(Complex z1, Complex z2) const {
        Complex acc = 0.0;
        for (int i = deg1(); i >= 0; --i) {
            Complex row = 0.0;
            for (int j = deg2(); j >= 0; --j) row = row * z2 + c_(i, j);
            acc = acc * z1 + row;
        }
        return acc;
    }

    /// Reflection relative to the declared degree:
    /// out(i, j) = conj(in(m - i, n - j)).
    BiPoly reflect() const {
        return BiPoly(c_.reverse().conjugate());
    }

    /// Re-declare the bidegree, padding with zeros. Shrinking requires the
    /// discarded rows/columns to be zero.
    BiPoly with_degree(int m, int n) const {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m + 1, n + 1);
        const int rr = std::min(m + 1, static_cast<int>(c_.rows()));
        const int cc = std::min(n + 1, static_cast<int>(c_.cols()));
        out.topLeftCorner(rr, cc) = c_.topLeftCorner(rr, cc);
        for (int i = 0; i <= deg1(); ++i)
            for (int j = 0; j <= deg2(); ++j)
                if ((i > m || j > n) && std::abs(c_(i, j)) > 0.0)
                    throw DegenerateInput("BiPoly: cannot shrink declared degree over nonzero coefficients");
        return BiPoly(std::move(out));
    }

    /// Largest (i, j) with |coeff| above tol * max_abs, per variable.
    std::pair<int, int> true_degree(double tol = 1e-14) const {
        const double cut = tol * std::max(max_abs(), 1e-300);
        int m = 0, n = 0;
        for (int i = 0; i <= deg1(); ++i)
            for (int j = 0; j <= deg2(); ++j)
                if (std::abs(c_(i, j)) > cut) {
                    m = std::max(m, i);
                    n = std::max(n, j);
                }
        return {m, n};
    }

  private:
    Eigen::MatrixXcd c_;
};

inline BiPoly operator+(const BiPoly& a, const BiPoly& b) {
    const int m = std::max(a.deg1(), b.deg1()), n = std::max(a.deg2(), b.deg2());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m + 1, n + 1);
    out.topLeftCorner(a.deg1() + 1, a.deg2() + 1) = a.coeffs();
    out.topLeftCorner(b.deg1() + 1, b.deg2() + 1) += b.coeffs();
    return BiPoly(std::move(out));
}

inline BiPoly operator-(const BiPoly& a, const BiPoly& b) {
    const int m = std::max(a.deg1(), b.deg1()), n = std::max(a.deg2(), b.deg2());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m + 1, n + 1);
    out.topLeftCorner(a.deg1() + 1, a.deg2() + 1) = a.coeffs();
    out.topLeftCorner(b.deg1() + 1, b.deg2() + 1) -= b.coeffs();
    return BiPoly(std::move(out));
}

inline BiPoly operator*(Complex s, const BiPoly& a) { return BiPoly(s * a.coeffs()); }
inline BiPoly operator*(const BiPoly& a, Complex s) { return s * a; }

inline BiPoly operator*(const BiPoly& a, const BiPoly& b) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(a.deg1() + b.deg1() + 1, a.deg2() + b.deg2() + 1);
    for (int i = 0; i <= a.deg1(); ++i)
        for (int j = 0; j <= a.deg2(); ++j) {
            const Complex v = a.coeff(i, j);
            if (v == 0.0) continue;
            out.block(i, j, b.deg1() + 1, b.deg2() + 1) += v * b.coeffs();
        }
    return BiPoly(std::move(out));
}

/// Fix one variable, leaving a polynomial in the other. var = 1 fixes z1
/// (result declared degree (0, n)); var = 2 fixes z2 (degree (m, 0)).
inline BiPoly partial_evaluate(const BiPoly& p, int var, Complex value) {
    if (var == 1) {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(1, p.deg2() + 1);
        for (int j = 0; j <= p.deg2(); ++j) {
            Complex acc = 0.0;
            for (int i = p.deg1(); i >= 0; --i) acc = acc * value + p.coeff(i, j);
            out(0, j) = acc;
        }
        return BiPoly(std::move(out));
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(p.deg1() + 1, 1);
    for (int i = 0; i <= p.deg1(); ++i) {
        Complex acc = 0.0;
        for (int j = p.deg2(); j >= 0; --j) acc = acc * value + p.coeff(i, j);
        out(i, 0) = acc;
    }
    return BiPoly(std::move(out));
}

namespace detail {

/// Roots of a one-variable polynomial via companion-matrix eigenvalues.
/// Near-zero leading coefficients are deflated (roots escaping to infinity
/// are simply not reported).
inline std::vector<Complex> poly_roots(Eigen::VectorXcd c, double rel_tol = 1e-13) {
    const double scale = c.cwiseAbs().maxCoeff();
    if (scale <= 0.0) return {};  // identically zero: caller decides
    int d = static_cast<int>(c.size()) - 1;
    while (d > 0 && std::abs(c(d)) <= rel_tol * scale) --d;
    if (d == 0) return {};
    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c(i) / c(d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<Complex> roots(d);
    for (int i = 0; i < d; ++i) roots[i] = es.eigenvalues()(i);
    return roots;
}

/// Coefficient vector of p(tau, .) (var == 1) or p(., tau) (var == 2).
inline Eigen::VectorXcd slice_coeffs(const BiPoly& p, int var, Complex tau) {
    const BiPoly s = partial_evaluate(p, var, tau);
    if (var == 1) return s.coeffs().row(0).transpose();
    return s.coeffs().col(0);
}

/// Resultant of two one-variable polynomials via the Sylvester determinant,
/// using effective degrees. Returns 0 when either input is identically zero.
inline Complex sylvester_resultant(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                   double rel_tol = 1e-13) {
    auto eff_deg = [&](const Eigen::VectorXcd& v) {
        const double s = v.cwiseAbs().maxCoeff();
        if (s <= 0.0) return -1;
        int d = static_cast<int>(v.size()) - 1;
        while (d > 0 && std::abs(v(d)) <= rel_tol * s) --d;
        return d;
    };
    const int da = eff_deg(a), db = eff_deg(b);
    if (da < 0 || db < 0) return 0.0;
    if (da == 0) return std::pow(a(0), db);
    if (db == 0) return std::pow(b(0), da);
    Eigen::MatrixXcd syl = Eigen::MatrixXcd::Zero(da + db, da + db);
    for (int r = 0; r < db; ++r)
        for (int k = 0; k <= da; ++k) syl(r, r + k) = a(da - k);
    for (int r = 0; r < da; ++r)
        for (int k = 0; k <= db; ++k) syl(db + r, r + k) = b(db - k);
    return syl.determinant();
}

}  // namespace detail

enum class StabilityVerdict { strictly_stable, boundary_zero, unstable };

/// Strict stability of p on the closed bidisk, certified by one-variable
/// root computations on torus slices in both variables plus the interior
/// sample p(0,0). Roots of every slice must stay outside modulus 1 + margin.
inline StabilityVerdict is_stable_bidisk(const BiPoly& p, double margin = 1e-9, int grid = 512) {
    const double scale = p.max_abs();
    if (scale <= 0.0) throw DegenerateInput("is_stable_bidisk: zero polynomial");

    double min_mod = std::numeric_limits<double>::infinity();
    for (int var = 1; var <= 2; ++var) {
        for (int g = 0; g < grid; ++g) {
            const Complex tau = std::polar(1.0, 2.0 * M_PI * g / grid);
            Eigen::VectorXcd c = detail::slice_coeffs(p, var, tau);
            if (c.cwiseAbs().maxCoeff() <= 1e-13 * scale) {
                min_mod = 0.0;  // slice identically zero: zeros across the whole disk
                continue;
            }
            for (const Complex& r : detail::poly_roots(c))
                min_mod = std::min(min_mod, std::abs(r));
        }
    }

    const bool origin_ok = std::abs(p(0.0, 0.0)) > 1e-13 * scale;
    if (min_mod > 1.0 + margin && origin_ok) return StabilityVerdict::strictly_stable;
    if (min_mod >= 1.0 - margin && min_mod <= 1.0 + margin) return StabilityVerdict::boundary_zero;
    return StabilityVerdict::unstable;
}

/// Split p(z1, z2) = p1(z1) p2(z2) when the coefficient matrix has numerical
/// rank one. p2(0) is normalized real nonnegative when possible.
inline std::optional<std::pair<BiPoly, BiPoly>> factor_rank1(const BiPoly& p, double tol = 1e-8) {
    const auto& c = p.coeffs();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) {
        // zero polynomial: 0 * 1
        return std::make_pair(BiPoly::zero(p.deg1(), 0), BiPoly::constant(1.0, 0, p.deg2()));
    }
    if (sv.size() > 1 && sv(1) > tol * sv(0)) return std::nullopt;

    const double s = std::sqrt(sv(0));
    Eigen::VectorXcd u = s * svd.matrixU().col(0);
    Eigen::VectorXcd v = s * svd.matrixV().col(0).conjugate();
    if (std::abs(v(0)) > 1e-14 * s) {
        const Complex lambda = std::conj(v(0)) / std::abs(v(0));
        v *= lambda;
        u /= lambda;
    }
    Eigen::MatrixXcd c1 = Eigen::MatrixXcd::Zero(p.deg1() + 1, 1);
    c1.col(0) = u;
    Eigen::MatrixXcd c2 = Eigen::MatrixXcd::Zero(1, p.deg2() + 1);
    c2.row(0) = v.transpose();
    return std::make_pair(BiPoly(std::move(c1)), BiPoly(std::move(c2)));
}

/// Quotient of bivariate polynomials. Denominators used under quadrature
/// must be strictly stable; that is checked where grids are built.
struct RationalFn {
    BiPoly num;
    BiPoly den;

    Complex operator()(Complex z1, Complex z2) const { return num(z1, z2) / den(z1, z2); }
};

namespace detail {

/// Divide a coefficient array by z_var; the bottom slice must vanish.
inline BiPoly divide_by_coordinate(const BiPoly& p, int var, double tol = 1e-10) {
    const auto& c = p.coeffs();
    const double scale = std::max(p.max_abs(), 1e-300);
    if (var == 1) {
        if (c.row(0).cwiseAbs().maxCoeff() > tol * scale)
            throw NonDivisible("divide_by_coordinate: z1 slice does not vanish");
        if (p.deg1() == 0) return BiPoly::zero(0, p.deg2());
        return BiPoly(c.bottomRows(p.deg1()).eval());
    }
    if (c.col(0).cwiseAbs().maxCoeff() > tol * scale)
        throw NonDivisible("divide_by_coordinate: z2 slice does not vanish");
    if (p.deg2() == 0) return BiPoly::zero(p.deg1(), 0);
    return BiPoly(c.rightCols(p.deg2()).eval());
}

}  // namespace detail

/// Backward shift of a rational function in one variable:
/// (f - f with z_var = 0) / z_var, with the z_var factor cancelled exactly on
/// the numerator coefficients. The denominator becomes den * den|_{z_var=0}.
inline RationalFn backshift(const RationalFn& f, int var) {
    const BiPoly den0 = partial_evaluate(f.den, var, 0.0);
    const BiPoly num0 = partial_evaluate(f.num, var, 0.0);
    const BiPoly diff = f.num * den0 - num0 * f.den;
    return RationalFn{detail::divide_by_coordinate(diff, var), f.den * den0};
}

}  // namespace bidisk
