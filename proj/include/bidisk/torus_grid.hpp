#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>

#include "bipoly.hpp"
#include "errors.hpp"
#include "fft.hpp"

namespace bidisk {

/// Samples of a function on the N x N torus grid, samples(j, k) =
/// f(tau1_j, tau2_k) with tau_j = exp(2 pi i j / N). Fourier coefficients are
/// computed on demand and cached; index a < N/2 carries frequency a, index
/// a >= N/2 the negative frequency a - N.
class TorusGrid {
  public:
    TorusGrid(int n, Eigen::MatrixXcd samples) : n_(n), samples_(std::move(samples)) {
        if (!detail::is_power_of_two(n_)) throw DegenerateInput("TorusGrid: size must be a power of two");
        if (samples_.rows() != n_ || samples_.cols() != n_)
            throw GridMismatch("TorusGrid: sample array shape mismatch");
    }

    template <class F>
    static TorusGrid from_function(int n, F&& f) {
        Eigen::MatrixXcd s(n, n);
        const Eigen::VectorXcd tau = nodes(n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) s(j, k) = f(tau(j), tau(k));
        return TorusGrid(n, std::move(s));
    }

    static TorusGrid sample(const BiPoly& p, int n) {
        return from_function(n, [&](Complex z1, Complex z2) { return p(z1, z2); });
    }

    /// Sampling a rational function requires a strictly stable denominator.
    static TorusGrid sample(const RationalFn& f, int n) {
        if (is_stable_bidisk(f.den) != StabilityVerdict::strictly_stable)
            throw UnstableDenominator("TorusGrid::sample: denominator not strictly stable");
        return from_function(n, [&](Complex z1, Complex z2) { return f(z1, z2); });
    }

    static Eigen::VectorXcd nodes(int n) {
        Eigen::VectorXcd tau(n);
        for (int j = 0; j < n; ++j) tau(j) = std::polar(1.0, 2.0 * M_PI * j / n);
        return tau;
    }

    int size() const { return n_; }
    const Eigen::MatrixXcd& samples() const { return samples_; }

    const Eigen::MatrixXcd& spectrum() const {
        if (!spectrum_) spectrum_ = detail::dft2(samples_, -1, true);
        return *spectrum_;
    }

    /// Value of the represented analytic function at an interior point,
    /// synthesized from nonnegative frequencies below N/2.
    Complex eval_interior(Complex z1, Complex z2) const {
        const auto& sp = spectrum();
        Complex acc = 0.0;
        for (int a = n_ / 2 - 1; a >= 0; --a) {
            Complex row = 0.0;
            for (int b = n_ / 2 - 1; b >= 0; --b) row = row * z2 + sp(a, b);
            acc = acc * z1 + row;
        }
        return acc;
    }

  private:
    int n_;
    Eigen::MatrixXcd samples_;
    mutable std::optional<Eigen::MatrixXcd> spectrum_;
};

inline void require_same_grid(const TorusGrid& f, const TorusGrid& g) {
    if (f.size() != g.size()) throw GridMismatch("grids of different size");
}

/// H^2 pairing realized as grid quadrature: (1/N^2) sum f conj(g). Exact for
/// polynomials of degree below N.
inline Complex inner_product(const TorusGrid& f, const TorusGrid& g) {
    require_same_grid(f, g);
    const auto s = (f.samples().array() * g.samples().array().conjugate()).sum();
    return s / (static_cast<double>(f.size()) * f.size());
}

inline double grid_norm(const TorusGrid& f) {
    return std::sqrt(std::max(0.0, inner_product(f, f).real()));
}

inline TorusGrid operator+(const TorusGrid& f, const TorusGrid& g) {
    require_same_grid(f, g);
    return TorusGrid(f.size(), f.samples() + g.samples());
}

inline TorusGrid operator-(const TorusGrid& f, const TorusGrid& g) {
    require_same_grid(f, g);
    return TorusGrid(f.size(), f.samples() - g.samples());
}

inline TorusGrid operator*(Complex s, const TorusGrid& f) { return TorusGrid(f.size(), s * f.samples()); }

/// Pointwise product on the torus.
inline TorusGrid pointwise(const TorusGrid& f, const TorusGrid& g) {
    require_same_grid(f, g);
    return TorusGrid(f.size(), f.samples().cwiseProduct(g.samples()));
}

inline TorusGrid conj_grid(const TorusGrid& f) { return TorusGrid(f.size(), f.samples().conjugate()); }

/// Multiply by the coordinate z_var.
inline TorusGrid times_coord(const TorusGrid& f, int var) {
    const int n = f.size();
    const Eigen::VectorXcd tau = TorusGrid::nodes(n);
    Eigen::MatrixXcd s = f.samples();
    if (var == 1)
        s.array().colwise() *= tau.array();
    else
        s.array().rowwise() *= tau.transpose().array();
    return TorusGrid(n, std::move(s));
}

/// The grid of f with z_var frozen at 0: the frequency-zero slice in that
/// variable, i.e. the mean over the var axis, broadcast back.
inline TorusGrid slice_at_zero(const TorusGrid& f, int var) {
    const int n = f.size();
    Eigen::MatrixXcd s(n, n);
    if (var == 1) {
        const Eigen::RowVectorXcd mean = f.samples().colwise().mean();
        s = mean.replicate(n, 1);
    } else {
        const Eigen::VectorXcd mean = f.samples().rowwise().mean();
        s = mean.replicate(1, n);
    }
    return TorusGrid(n, std::move(s));
}

/// Backward shift on the grid: (f - f|_{z_var=0}) / z_var. The subtraction
/// removes the zero frequency in z_var, so the pointwise division is exact.
inline TorusGrid backshift_grid(const TorusGrid& f, int var) {
    const int n = f.size();
    const Eigen::VectorXcd tau = TorusGrid::nodes(n);
    Eigen::MatrixXcd s = f.samples() - slice_at_zero(f, var).samples();
    if (var == 1)
        s.array().colwise() /= tau.array();
    else
        s.array().rowwise() /= tau.transpose().array();
    return TorusGrid(n, std::move(s));
}

/// Analytic projection: zero every Fourier coefficient with a negative index
/// in either variable (indices >= N/2 are the negative ones). Idempotent.
inline TorusGrid project_plus(const TorusGrid& g) {
    const int n = g.size();
    Eigen::MatrixXcd sp = g.spectrum();
    sp.bottomRows(n / 2).setZero();
    sp.rightCols(n / 2).setZero();
    return TorusGrid(n, detail::dft2(sp, +1, false));
}

/// Model-space projection P_theta f = f - theta P_+(conj(theta) f), realized
/// multiplicatively on the torus where |theta| = 1.
inline TorusGrid project_model(const TorusGrid& f, const TorusGrid& theta) {
    require_same_grid(f, theta);
    const TorusGrid analytic_part = project_plus(pointwise(conj_grid(theta), f));
    return f - pointwise(theta, analytic_part);
}

}  // namespace bidisk
