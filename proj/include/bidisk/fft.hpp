#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace bidisk::detail {

using Complex = std::complex<double>;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Radix-2 transform for one power-of-two length. Twiddles are tabulated
/// from exact trig per index, so there is no per-stage drift.
class Fft {
  public:
    Fft(int n, int sign) : n_(n) {
        if (!is_power_of_two(n)) throw DegenerateInput("fft length must be a power of two");
        tw_.resize(n / 2);
        for (int k = 0; k < n / 2; ++k)
            tw_[k] = std::polar(1.0, sign * 2.0 * M_PI * k / n);
        rev_.resize(n);
        int bits = 0;
        while ((1 << bits) < n) ++bits;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) r |= 1 << (bits - 1 - b);
            rev_[i] = r;
        }
    }

    void run(Complex* a) const {
        for (int i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (int len = 2; len <= n_; len <<= 1) {
            const int stride = n_ / len;
            for (int start = 0; start < n_; start += len) {
                for (int k = 0; k < len / 2; ++k) {
                    const Complex w = tw_[static_cast<std::size_t>(k) * stride];
                    Complex& u = a[start + k];
                    Complex& v = a[start + k + len / 2];
                    const Complex t = v * w;
                    v = u - t;
                    u = u + t;
                }
            }
        }
    }

  private:
    int n_;
    std::vector<Complex> tw_;
    std::vector<int> rev_;
};

/// 2-D transform of an n x n sample array. sign=-1 with normalize=true is the
/// analysis direction: out(a,b) = (1/n^2) sum s(j,k) w^{-aj} w^{-bk}, i.e. the
/// discrete Fourier coefficients. sign=+1 without normalization synthesizes.
inline Eigen::MatrixXcd dft2(const Eigen::MatrixXcd& in, int sign, bool normalize) {
    const int n = static_cast<int>(in.rows());
    Fft plan(n, sign);
    Eigen::MatrixXcd work = in;
    for (int c = 0; c < n; ++c) plan.run(work.col(c).data());
    Eigen::MatrixXcd t = work.transpose();
    for (int c = 0; c < n; ++c) plan.run(t.col(c).data());
    work = t.transpose();
    if (normalize) work /= static_cast<double>(n) * n;
    return work;
}

}  // namespace bidisk::detail
