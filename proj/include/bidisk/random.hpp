#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace bidisk {

/// Deterministic pseudo-random source. Draws are derived from the raw
/// mt19937_64 stream rather than std distributions so that sequences are
/// identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform on the disk of the given radius.
    std::complex<double> disk(double radius) {
        const double r = radius * std::sqrt(uniform());
        const double a = 2.0 * M_PI * uniform();
        return std::polar(r, a);
    }

    /// Uniform on the unit circle.
    std::complex<double> circle() { return std::polar(1.0, 2.0 * M_PI * uniform()); }

    /// Standard normal via Box-Muller.
    double normal() {
        const double u = std::max(uniform(), 0x1.0p-60);
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
    }

    std::vector<std::complex<double>> disk_points(int count, double radius) {
        std::vector<std::complex<double>> pts(count);
        for (auto& p : pts) p = disk(radius);
        return pts;
    }

  private:
    std::mt19937_64 gen_;
};

/// Fixed points of the open bidisk, |coordinates| <= radius.
inline std::vector<std::pair<std::complex<double>, std::complex<double>>>
bidisk_points(int count, double radius, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<std::complex<double>, std::complex<double>>> pts(count);
    for (auto& p : pts) p = {rng.disk(radius), rng.disk(radius)};
    return pts;
}

}  // namespace bidisk
