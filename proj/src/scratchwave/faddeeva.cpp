#include "scratchwave/faddeeva.hpp"

#include <array>
#include <cmath>

#include "scratchwave/vec.hpp"

namespace scratchwave {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;

// Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994) with N
// terms. Coefficients come from a 4N-point cosine transform evaluated once.
constexpr int kTerms = 40;

struct WeidemanTable {
    double scale = 0.0;
    std::array<double, kTerms> coeff{};  // highest degree first

    WeidemanTable() {
        const int m = 2 * kTerms;
        const int m2 = 2 * m;
        scale = std::sqrt(kTerms / std::sqrt(2.0));
        // f[0] = 0, f[j] for k = j - m, j = 1..2m-1
        std::array<double, 4 * kTerms> f{};
        for (int j = 1; j < m2; ++j) {
            const int k = j - m;
            const double theta = k * kPi / m;
            const double t = scale * std::tan(0.5 * theta);
            f[static_cast<size_t>(j)] = std::exp(-t * t) * (scale * scale + t * t);
        }
        // fftshift then real DFT of length 2m
        std::array<double, 4 * kTerms> shifted{};
        for (int i = 0; i < 2 * m; ++i) shifted[static_cast<size_t>(i)] = f[static_cast<size_t>((i + m) % (2 * m))];
        for (int n = 1; n <= kTerms; ++n) {
            double acc = 0.0;
            for (int i = 0; i < 2 * m; ++i) {
                acc += shifted[static_cast<size_t>(i)] * std::cos(2.0 * kPi * n * i / (2 * m));
            }
            coeff[static_cast<size_t>(kTerms - n)] = acc / (2 * m);
        }
    }
};

const WeidemanTable& table() {
    static const WeidemanTable t;
    return t;
}

std::complex<double> weideman(std::complex<double> z) {
    const auto& t = table();
    const std::complex<double> iz(-z.imag(), z.real());
    const std::complex<double> denom = t.scale - iz;
    const std::complex<double> zz = (t.scale + iz) / denom;
    std::complex<double> p = 0.0;
    for (double c : t.coeff) p = p * zz + c;
    return 2.0 * p / (denom * denom) + kInvSqrtPi / denom;
}

// Laplace continued fraction, accurate for large |z| in the upper half plane.
std::complex<double> continued_fraction(std::complex<double> z, int terms) {
    std::complex<double> r = 0.0;
    for (int n = terms; n >= 1; --n) r = (0.5 * n) / (z - r);
    return std::complex<double>(0.0, kInvSqrtPi) / (z - r);
}

}  // namespace

std::complex<double> faddeeva_upper(std::complex<double> z) {
    const double a = std::abs(z);
    if (a > 12.0) return continued_fraction(z, 24);
    if (a > 7.0) return continued_fraction(z, 80);
    return weideman(z);
}

std::complex<double> erf_complex(std::complex<double> z) {
    // erf(z) = 1 - exp(-z^2) w(iz) for Re z >= 0, odd symmetry otherwise.
    const double s = z.real() >= 0.0 ? 1.0 : -1.0;
    const std::complex<double> zs = s * z;
    const std::complex<double> izs(-zs.imag(), zs.real());
    return s * (1.0 - std::exp(-zs * zs) * faddeeva_upper(izs));
}

}  // namespace scratchwave
