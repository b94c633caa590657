#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

namespace scratchwave {

inline constexpr double kLambdaMin = 380e-9;
inline constexpr double kLambdaMax = 720e-9;
inline constexpr double kLambdaRed = 700e-9;
inline constexpr double kLambdaGreen = 520e-9;
inline constexpr double kLambdaBlue = 440e-9;

struct SpectralSample {
    double lambda = 550e-9;  // meters
    double weight = 1.0;     // stratum width in nanometers for spectral modes
};

struct ColorXYZ {
    double x = 0.0, y = 0.0, z = 0.0;
};

struct ColorRGB {
    double r = 0.0, g = 0.0, b = 0.0;
};

enum class WavelengthMode { Rgb, Spectral };

// Rgb: {700, 520, 440} nm, n ignored. Spectral: n equal strata over
// [380, 720] nm, one sample per stratum. With rng == nullptr every sample
// sits at its stratum midpoint.
std::vector<SpectralSample> sample_wavelengths(WavelengthMode mode, int n, std::mt19937_64* rng);

// Wavelength of stratum `index` of `n` for a uniform jitter u in [0, 1).
double stratum_wavelength(int index, int n, double u);

// CIE 1931 2-degree observer at 1 nm spacing from 380 to 780 nm.
struct CmfTable {
    static constexpr int kFirstNm = 380;
    static constexpr int kCount = 401;
    std::array<std::array<double, 3>, kCount> values;
};
const CmfTable& cmf_table();

// Color matching functions at lambda (meters), linear between table nodes,
// zero outside the table.
ColorXYZ cmf(double lambda);

// 1 / sum of y-bar over [380, 720] nm at 1 nm: a flat unit spectrum maps to Y = 1.
double cmf_normalization();

ColorRGB xyz_to_linear_srgb(const ColorXYZ& xyz);

// Weighted Riemann sum over the samples, normalized as above, then the
// D65 sRGB matrix.
ColorXYZ spectrum_to_xyz(std::span<const SpectralSample> samples, std::span<const double> radiance);
ColorRGB spectrum_to_rgb(std::span<const SpectralSample> samples, std::span<const double> radiance);

// sRGB opto-electronic transfer function on a linear value in [0, 1].
double srgb_encode(double linear);

}  // namespace scratchwave
