#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "scratchwave/diffraction.hpp"

namespace scratchwave {

// Square grid centered on the pattern origin. Cell j covers
// [-extent/2 + j cell, -extent/2 + (j+1) cell) along each axis.
struct GridSpec {
    int resolution = 4096;
    double extent = 120e-6;

    double cell() const { return extent / resolution; }
    double center(int j) const { return -0.5 * extent + (j + 0.5) * cell(); }
};

struct HeightfieldGrid {
    GridSpec spec;
    std::vector<double> heights;        // meters, row-major (y outer), <= 0
    std::vector<std::uint8_t> covered;  // 1 inside any scratch

    double at(int ix, int iy) const { return heights[static_cast<size_t>(iy) * spec.resolution + ix]; }
};

// Cell height is the negated profile depth at the cell center; overlapping
// scratches keep the deepest value. Support is half-open across the
// scratch (-W/2 <= b < W/2) and closed along it.
HeightfieldGrid rasterize(std::span<const ScratchSegment> segments, const GridSpec& spec);

struct TransferGrid {
    GridSpec spec;
    std::vector<Complex> values;
};

// T = A' e^{i 4 pi h / lambda}, A' = a_scratch inside scratches and a_base
// elsewhere.
TransferGrid transfer_function(const HeightfieldGrid& heightfield, double lambda, const MaterialParams& material);

struct RadianceGrid {
    int size = 0;          // padded transform size per axis
    double dxi = 0.0;      // frequency spacing (1/m)
    double lambda = 0.0;
    DirectionCosines omega_i;
    std::vector<double> values;  // f_r per bin, centered: bin (size/2, size/2) is xi = 0
    double parseval_spatial = 0.0;   // integral of |T G|^2 dx
    double parseval_spectral = 0.0;  // sum |F|^2 dxi^2

    double xi_of(int k) const { return (k - size / 2) * dxi; }
    double at(int kx, int ky) const { return values[static_cast<size_t>(ky) * size + kx]; }
    // alpha_o^2 + beta_o^2 > 1 at the bin.
    bool evanescent(int kx, int ky) const;
    // Bilinear value at (xi1, xi2); zero outside the grid.
    double sample(double xi1, double xi2) const;
};

struct FftOptions {
    int padding = 2;
    double fresnel = 1.0;
};

// Windowed transform of T G(x - x0), scaled to a BRDF. Throws
// WindowTruncation when the 4 sigma window leaves the grid or sigma spans
// fewer than 4 cells.
RadianceGrid fft_radiance(const TransferGrid& transfer, const CoherenceKernel& kernel, Vec2 x0,
                          const DirectionCosines& omega_i, double lambda, const FftOptions& options = {});

struct Slice {
    std::vector<double> xi;       // signed position along the slice (1/m)
    std::vector<double> numeric;  // f_r from the grid
    std::vector<double> analytic;
};

struct Slices {
    Slice tangential;     // xi2' = 0
    Slice bitangential;   // xi1' = 0
};

using AnalyticEvaluator = std::function<double(const FrequencyVector&)>;

// Slices through xi = 0 along the scratch axes `tangent`, at grid spacing,
// restricted to propagating directions. `analytic` may be empty.
Slices extract_slices(const RadianceGrid& radiance, Vec2 tangent, const AnalyticEvaluator& analytic = {});

struct ErrorReport {
    int samples = 0;
    double l2_relative = 0.0;
    double max_relative = 0.0;
    int analytic_below = 0;  // samples with analytic <= numeric
    double sign_test_p = 1.0;  // one-sided binomial p for analytic <= numeric
};

// Metrics over slice samples with lo <= |xi| <= hi.
ErrorReport compare(const Slice& slice, double lo, double hi);

// Least-squares parabola through log(numeric) where numeric >= floor * peak;
// returns R^2 of the fit.
double log_parabola_r2(const Slice& slice, double floor);

// Analytic f_r at the grid's incidence for a transverse frequency.
AnalyticEvaluator make_analytic(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                                const MaterialParams& material, Vec2 x0, const DirectionCosines& omega_i,
                                double lambda);

struct OracleRequest {
    std::vector<ScratchSegment> segments;
    double sigma = 10e-6;
    double lambda = 0.5e-6;
    Vec2 x0;
    GridSpec grid;
    MaterialParams material;
    DirectionCosines omega_i;
};

// Relative level bounding the Gaussian main lobe used for the tangential fit.
// Further out both solutions ripple from the finite scratch length.
inline constexpr double kTangentialFitFloor = 1e-3;

struct OracleSummary {
    Slices slices;
    ErrorReport central_lobe;
    ErrorReport side_lobes;
    ErrorReport tangential;
    double tangential_r2 = 0.0;
    double parseval_relative = 0.0;
    Vec2 tangent{1.0, 0.0};
    double width = 0.0;
};

// Rasterize, transform and compare slices against eval_brdf.
OracleSummary run_oracle(const OracleRequest& request);

// slice_tangential.csv, slice_bitangential.csv, summary.txt under `dir`.
void write_oracle_report(const OracleSummary& summary, const OracleRequest& request, const std::string& dir);

}  // namespace scratchwave
