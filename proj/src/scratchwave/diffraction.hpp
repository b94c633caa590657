#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scratchwave/bvh.hpp"
#include "scratchwave/scratch.hpp"

namespace scratchwave {

using Complex = std::complex<double>;

// Components of a unit direction. Both incident and outgoing directions are
// stored pointing away from the surface, so gamma >= 0 above the horizon.
struct DirectionCosines {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 1.0;

    static DirectionCosines from_vector(Vec3 v) {
        const Vec3 n = normalize(v);
        return {n.x, n.y, n.z};
    }
    // gamma from alpha, beta; requires alpha^2 + beta^2 <= 1.
    static DirectionCosines from_alpha_beta(double alpha, double beta);
    Vec3 vec() const { return {alpha, beta, gamma}; }
};

// Spatial frequency (1/m). Transverse components carry the 1/lambda factor.
struct FrequencyVector {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double xi3 = 0.0;
};

// xi = (omega_o + omega_i) / lambda with the stored-direction convention;
// zero transverse frequency at mirror reflection. Throws BelowHorizon.
FrequencyVector compute_xi(const DirectionCosines& omega_i, const DirectionCosines& omega_o, double lambda);

// Frequency vector rotated into the scratch frame.
FrequencyVector to_scratch_frequency(const ScratchFrame& frame, const FrequencyVector& xi);

class CoherenceKernel {
public:
    explicit CoherenceKernel(double sigma);
    double sigma() const { return sigma_; }
    double delta_c() const { return 6.0 * sigma_; }
    double shading_area() const { return kPi * sigma_ * sigma_; }
    double weight(Vec2 offset) const { return std::exp(-0.5 * dot(offset, offset) / (sigma_ * sigma_)); }

private:
    double sigma_;
};

// Normal-incidence reflectance f0 tabulated against wavelength, linearly
// interpolated and clamped at the ends. An empty table means f0 = 1.
struct FresnelTable {
    std::vector<std::pair<double, double>> samples;  // (lambda m, f0)

    double f0(double lambda) const;
    // Schlick's approximation at incidence cosine cos_theta.
    double schlick(double lambda, double cos_theta) const;
};

struct MaterialParams {
    double a_base = 1.0;
    double a_scratch = 1.0;
    double a_mask = 1.0;
    FresnelTable fresnel;
};

void validate(const MaterialParams& material);

Complex base_response(const CoherenceKernel& kernel, const MaterialParams& material, const FrequencyVector& xi);

// Intermediate quantities of the closed-form Gaussian-weighted line integral.
struct EtaIntermediates {
    Complex a0;      // 2 pi i sigma xi1' + (t' . r0') / sigma
    Complex c0_log;  // log of sqrt(pi/2) sigma e^{e + i f}
    double e = 0.0;  // always <= 0
    double f = 0.0;
};

// `r0` is the segment midpoint relative to x0 in scratch coordinates.
EtaIntermediates eta_intermediates(Vec2 r0, double sigma, const FrequencyVector& xi_prime);

struct EtaResult {
    Complex value;
    bool used_quadrature = false;
};

// Gaussian-weighted integral of the spatial phase along a segment.
EtaResult eta_detailed(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel,
                       Vec2 x0, const FrequencyVector& xi_prime);
Complex eta(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel, Vec2 x0,
            const FrequencyVector& xi_prime);
// Composite 64-point Gauss-Legendre evaluation of the same integral.
Complex eta_gauss_legendre(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel,
                           Vec2 x0, const FrequencyVector& xi_prime);

// sin(x)/x with the removable singularity filled by its series.
double sinc(double x);

Complex mask_ft(const MaterialParams& material, double width, double xi2_prime);

struct ProfileFtTerms {
    Complex width_term;  // W sinc(pi W xi2')
    Complex depth_term;  // 1 - e^{-4 pi i D / lambda}; rect factorization only
    Complex scratch_ft;  // full scratch profile transform, amplitude included
    Complex tri_b;       // right-half contribution of the triangle profile
    Complex tri_c;       // left-half contribution of the triangle profile

    // Mask minus scratch transform for a given mask amplitude.
    Complex difference(double a_mask) const { return a_mask * width_term - scratch_ft; }
};

ProfileFtTerms profile_ft_rect(const MaterialParams& material, double width, double depth, double lambda,
                               double xi2_prime);
ProfileFtTerms profile_ft_triangle(const MaterialParams& material, double width, double depth, double lambda,
                                   double xi2_prime);
ProfileFtTerms profile_ft(const MaterialParams& material, ProfileKind kind, double width, double depth, double lambda,
                          double xi2_prime);

struct EvalOptions {
    // When set, each segment is evaluated as uniform sub-segments with
    // noise-modulated width and depth.
    std::optional<VariationSpec> variation;
    // false: scratch amplitudes add in intensity (no mutual interference).
    bool coherent = true;
};

// Contribution of a single segment: [mask - scratch](xi2') * eta(x0, xi').
Complex scratch_term(const ScratchSegment& segment, const CoherenceKernel& kernel, const MaterialParams& material,
                     Vec2 x0, const FrequencyVector& xi, double lambda);

struct ScratchSum {
    Complex coherent;        // sum of amplitudes
    double incoherent = 0.0; // sum of squared magnitudes
};

ScratchSum scratch_sum(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                       const MaterialParams& material, Vec2 x0, const DirectionCosines& omega_i,
                       const DirectionCosines& omega_o, double lambda, const EvalOptions& options = {});

Complex scratch_response(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                         const MaterialParams& material, Vec2 x0, const DirectionCosines& omega_i,
                         const DirectionCosines& omega_o, double lambda, const EvalOptions& options = {});

struct BrdfEval {
    Complex base_response;
    Complex scratch_response;
    double f_r = 0.0;  // 1/sr
};

// Default candidate radius is 3 sigma.
double default_query_radius(const CoherenceKernel& kernel);

// Full SVBRDF value at x0. `bvh` owns the pattern.
BrdfEval eval_brdf(Vec2 x0, const DirectionCosines& omega_i, const DirectionCosines& omega_o, double lambda,
                   const CoherenceKernel& kernel, const MaterialParams& material, const SegmentBvh& bvh,
                   const EvalOptions& options = {});

// Same with an explicit candidate list (already queried).
BrdfEval eval_brdf_candidates(std::span<const ScratchSegment> candidates, Vec2 x0, const DirectionCosines& omega_i,
                              const DirectionCosines& omega_o, double lambda, const CoherenceKernel& kernel,
                              const MaterialParams& material, const EvalOptions& options = {});

}  // namespace scratchwave
