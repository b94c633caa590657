#pragma once

#include <optional>
#include <random>
#include <span>

#include "scratchwave/diffraction.hpp"

namespace scratchwave {

using Rng = std::mt19937_64;

enum class Strategy { Base, Scratch, Ggx };

struct SampleRecord {
    DirectionCosines omega_o;
    double pdf = 0.0;  // solid angle
    Strategy strategy = Strategy::Base;
};

struct VmfParams {
    double kappa = 2000.0;
};

struct GgxParams {
    double alpha = 0.3;
};

// Per-axis standard deviation of the base lobe in direction-cosine units,
// lambda / (sqrt(8) pi sigma).
double base_lobe_std(const CoherenceKernel& kernel, double lambda);

// Gaussian direction-cosine sample around the mirror direction. Returns
// nullopt for evanescent draws.
std::optional<SampleRecord> sample_base(const DirectionCosines& omega_i, const CoherenceKernel& kernel, double lambda,
                                        Rng& rng);
double pdf_base(const DirectionCosines& omega_i, const DirectionCosines& omega_o, const CoherenceKernel& kernel,
                double lambda);

// Unit vector uniformly distributed under a von Mises-Fisher density
// around `mean`.
Vec3 sample_vmf(Vec3 mean, double kappa, Rng& rng);

// Cone reflection about the fiber axis `tangent` (in the surface plane),
// vMF-perturbed and folded into the upper hemisphere.
SampleRecord sample_scratch(const DirectionCosines& omega_i, Vec3 tangent, const VmfParams& vmf, Rng& rng);
// Unfolded spherical density p(theta_o, phi_o), theta measured from the tangent.
double scratch_density(const DirectionCosines& omega_i, Vec3 omega_o, Vec3 tangent, const VmfParams& vmf);
// Folded density on the upper hemisphere (2 p), zero below.
double pdf_scratch(const DirectionCosines& omega_i, const DirectionCosines& omega_o, Vec3 tangent,
                   const VmfParams& vmf);

// exp(-x) I0(x) for x >= 0.
double bessel_i0_scaled(double x);

// Balance heuristic weights pdf_i / sum_j pdf_j. Throws InvalidArgument when
// all densities vanish.
std::vector<double> combine_mis(std::span<const double> pdfs);

// Gaussian-weighted scratch area inside the window over 2 pi sigma^2,
// clamped to [0, 1].
double blend_weight(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel, Vec2 x0);

// Trowbridge-Reitz NDF for the half vector cosine.
double ggx_ndf(double cos_h, double alpha);
// Smith height-correlated masking-shadowing.
double ggx_g2(const DirectionCosines& omega_i, const DirectionCosines& omega_o, double alpha);
// Microfacet BRDF with Schlick Fresnel from f0; zero below the horizon.
double eval_ggx(const DirectionCosines& omega_i, const DirectionCosines& omega_o, const GgxParams& ggx, double f0);
// Half vector drawn from D(h) cos(theta_h), reflected about h.
std::optional<SampleRecord> sample_ggx(const DirectionCosines& omega_i, const GgxParams& ggx, Rng& rng);
double pdf_ggx(const DirectionCosines& omega_i, const DirectionCosines& omega_o, const GgxParams& ggx);

// One-sample mixture over the available strategies at a shading point.
// Scratch directions use one candidate picked proportionally to its
// Gaussian-weighted area.
class MixtureSampler {
public:
    struct Config {
        double base_weight = 1.0;
        double scratch_weight = 1.0;
        double ggx_weight = 0.0;
        VmfParams vmf;
        GgxParams ggx;
    };

    MixtureSampler(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel, Vec2 x0, double lambda,
                   const Config& config);

    std::optional<SampleRecord> sample(const DirectionCosines& omega_i, Rng& rng) const;
    // Combined density of every strategy weighted by its selection probability.
    double pdf(const DirectionCosines& omega_i, const DirectionCosines& omega_o) const;
    // Per-strategy densities: base, scratch mixture, ggx.
    std::array<double, 3> strategy_pdfs(const DirectionCosines& omega_i, const DirectionCosines& omega_o) const;
    const std::array<double, 3>& selection() const { return selection_; }

private:
    CoherenceKernel kernel_;
    double lambda_;
    Config config_;
    std::vector<Vec3> tangents_;
    std::vector<double> tangent_cdf_;
    std::vector<double> tangent_prob_;
    std::array<double, 3> selection_{};
};

}  // namespace scratchwave
