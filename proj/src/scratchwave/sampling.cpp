#include "scratchwave/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "scratchwave/error.hpp"

namespace scratchwave {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Any orthonormal pair completing `n`.
void basis(Vec3 n, Vec3& u, Vec3& v) {
    const double s = n.z >= 0.0 ? 1.0 : -1.0;
    const double a = -1.0 / (s + n.z);
    const double b = n.x * n.y * a;
    u = {1.0 + s * n.x * n.x * a, s * b, -s * n.x};
    v = {b, s + n.y * n.y * a, -n.y};
}

DirectionCosines upper(Vec3 v) { return {v.x, v.y, v.z}; }

}  // namespace

double base_lobe_std(const CoherenceKernel& kernel, double lambda) {
    return lambda / (std::sqrt(8.0) * kPi * kernel.sigma());
}

std::optional<SampleRecord> sample_base(const DirectionCosines& wi, const CoherenceKernel& kernel, double lambda,
                                        Rng& rng) {
    std::normal_distribution<double> normal(0.0, base_lobe_std(kernel, lambda));
    const double x1 = normal(rng);
    const double x2 = normal(rng);
    const double a = x1 - wi.alpha;
    const double b = x2 - wi.beta;
    if (a * a + b * b >= 1.0) return std::nullopt;
    SampleRecord rec;
    rec.omega_o = DirectionCosines::from_alpha_beta(a, b);
    rec.pdf = pdf_base(wi, rec.omega_o, kernel, lambda);
    rec.strategy = Strategy::Base;
    if (!(rec.pdf > 0.0)) return std::nullopt;
    return rec;
}

double pdf_base(const DirectionCosines& wi, const DirectionCosines& wo, const CoherenceKernel& kernel, double lambda) {
    if (!(wo.gamma > 0.0) || !(wi.gamma > 0.0)) return 0.0;
    const double s = base_lobe_std(kernel, lambda);
    const double x1 = wo.alpha + wi.alpha;
    const double x2 = wo.beta + wi.beta;
    const double density = std::exp(-0.5 * (x1 * x1 + x2 * x2) / (s * s)) / (2.0 * kPi * s * s);
    return density * wo.gamma;
}

Vec3 sample_vmf(Vec3 mean, double kappa, Rng& rng) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    double w;
    if (kappa < 1e-6) {
        w = 2.0 * u - 1.0;
    } else {
        w = 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
    }
    w = std::clamp(w, -1.0, 1.0);
    const double psi = 2.0 * kPi * uniform01(rng);
    Vec3 e1, e2;
    basis(mean, e1, e2);
    const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
    return normalize(mean * w + (e1 * std::cos(psi) + e2 * std::sin(psi)) * r);
}

SampleRecord sample_scratch(const DirectionCosines& wi, Vec3 tangent, const VmfParams& vmf, Rng& rng) {
    const Vec3 t = normalize(tangent);
    const Vec3 v = wi.vec();
    const double cos_i = dot(v, t);
    const double sin_i = std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i));
    Vec3 u1, u2;
    basis(t, u1, u2);
    const double phi = 2.0 * kPi * uniform01(rng);
    const Vec3 cone = t * (-cos_i) + (u1 * std::cos(phi) + u2 * std::sin(phi)) * sin_i;
    Vec3 d = sample_vmf(cone, vmf.kappa, rng);
    if (d.z < 0.0) d.z = -d.z;
    SampleRecord rec;
    rec.omega_o = upper(d);
    rec.pdf = pdf_scratch(wi, rec.omega_o, tangent, vmf);
    rec.strategy = Strategy::Scratch;
    return rec;
}

double bessel_i0_scaled(double x) {
    if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 12; ++k) {
        term *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        sum += term;
    }
    return sum / std::sqrt(2.0 * kPi * x);
}

double scratch_density(const DirectionCosines& wi, Vec3 wo, Vec3 tangent, const VmfParams& vmf) {
    const double kappa = vmf.kappa;
    const Vec3 t = normalize(tangent);
    const double ci = std::clamp(dot(wi.vec(), t), -1.0, 1.0);
    const double co = std::clamp(dot(normalize(wo), t), -1.0, 1.0);
    const double si = std::sqrt(1.0 - ci * ci);
    const double so = std::sqrt(1.0 - co * co);
    const double x = kappa * si * so;
    // kappa / (4 pi sinh kappa) e^{-kappa ci co} I0(x), with e^{kappa} and
    // e^{x} pulled out of sinh and I0.
    const double prefactor = kappa < 1e-8 ? 1.0 / (4.0 * kPi) : kappa / (2.0 * kPi * -std::expm1(-2.0 * kappa));
    return prefactor * std::exp(-kappa * (ci * co + 1.0) + x) * bessel_i0_scaled(x);
}

double pdf_scratch(const DirectionCosines& wi, const DirectionCosines& wo, Vec3 tangent, const VmfParams& vmf) {
    if (!(wo.gamma > 0.0)) return 0.0;
    // The tangent lies in the surface plane, so folding preserves the polar
    // angle and both preimages carry the same density.
    return 2.0 * scratch_density(wi, wo.vec(), tangent, vmf);
}

std::vector<double> combine_mis(std::span<const double> pdfs) {
    double sum = 0.0;
    for (double p : pdfs) {
        if (p < 0.0 || !std::isfinite(p)) fail(ErrorCode::InvalidArgument, "densities must be finite and nonnegative");
        sum += p;
    }
    if (!(sum > 0.0)) fail(ErrorCode::InvalidArgument, "all strategy densities are zero");
    std::vector<double> w;
    w.reserve(pdfs.size());
    for (double p : pdfs) w.push_back(p / sum);
    return w;
}

double blend_weight(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel, Vec2 x0) {
    const FrequencyVector zero{};
    double area = 0.0;
    for (const auto& s : candidates) {
        area += s.width * eta(s, scratch_frame(s), kernel, x0, zero).real();
    }
    const double sigma = kernel.sigma();
    return std::clamp(area / (2.0 * kPi * sigma * sigma), 0.0, 1.0);
}

double ggx_ndf(double cos_h, double alpha) {
    if (cos_h <= 0.0) return 0.0;
    const double a2 = alpha * alpha;
    const double d = cos_h * cos_h * (a2 - 1.0) + 1.0;
    return a2 / (kPi * d * d);
}

namespace {

double smith_lambda(double cos_theta, double alpha) {
    const double c2 = cos_theta * cos_theta;
    const double tan2 = (1.0 - c2) / c2;
    return 0.5 * (-1.0 + std::sqrt(1.0 + alpha * alpha * tan2));
}

Vec3 half_vector(const DirectionCosines& wi, const DirectionCosines& wo) { return normalize(wi.vec() + wo.vec()); }

}  // namespace

double ggx_g2(const DirectionCosines& wi, const DirectionCosines& wo, double alpha) {
    if (wi.gamma <= 0.0 || wo.gamma <= 0.0) return 0.0;
    return 1.0 / (1.0 + smith_lambda(wi.gamma, alpha) + smith_lambda(wo.gamma, alpha));
}

double eval_ggx(const DirectionCosines& wi, const DirectionCosines& wo, const GgxParams& ggx, double f0) {
    if (wi.gamma <= 0.0 || wo.gamma <= 0.0) return 0.0;
    const Vec3 h = half_vector(wi, wo);
    const double m = std::clamp(1.0 - dot(wi.vec(), h), 0.0, 1.0);
    const double fresnel = f0 + (1.0 - f0) * m * m * m * m * m;
    return ggx_ndf(h.z, ggx.alpha) * ggx_g2(wi, wo, ggx.alpha) * fresnel / (4.0 * wi.gamma * wo.gamma);
}

std::optional<SampleRecord> sample_ggx(const DirectionCosines& wi, const GgxParams& ggx, Rng& rng) {
    const double u = uniform01(rng);
    const double phi = 2.0 * kPi * uniform01(rng);
    const double tan2 = ggx.alpha * ggx.alpha * u / (1.0 - u);
    const double cos_h = 1.0 / std::sqrt(1.0 + tan2);
    const double sin_h = std::sqrt(std::max(0.0, 1.0 - cos_h * cos_h));
    const Vec3 h{sin_h * std::cos(phi), sin_h * std::sin(phi), cos_h};
    const Vec3 v = wi.vec();
    const Vec3 o = h * (2.0 * dot(v, h)) - v;
    if (o.z <= 0.0) return std::nullopt;
    SampleRecord rec;
    rec.omega_o = upper(normalize(o));
    rec.pdf = pdf_ggx(wi, rec.omega_o, ggx);
    rec.strategy = Strategy::Ggx;
    if (!(rec.pdf > 0.0)) return std::nullopt;
    return rec;
}

double pdf_ggx(const DirectionCosines& wi, const DirectionCosines& wo, const GgxParams& ggx) {
    if (wi.gamma <= 0.0 || wo.gamma <= 0.0) return 0.0;
    const Vec3 h = half_vector(wi, wo);
    const double oh = dot(wo.vec(), h);
    if (oh <= 0.0) return 0.0;
    return ggx_ndf(h.z, ggx.alpha) * h.z / (4.0 * oh);
}

MixtureSampler::MixtureSampler(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel, Vec2 x0,
                               double lambda, const Config& config)
    : kernel_(kernel), lambda_(lambda), config_(config) {
    const FrequencyVector zero{};
    double total = 0.0;
    for (const auto& s : candidates) {
        const ScratchFrame frame = scratch_frame(s);
        const double w = s.width * eta(s, frame, kernel, x0, zero).real();
        if (!(w > 0.0)) continue;
        tangents_.push_back(frame.t_hat);
        tangent_prob_.push_back(w);
        total += w;
        tangent_cdf_.push_back(total);
    }
    for (auto& p : tangent_prob_) p /= total;
    for (auto& c : tangent_cdf_) c /= total;

    selection_ = {std::max(config.base_weight, 0.0), tangents_.empty() ? 0.0 : std::max(config.scratch_weight, 0.0),
                  std::max(config.ggx_weight, 0.0)};
    const double sum = selection_[0] + selection_[1] + selection_[2];
    if (!(sum > 0.0)) fail(ErrorCode::InvalidArgument, "mixture sampler has no active strategy");
    for (auto& s : selection_) s /= sum;
}

std::optional<SampleRecord> MixtureSampler::sample(const DirectionCosines& wi, Rng& rng) const {
    const double u = uniform01(rng);
    std::optional<SampleRecord> rec;
    if (u < selection_[0]) {
        rec = sample_base(wi, kernel_, lambda_, rng);
    } else if (u < selection_[0] + selection_[1]) {
        const double v = uniform01(rng);
        const auto it = std::upper_bound(tangent_cdf_.begin(), tangent_cdf_.end(), v);
        const size_t k = std::min(static_cast<size_t>(it - tangent_cdf_.begin()), tangents_.size() - 1);
        rec = sample_scratch(wi, tangents_[k], config_.vmf, rng);
    } else {
        rec = sample_ggx(wi, config_.ggx, rng);
    }
    if (!rec) return std::nullopt;
    rec->pdf = pdf(wi, rec->omega_o);
    if (!(rec->pdf > 0.0)) return std::nullopt;
    return rec;
}

std::array<double, 3> MixtureSampler::strategy_pdfs(const DirectionCosines& wi, const DirectionCosines& wo) const {
    std::array<double, 3> p{};
    if (selection_[0] > 0.0) p[0] = pdf_base(wi, wo, kernel_, lambda_);
    if (selection_[1] > 0.0) {
        for (size_t k = 0; k < tangents_.size(); ++k) p[1] += tangent_prob_[k] * pdf_scratch(wi, wo, tangents_[k], config_.vmf);
    }
    if (selection_[2] > 0.0) p[2] = pdf_ggx(wi, wo, config_.ggx);
    return p;
}

double MixtureSampler::pdf(const DirectionCosines& wi, const DirectionCosines& wo) const {
    const auto p = strategy_pdfs(wi, wo);
    return selection_[0] * p[0] + selection_[1] * p[1] + selection_[2] * p[2];
}

}  // namespace scratchwave
