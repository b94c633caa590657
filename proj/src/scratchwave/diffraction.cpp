#include "scratchwave/diffraction.hpp"

#include <algorithm>
#include <cmath>

#include "scratchwave/error.hpp"
#include "scratchwave/faddeeva.hpp"
#include "scratchwave/gauss_legendre.hpp"

namespace scratchwave {

namespace {

constexpr double kSqrtHalfPi = 1.25331413731550025121;  // sqrt(pi/2)
constexpr double kSqrt2 = 1.41421356237309504880;

// Digits the closed form may lose to cancellation before the
// quadrature path takes over.
constexpr double kMaxCancellation = 1e6;

}  // namespace

DirectionCosines DirectionCosines::from_alpha_beta(double alpha, double beta) {
    const double g2 = 1.0 - alpha * alpha - beta * beta;
    return {alpha, beta, std::sqrt(std::max(g2, 0.0))};
}

FrequencyVector compute_xi(const DirectionCosines& wi, const DirectionCosines& wo, double lambda) {
    if (!(wi.gamma > 0.0) || !(wo.gamma > 0.0)) fail(ErrorCode::BelowHorizon, "direction below the horizon");
    if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "wavelength must be positive");
    return {(wo.alpha + wi.alpha) / lambda, (wo.beta + wi.beta) / lambda, (wo.gamma + wi.gamma) / lambda};
}

FrequencyVector to_scratch_frequency(const ScratchFrame& frame, const FrequencyVector& xi) {
    const Vec3 r = to_scratch_space(frame, {}, {xi.xi1, xi.xi2, xi.xi3}, VectorKind::Frequency);
    return {r.x, r.y, r.z};
}

CoherenceKernel::CoherenceKernel(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidArgument, "coherence sigma must be positive");
}

double FresnelTable::f0(double lambda) const {
    if (samples.empty()) return 1.0;
    if (lambda <= samples.front().first) return samples.front().second;
    if (lambda >= samples.back().first) return samples.back().second;
    const auto hi = std::lower_bound(samples.begin(), samples.end(), lambda,
                                     [](const auto& s, double l) { return s.first < l; });
    const auto lo = hi - 1;
    const double t = (lambda - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

double FresnelTable::schlick(double lambda, double cos_theta) const {
    const double r0 = f0(lambda);
    const double m = std::clamp(1.0 - cos_theta, 0.0, 1.0);
    const double m2 = m * m;
    return r0 + (1.0 - r0) * m2 * m2 * m;
}

void validate(const MaterialParams& m) {
    for (double a : {m.a_base, m.a_scratch, m.a_mask}) {
        if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::InvalidArgument, "amplitude factors must lie in [0, 1]");
    }
    for (size_t i = 0; i < m.fresnel.samples.size(); ++i) {
        const auto [l, f] = m.fresnel.samples[i];
        if (!(f >= 0.0 && f <= 1.0)) fail(ErrorCode::InvalidArgument, "fresnel f0 must lie in [0, 1]");
        if (i > 0 && !(l > m.fresnel.samples[i - 1].first)) {
            fail(ErrorCode::InvalidArgument, "fresnel table wavelengths must increase");
        }
    }
}

Complex base_response(const CoherenceKernel& kernel, const MaterialParams& material, const FrequencyVector& xi) {
    // Exact transform of exp(-|x|^2 / 2 sigma^2).
    const double s2 = kernel.sigma() * kernel.sigma();
    const double q = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2;
    return material.a_base * 2.0 * kPi * s2 * std::exp(-2.0 * kPi * kPi * s2 * q);
}

EtaIntermediates eta_intermediates(Vec2 r0, double sigma, const FrequencyVector& xp) {
    EtaIntermediates out;
    const double y = 2.0 * kPi * sigma * xp.xi1;
    out.a0 = {r0.x / sigma, y};
    // -|r0|^2/2s^2 + (t.r0)^2/2s^2 collapses to the bitangential offset.
    out.e = -0.5 * (r0.y * r0.y) / (sigma * sigma) - 0.5 * y * y;
    out.f = -2.0 * kPi * r0.y * xp.xi2;
    out.c0_log = {std::log(kSqrtHalfPi * sigma) + out.e, out.f};
    return out;
}

namespace {

struct Endpoint {
    Complex scaled;  // exp(c0_log - z^2) w(i s z)
    double sign;     // s = sign(Re z)
};

// c0 * erf(z) = s c0 - s exp(c0_log - z^2) w(i s z); the exponent is
// assembled analytically so that growth of erf never materializes.
Endpoint endpoint(const EtaIntermediates& im, double x, double y, double sigma, double bitangential) {
    const double s = x >= 0.0 ? 1.0 : -1.0;
    const Complex z(x / kSqrt2, y / kSqrt2);
    const Complex zeta = Complex(0.0, s) * z;
    const double re = std::log(kSqrtHalfPi * sigma) - 0.5 * (bitangential * bitangential) / (sigma * sigma) - 0.5 * x * x;
    const double im_part = im.f - x * y;
    const double mag = std::exp(re);
    Complex scaled = 0.0;
    if (mag > 0.0) scaled = mag * Complex(std::cos(im_part), std::sin(im_part)) * faddeeva_upper(zeta);
    return {scaled, s};
}

Vec2 relative_midpoint(const ScratchSegment& segment, const ScratchFrame& frame, Vec2 x0) {
    const Vec2 m = segment.midpoint();
    const Vec3 r = to_scratch_space(frame, x0, {m.x, m.y, 0.0}, VectorKind::Point);
    return {r.x, r.y};
}

}  // namespace

Complex eta_gauss_legendre(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel,
                           Vec2 x0, const FrequencyVector& xp) {
    const auto& rule = GaussLegendre<64>::instance();
    const Vec2 r0 = relative_midpoint(segment, frame, x0);
    const double half = 0.5 * segment.length();
    const double s2 = kernel.sigma() * kernel.sigma();
    // One panel per 8 oscillation periods and per 2 sigma of length.
    const double len = segment.length();
    const int panels = static_cast<int>(std::clamp(
        std::ceil(std::max(len * std::abs(xp.xi1) / 8.0, len / (2.0 * kernel.sigma()))), 1.0, 4096.0));
    const double h = len / panels;
    Complex acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double c = r0.x - half + (p + 0.5) * h;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double t = c + 0.5 * h * rule.nodes[i];
            const double g = std::exp(-0.5 * (t * t + r0.y * r0.y) / s2);
            const double phase = -2.0 * kPi * (t * xp.xi1 + r0.y * xp.xi2);
            acc += rule.weights[i] * g * Complex(std::cos(phase), std::sin(phase));
        }
    }
    return acc * (0.5 * h);
}

EtaResult eta_detailed(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel,
                       Vec2 x0, const FrequencyVector& xp) {
    const double sigma = kernel.sigma();
    const Vec2 r0 = relative_midpoint(segment, frame, x0);
    const EtaIntermediates im = eta_intermediates(r0, sigma, xp);
    const double half = 0.5 * segment.length() / sigma;
    const double y = im.a0.imag();
    const double x_hi = im.a0.real() + half;
    const double x_lo = im.a0.real() - half;

    const Endpoint hi = endpoint(im, x_hi, y, sigma, r0.y);
    const Endpoint lo = endpoint(im, x_lo, y, sigma, r0.y);
    Complex constant = 0.0;
    if (hi.sign != lo.sign) constant = (hi.sign - lo.sign) * std::exp(im.c0_log);
    const Complex value = constant - hi.sign * hi.scaled + lo.sign * lo.scaled;

    const double scale = std::abs(constant) + std::abs(hi.scaled) + std::abs(lo.scaled);
    if (scale == 0.0) return {0.0, false};
    if (std::abs(value) * kMaxCancellation < scale) {
        return {eta_gauss_legendre(segment, frame, kernel, x0, xp), true};
    }
    return {value, false};
}

Complex eta(const ScratchSegment& segment, const ScratchFrame& frame, const CoherenceKernel& kernel, Vec2 x0,
            const FrequencyVector& xp) {
    return eta_detailed(segment, frame, kernel, x0, xp).value;
}

double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

Complex mask_ft(const MaterialParams& material, double width, double xi2) {
    return material.a_mask * width * sinc(kPi * width * xi2);
}

namespace {

// e^{-4 pi i D / lambda}, reduced by whole waves first so that D = m lambda / 2
// yields exactly 1.
Complex depth_phase(double depth, double lambda) {
    const double phi = -2.0 * kPi * std::remainder(2.0 * depth / lambda, 1.0);
    return {std::cos(phi), std::sin(phi)};
}

Complex cis(double phi) { return {std::cos(phi), std::sin(phi)}; }

}  // namespace

ProfileFtTerms profile_ft_rect(const MaterialParams& material, double width, double depth, double lambda,
                               double xi2) {
    ProfileFtTerms t;
    const Complex phase = depth_phase(depth, lambda);
    t.width_term = width * sinc(kPi * width * xi2);
    t.depth_term = 1.0 - phase;
    t.scratch_ft = material.a_scratch * t.width_term * phase;
    return t;
}

ProfileFtTerms profile_ft_triangle(const MaterialParams& material, double width, double depth, double lambda,
                                   double xi2) {
    // Depth D at the center falling linearly to 0 at |b| = W/2:
    //   T(b) = A exp(-i k (1 - 2|b|/W)),  k = 4 pi D / lambda.
    // Each half integrates to (W/2) e^{i x/2} sinc(x/2) e^{-ik} with
    // x = k -/+ pi W xi; the two halves have removable poles where x = 0.
    ProfileFtTerms t;
    const double k = 4.0 * kPi * depth / lambda;
    const double p = kPi * width * xi2;
    const double amp = material.a_scratch * 0.5 * width;
    t.width_term = width * sinc(p);
    t.depth_term = 1.0 - depth_phase(depth, lambda);
    t.tri_b = amp * cis(-0.5 * (k + p)) * sinc(0.5 * (k - p));
    t.tri_c = amp * cis(-0.5 * (k - p)) * sinc(0.5 * (k + p));
    t.scratch_ft = t.tri_b + t.tri_c;
    return t;
}

ProfileFtTerms profile_ft(const MaterialParams& material, ProfileKind kind, double width, double depth, double lambda,
                          double xi2) {
    return kind == ProfileKind::Rect ? profile_ft_rect(material, width, depth, lambda, xi2)
                                     : profile_ft_triangle(material, width, depth, lambda, xi2);
}

Complex scratch_term(const ScratchSegment& segment, const CoherenceKernel& kernel, const MaterialParams& material,
                     Vec2 x0, const FrequencyVector& xi, double lambda) {
    const ScratchFrame frame = scratch_frame(segment);
    const FrequencyVector xp = to_scratch_frequency(frame, xi);
    const ProfileFtTerms terms = profile_ft(material, segment.profile, segment.width, segment.depth, lambda, xp.xi2);
    const Complex diff = terms.difference(material.a_mask);
    if (diff == 0.0) return 0.0;
    return diff * eta(segment, frame, kernel, x0, xp);
}

ScratchSum scratch_sum(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                       const MaterialParams& material, Vec2 x0, const DirectionCosines& wi,
                       const DirectionCosines& wo, double lambda, const EvalOptions& options) {
    const FrequencyVector xi = compute_xi(wi, wo, lambda);
    ScratchSum sum;
    auto add = [&](const ScratchSegment& s) {
        const Complex term = scratch_term(s, kernel, material, x0, xi, lambda);
        sum.coherent += term;
        sum.incoherent += std::norm(term);
    };
    for (const auto& segment : candidates) {
        if (options.variation) {
            const double step = std::min(kernel.sigma(), segment.length() / 8.0);
            Complex piece_sum = 0.0;
            for (const auto& piece : subdivide_varied(segment, *options.variation, step)) {
                piece_sum += scratch_term(piece, kernel, material, x0, xi, lambda);
            }
            // One scratch, one incoherent contribution.
            sum.coherent += piece_sum;
            sum.incoherent += std::norm(piece_sum);
        } else {
            add(segment);
        }
    }
    return sum;
}

Complex scratch_response(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                         const MaterialParams& material, Vec2 x0, const DirectionCosines& wi,
                         const DirectionCosines& wo, double lambda, const EvalOptions& options) {
    return scratch_sum(candidates, kernel, material, x0, wi, wo, lambda, options).coherent;
}

double default_query_radius(const CoherenceKernel& kernel) { return 0.5 * kernel.delta_c(); }

BrdfEval eval_brdf_candidates(std::span<const ScratchSegment> candidates, Vec2 x0, const DirectionCosines& wi,
                              const DirectionCosines& wo, double lambda, const CoherenceKernel& kernel,
                              const MaterialParams& material, const EvalOptions& options) {
    const FrequencyVector xi = compute_xi(wi, wo, lambda);
    BrdfEval out;
    out.base_response = base_response(kernel, material, xi);
    const ScratchSum sum = scratch_sum(candidates, kernel, material, x0, wi, wo, lambda, options);
    out.scratch_response = sum.coherent;
    const double intensity = options.coherent ? std::norm(out.base_response - sum.coherent)
                                              : std::norm(out.base_response) + sum.incoherent;
    const double fresnel = material.fresnel.schlick(lambda, wi.gamma);
    out.f_r = wi.gamma * fresnel / kernel.shading_area() / (lambda * lambda) * intensity;
    if (!std::isfinite(out.f_r)) fail(ErrorCode::Internal, "non-finite BRDF value");
    return out;
}

BrdfEval eval_brdf(Vec2 x0, const DirectionCosines& wi, const DirectionCosines& wo, double lambda,
                   const CoherenceKernel& kernel, const MaterialParams& material, const SegmentBvh& bvh,
                   const EvalOptions& options) {
    thread_local std::vector<std::uint32_t> ids;
    thread_local std::vector<ScratchSegment> candidates;
    candidates.clear();
    if (!bvh.empty()) {
        bvh.query_disc(x0, default_query_radius(kernel), ids);
        for (auto id : ids) candidates.push_back(bvh.segments()[id]);
    }
    return eval_brdf_candidates(candidates, x0, wi, wo, lambda, kernel, material, options);
}

}  // namespace scratchwave
