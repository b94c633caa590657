#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "scratchwave/error.hpp"
#include "scratchwave/sampling.hpp"

using namespace scratchwave;

namespace {

DirectionCosines polar(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

// Integral over the hemisphere of g(direction) by the midpoint rule in
// (cos theta, phi).
double hemisphere(const std::function<double(const DirectionCosines&)>& g, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double c = (i + 0.5) / n;
        for (int j = 0; j < 2 * n; ++j) acc += g(polar(std::acos(c), kPi * (j + 0.5) / n));
    }
    return acc * (1.0 / n) * (kPi / n);
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("large coherence area samples the mirror direction") {
    const CoherenceKernel k(1e-3);
    Rng rng(1);
    const auto wi = polar(0.5, 0.3);
    for (int i = 0; i < 100; ++i) {
        const auto s = sample_base(wi, k, 0.5e-6, rng);
        REQUIRE(s);
        CHECK(std::abs(s->omega_o.alpha + wi.alpha) < 1e-3);
        CHECK(std::abs(s->omega_o.beta + wi.beta) < 1e-3);
    }
}

TEST_CASE("base lobe is centered and has the stated spread") {
    const CoherenceKernel k(5e-6);
    const double lambda = 0.5e-6, sd = base_lobe_std(k, lambda);
    Rng rng(2);
    const auto wi = polar(0.2, 1.0);
    double m1 = 0.0, m2 = 0.0, v1 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const auto s = sample_base(wi, k, lambda, rng);
        REQUIRE(s);
        const double x = s->omega_o.alpha + wi.alpha, y = s->omega_o.beta + wi.beta;
        m1 += x;
        m2 += y;
        v1 += x * x;
    }
    CHECK(std::abs(m1 / n) < 5.0 * sd / std::sqrt(n));
    CHECK(std::abs(m2 / n) < 5.0 * sd / std::sqrt(n));
    CHECK(std::sqrt(v1 / n) == doctest::Approx(sd).epsilon(0.01));
}

TEST_CASE("base density peak, horizon, and total mass") {
    const CoherenceKernel k(1e-6);
    const double lambda = 0.7e-6, sd = base_lobe_std(k, lambda);
    const auto wi = polar(1.2, 0.0);
    const DirectionCosines mirror{-wi.alpha, -wi.beta, wi.gamma};
    CHECK(pdf_base(wi, mirror, k, lambda) == doctest::Approx(wi.gamma / (2 * kPi * sd * sd)));
    CHECK(pdf_base(wi, DirectionCosines{0.0, 0.0, -1.0}, k, lambda) == 0.0);

    // Mass on the hemisphere equals the probability of a propagating draw.
    Rng rng(3);
    int accepted = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) accepted += sample_base(wi, k, lambda, rng) ? 1 : 0;
    const double mass = hemisphere([&](const DirectionCosines& d) { return pdf_base(wi, d, k, lambda); }, 800);
    CHECK(mass == doctest::Approx(static_cast<double>(accepted) / n).epsilon(0.01));
    CHECK(mass < 0.95);
}

TEST_CASE("scaled Bessel function") {
    const std::pair<double, double> ref[] = {{0.5, 0.6450352704491500681079966},
                                             {10.0, 0.1278333371634286073230503},
                                             {37.5, 0.06536750999983555793933163},
                                             {400.0, 0.01995335628193998987129679},
                                             {600.0, 0.01629014665630598169061102},
                                             {2000.0, 0.008921178276439670273093033}};
    for (auto [x, v] : ref) CHECK(bessel_i0_scaled(x) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("cone density against an extended-precision reference") {
    const Vec3 t{1.0, 0.0, 0.0};
    const DirectionCosines wi{0.5, 0.0, std::sqrt(0.75)};
    const Vec3 wo{0.5, std::sqrt(0.75) * std::cos(0.4), std::sqrt(0.75) * std::sin(0.4)};
    CHECK(scratch_density(wi, wo, t, {50.0}) == doctest::Approx(7.224204484569749099035467e-12).epsilon(1e-9));
    CHECK(scratch_density(wi, wo, t, {1e-12}) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-9));
    CHECK(scratch_density(wi, wo, t, {1e-3}) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-2));
}

TEST_CASE("normal incidence density ignores azimuth about the tangent") {
    const Vec3 t{std::cos(0.7), std::sin(0.7), 0.0};
    const DirectionCosines wi{0.0, 0.0, 1.0};
    const Vec3 b = cross(Vec3{0, 0, 1}, t);
    for (double u : {-0.6, 0.0, 0.3}) {
        const double r = std::sqrt(1 - u * u);
        const double p0 = scratch_density(wi, t * u + b * r, t, {200.0});
        for (double phi : {0.3, 1.1, 2.9}) {
            const Vec3 w = t * u + b * (r * std::cos(phi)) + Vec3{0, 0, 1} * (r * std::sin(phi));
            CHECK(scratch_density(wi, w, t, {200.0}) == doctest::Approx(p0).epsilon(1e-12));
        }
    }
}

TEST_CASE("sharp cone concentrates on the reflection cone") {
    const Vec3 t{0.0, 1.0, 0.0};
    const auto wi = polar(0.8, 0.4);
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const auto rec = sample_scratch(wi, t, {1e6}, rng);
        const double u = dot(rec.omega_o.vec(), t);
        CHECK(std::abs(std::acos(std::clamp(u, -1.0, 1.0)) - std::acos(-dot(wi.vec(), t))) < 1e-2);
        CHECK(rec.omega_o.gamma >= 0.0);
    }
}

TEST_CASE("folded density integrates to one over the hemisphere") {
    const Vec3 t{std::cos(0.3), std::sin(0.3), 0.0};
    const auto wi = polar(0.9, 2.0);
    for (double kappa : {1.0, 30.0}) {
        const double m = hemisphere([&](const DirectionCosines& d) { return pdf_scratch(wi, d, t, {kappa}); }, 600);
        CHECK(m == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("balance heuristic") {
    const std::vector<double> p{1.0, 3.0, 0.0};
    const auto w = combine_mis(p);
    CHECK(w[0] == doctest::Approx(0.25));
    CHECK(w[1] == doctest::Approx(0.75));
    CHECK(w[2] == 0.0);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(combine_mis(std::vector<double>{0.0, 0.0}), Error);
    CHECK_THROWS_AS(combine_mis(std::vector<double>{-1.0, 2.0}), Error);
}

TEST_CASE("blend weight") {
    const double sigma = 10e-6;
    const CoherenceKernel k(sigma);
    const std::vector<ScratchSegment> line{{{-1e-3, 0.0}, {1e-3, 0.0}, 2e-6, 0.1e-6}};
    CHECK(blend_weight(line, k, {0.0, 0.0}) == doctest::Approx(2e-6 / (std::sqrt(2 * kPi) * sigma)));
    CHECK(blend_weight(line, k, {0.0, 20e-6}) ==
          doctest::Approx(2e-6 / (std::sqrt(2 * kPi) * sigma) * std::exp(-2.0)));
    CHECK(blend_weight({}, k, {}) == 0.0);
    std::vector<ScratchSegment> many(200, line[0]);
    CHECK(blend_weight(many, k, {}) == 1.0);
}

TEST_CASE("microfacet model against a reference") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto wi = polar(1.5 * u(rng), 6.28 * u(rng));
        const auto wo = polar(1.5 * u(rng), 6.28 * u(rng));
        const double alpha = 0.05 + 0.9 * u(rng), f0 = u(rng);
        const double ref = oracle::ggx_reference({wi.alpha, wi.beta, wi.gamma}, {wo.alpha, wo.beta, wo.gamma}, alpha, f0);
        CHECK(eval_ggx(wi, wo, {alpha}, f0) == doctest::Approx(ref).epsilon(1e-10));
    }
    CHECK(eval_ggx(polar(0.3, 0.0), DirectionCosines{0.0, 0.0, -1.0}, {0.3}, 1.0) == 0.0);
}

TEST_CASE("microfacet energy stays below one and sampling is consistent") {
    for (double theta : {0.0, 0.8, 1.4}) {
        for (double alpha : {0.1, 0.5}) {
            const auto wi = polar(theta, 0.2);
            const double e = hemisphere(
                [&](const DirectionCosines& d) { return eval_ggx(wi, d, {alpha}, 1.0) * d.gamma; }, 800);
            CHECK(e <= 1.0 + 1e-3);
            if (theta == 0.0 && alpha == 0.1) CHECK(e > 0.98);

            Rng rng(6);
            double mc = 0.0;
            const int n = 200000;
            for (int i = 0; i < n; ++i) {
                const auto s = sample_ggx(wi, {alpha}, rng);
                if (s) mc += eval_ggx(wi, s->omega_o, {alpha}, 1.0) * s->omega_o.gamma / s->pdf;
            }
            CHECK(mc / n == doctest::Approx(e).epsilon(0.02));
        }
    }
}

TEST_CASE("mixture pdf is the selection-weighted sum") {
    const CoherenceKernel k(5e-6);
    const std::vector<ScratchSegment> c{{{-20e-6, 0}, {20e-6, 0}, 1e-6, 0.1e-6},
                                        {{0, -20e-6}, {3e-6, 20e-6}, 1e-6, 0.1e-6}};
    MixtureSampler::Config cfg;
    cfg.base_weight = 1.0;
    cfg.scratch_weight = 2.0;
    cfg.ggx_weight = 1.0;
    const MixtureSampler m(c, k, {}, 0.5e-6, cfg);
    CHECK(m.selection()[0] == doctest::Approx(0.25));
    CHECK(m.selection()[1] == doctest::Approx(0.5));
    const auto wi = polar(0.4, 0.1), wo = polar(0.5, 3.0);
    const auto p = m.strategy_pdfs(wi, wo);
    CHECK(m.pdf(wi, wo) == doctest::Approx(0.25 * p[0] + 0.5 * p[1] + 0.25 * p[2]));

    const MixtureSampler no_scratch({}, k, {}, 0.5e-6, cfg);
    CHECK(no_scratch.selection()[1] == 0.0);
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto s = m.sample(wi, rng);
        if (s) CHECK(s->pdf == doctest::Approx(m.pdf(wi, s->omega_o)));
    }
}

}
