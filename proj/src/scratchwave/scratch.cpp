#include "scratchwave/scratch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "scratchwave/error.hpp"

namespace scratchwave {

void validate(const ScratchSegment& s) {
    if (!(s.length() > 0.0)) {
        fail(ErrorCode::DegenerateSegment, "segment " + std::to_string(s.id) + " has zero length");
    }
    if (!(s.width > 0.0)) {
        fail(ErrorCode::InvalidArgument, "segment " + std::to_string(s.id) + " has non-positive width");
    }
    if (!(s.depth >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "segment " + std::to_string(s.id) + " has negative depth");
    }
}

ScratchFrame scratch_frame(const ScratchSegment& segment) {
    const Vec2 d = segment.p1 - segment.p0;
    const double len = length(d);
    if (!(len > 0.0)) fail(ErrorCode::DegenerateSegment, "degenerate segment");
    ScratchFrame f;
    f.t_hat = {d.x / len, d.y / len, 0.0};
    f.n_hat = {0.0, 0.0, 1.0};
    f.b_hat = cross(f.n_hat, f.t_hat);
    return f;
}

Vec3 to_scratch_space(const ScratchFrame& frame, Vec2 x0, Vec3 v, VectorKind kind) {
    if (kind == VectorKind::Point) v = v - Vec3{x0.x, x0.y, 0.0};
    return {dot(frame.t_hat, v), dot(frame.b_hat, v), dot(frame.n_hat, v)};
}

Vec3 from_scratch_space(const ScratchFrame& frame, Vec2 x0, Vec3 v, VectorKind kind) {
    Vec3 w = frame.t_hat * v.x + frame.b_hat * v.y + frame.n_hat * v.z;
    if (kind == VectorKind::Point) w = w + Vec3{x0.x, x0.y, 0.0};
    return w;
}

std::vector<ScratchSegment> generate_grating(int count, double spacing, double length, double width,
                                             double depth, ProfileKind profile) {
    if (count < 1) fail(ErrorCode::InvalidArgument, "grating count must be >= 1");
    if (!(spacing > 0.0)) fail(ErrorCode::InvalidArgument, "grating spacing must be positive");
    if (!(length > 0.0)) fail(ErrorCode::InvalidArgument, "grating length must be positive");
    std::vector<ScratchSegment> out;
    out.reserve(static_cast<size_t>(count));
    const double mean = 0.5 * (count - 1) * spacing;
    for (int k = 0; k < count; ++k) {
        const double y = k * spacing - mean;
        ScratchSegment s{{-0.5 * length, y}, {0.5 * length, y}, width, depth, profile, k};
        validate(s);
        out.push_back(s);
    }
    return out;
}

namespace {

double draw(std::mt19937_64& rng, UniformRange r) {
    if (r.hi <= r.lo) return r.lo;
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

std::vector<ScratchSegment> generate_random(const RandomPatternSpec& spec, std::mt19937_64& rng) {
    if (!(spec.density >= 0.0)) fail(ErrorCode::InvalidArgument, "density must be >= 0");
    std::int64_t count = 0;
    if (spec.exact_count) {
        count = std::max<std::int64_t>(*spec.exact_count, 0);
    } else {
        const double mean_count = spec.density * spec.region.area();
        if (!(mean_count > 0.0)) return {};
        count = std::poisson_distribution<std::int64_t>(mean_count)(rng);
    }
    std::vector<ScratchSegment> out;
    out.reserve(static_cast<size_t>(count));
    std::uniform_real_distribution<double> ux(spec.region.min.x, spec.region.max.x);
    std::uniform_real_distribution<double> uy(spec.region.min.y, spec.region.max.y);
    std::uniform_real_distribution<double> angle(0.0, kPi);
    for (std::int64_t k = 0; k < count; ++k) {
        const Vec2 c{ux(rng), uy(rng)};
        const double phi = angle(rng);
        const double len = std::max(draw(rng, spec.length), 1e-9);
        const Vec2 half{0.5 * len * std::cos(phi), 0.5 * len * std::sin(phi)};
        ScratchSegment s{c - half, c + half, std::max(draw(rng, spec.width), kMinScratchWidth),
                         std::max(draw(rng, spec.depth), 0.0), spec.profile, k};
        out.push_back(s);
    }
    return out;
}

int ring_segment_count(double radius, double tol) {
    if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "ring radius must be positive");
    if (!(tol > 0.0) || tol >= radius) return 3;
    // pi / sqrt(2 tol / r) bounds the exact sagitta condition from above.
    const double n = std::ceil(kPi / std::sqrt(2.0 * tol / radius));
    return std::max(3, static_cast<int>(n));
}

std::vector<ScratchSegment> generate_concentric(const ConcentricSpec& spec) {
    if (!(spec.pitch > 0.0)) fail(ErrorCode::InvalidArgument, "pitch must be positive");
    std::vector<ScratchSegment> out;
    std::int64_t id = 0;
    for (int ring = 0; ring < spec.turns; ++ring) {
        const double r = spec.inner_radius + ring * spec.pitch;
        const int n = ring_segment_count(r, spec.chord_tolerance);
        for (int i = 0; i < n; ++i) {
            const double a0 = 2.0 * kPi * i / n;
            const double a1 = 2.0 * kPi * (i + 1) / n;
            const Vec2 p0 = spec.center + Vec2{r * std::cos(a0), r * std::sin(a0)};
            const Vec2 p1 = spec.center + Vec2{r * std::cos(a1), r * std::sin(a1)};
            out.push_back({p0, p1, spec.width, spec.depth, spec.profile, id++});
        }
    }
    return out;
}

namespace {

// Ken Perlin's reference permutation.
constexpr std::array<std::uint8_t, 256> kPerm = {
    151, 160, 137, 91,  90,  15,  131, 13,  201, 95,  96,  53,  194, 233, 7,   225, 140, 36,  103, 30,
    69,  142, 8,   99,  37,  240, 21,  10,  23,  190, 6,   148, 247, 120, 234, 75,  0,   26,  197, 62,
    94,  252, 219, 203, 117, 35,  11,  32,  57,  177, 33,  88,  237, 149, 56,  87,  174, 20,  125, 136,
    171, 168, 68,  175, 74,  165, 71,  134, 139, 48,  27,  166, 77,  146, 158, 231, 83,  111, 229, 122,
    60,  211, 133, 230, 220, 105, 92,  41,  55,  46,  245, 40,  244, 102, 143, 54,  65,  25,  63,  161,
    1,   216, 80,  73,  209, 76,  132, 187, 208, 89,  18,  169, 200, 196, 135, 130, 116, 188, 159, 86,
    164, 100, 109, 198, 173, 186, 3,   64,  52,  217, 226, 250, 124, 123, 5,   202, 38,  147, 118, 126,
    255, 82,  85,  212, 207, 206, 59,  227, 47,  16,  58,  17,  182, 189, 28,  42,  223, 183, 170, 213,
    119, 248, 152, 2,   44,  154, 163, 70,  221, 153, 101, 155, 167, 43,  172, 9,   129, 22,  39,  253,
    19,  98,  108, 110, 79,  113, 224, 232, 178, 185, 112, 104, 218, 246, 97,  228, 251, 34,  242, 193,
    238, 210, 144, 12,  191, 179, 162, 241, 81,  51,  145, 235, 249, 14,  239, 107, 49,  192, 214, 31,
    181, 199, 106, 157, 184, 84,  204, 176, 115, 121, 50,  45,  127, 4,   150, 254, 138, 236, 205, 93,
    222, 114, 67,  29,  24,  72,  243, 141, 128, 195, 78,  66,  215, 61,  156, 180};

constexpr std::array<std::array<double, 2>, 8> kGrad2 = {
    {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

int perm(int i) { return kPerm[static_cast<size_t>(i & 255)]; }

double corner(int gi, double x, double y) {
    double t = 0.5 - x * x - y * y;
    if (t < 0.0) return 0.0;
    t *= t;
    const auto& g = kGrad2[static_cast<size_t>(gi)];
    return t * t * (g[0] * x + g[1] * y);
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Row of the noise plane assigned to scratch k.
double noise_row(std::int64_t k, std::uint64_t salt) {
    const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k) ^ salt);
    return static_cast<double>(h >> 40) / static_cast<double>(1ULL << 24) * 1024.0;
}

}  // namespace

double simplex_noise(double xin, double yin) {
    const double f2 = 0.5 * (std::sqrt(3.0) - 1.0);
    const double g2 = (3.0 - std::sqrt(3.0)) / 6.0;
    const double s = (xin + yin) * f2;
    const int i = static_cast<int>(std::floor(xin + s));
    const int j = static_cast<int>(std::floor(yin + s));
    const double t = (i + j) * g2;
    const double x0 = xin - (i - t);
    const double y0 = yin - (j - t);
    const int i1 = x0 > y0 ? 1 : 0;
    const int j1 = x0 > y0 ? 0 : 1;
    const double x1 = x0 - i1 + g2;
    const double y1 = y0 - j1 + g2;
    const double x2 = x0 - 1.0 + 2.0 * g2;
    const double y2 = y0 - 1.0 + 2.0 * g2;
    const int gi0 = perm(i + perm(j)) % 8;
    const int gi1 = perm(i + i1 + perm(j + j1)) % 8;
    const int gi2 = perm(i + 1 + perm(j + 1)) % 8;
    const double n = 70.0 * (corner(gi0, x0, y0) + corner(gi1, x1, y1) + corner(gi2, x2, y2));
    return std::clamp(n, -1.0, 1.0);
}

WidthDepth vary_parameters(const ScratchSegment& segment, const VariationSpec& spec, double t) {
    if (spec.amplitude_w < 0.0 || spec.amplitude_d < 0.0) {
        fail(ErrorCode::InvalidArgument, "variation amplitudes must be >= 0");
    }
    WidthDepth out{segment.width, segment.depth};
    const double u = t * spec.frequency;
    if (spec.amplitude_w > 0.0) {
        out.width += spec.amplitude_w * simplex_noise(u, noise_row(segment.id, 0x5743ULL));
    }
    if (spec.amplitude_d > 0.0) {
        out.depth += spec.amplitude_d * simplex_noise(u, noise_row(segment.id, 0x4448ULL));
    }
    out.width = std::max(out.width, kMinScratchWidth);
    out.depth = std::max(out.depth, 0.0);
    return out;
}

std::vector<ScratchSegment> subdivide_varied(const ScratchSegment& segment, const VariationSpec& spec,
                                             double step) {
    const double len = segment.length();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / step - 1e-12)));
    std::vector<ScratchSegment> out;
    out.reserve(static_cast<size_t>(pieces));
    const Vec2 d = segment.p1 - segment.p0;
    for (int i = 0; i < pieces; ++i) {
        const double a = static_cast<double>(i) / pieces;
        const double b = static_cast<double>(i + 1) / pieces;
        ScratchSegment s = segment;
        s.p0 = segment.p0 + d * a;
        s.p1 = segment.p0 + d * b;
        const auto wd = vary_parameters(segment, spec, 0.5 * (a + b) * len);
        s.width = wd.width;
        s.depth = wd.depth;
        out.push_back(s);
    }
    return out;
}

Region pattern_bounds(std::span<const ScratchSegment> segments) {
    if (segments.empty()) return {};
    Region r{segments[0].p0, segments[0].p0};
    for (const auto& s : segments) {
        for (Vec2 p : {s.p0, s.p1}) {
            r.min = {std::min(r.min.x, p.x), std::min(r.min.y, p.y)};
            r.max = {std::max(r.max.x, p.x), std::max(r.max.y, p.y)};
        }
    }
    return r;
}

}  // namespace scratchwave
