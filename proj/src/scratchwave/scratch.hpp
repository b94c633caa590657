#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "scratchwave/vec.hpp"

namespace scratchwave {

enum class ProfileKind { Rect, Triangle };

// A straight scratch in tangent-plane coordinates. All lengths in meters.
struct ScratchSegment {
    Vec2 p0;
    Vec2 p1;
    double width = 1e-6;
    double depth = 0.0;
    ProfileKind profile = ProfileKind::Rect;
    std::int64_t id = 0;

    Vec2 midpoint() const { return (p0 + p1) * 0.5; }
    double length() const { return scratchwave::length(p1 - p0); }

    bool operator==(const ScratchSegment&) const = default;
};

// Throws ErrorCode::InvalidArgument / DegenerateSegment on violation.
void validate(const ScratchSegment& segment);

// Orthonormal right-handed scratch frame, b = n x t, n = +z of the patch.
struct ScratchFrame {
    Vec3 t_hat;
    Vec3 b_hat;
    Vec3 n_hat{0.0, 0.0, 1.0};
};

ScratchFrame scratch_frame(const ScratchSegment& segment);

enum class VectorKind { Point, Frequency };

// Rotates world-space `v` into the scratch frame. Points are translated by
// -x0 first; frequency vectors are only rotated.
Vec3 to_scratch_space(const ScratchFrame& frame, Vec2 x0, Vec3 v, VectorKind kind);
Vec3 from_scratch_space(const ScratchFrame& frame, Vec2 x0, Vec3 v, VectorKind kind);

std::vector<ScratchSegment> generate_grating(int count, double spacing, double length, double width,
                                             double depth, ProfileKind profile);

struct Region {
    Vec2 min;
    Vec2 max;
    double area() const { return (max.x - min.x) * (max.y - min.y); }
};

struct UniformRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct RandomPatternSpec {
    double density = 0.0;  // segments per m^2
    Region region;
    UniformRange length{20e-6, 200e-6};
    UniformRange width{0.5e-6, 2e-6};
    UniformRange depth{0.05e-6, 0.3e-6};
    ProfileKind profile = ProfileKind::Rect;
    // Replaces the Poisson draw when set.
    std::optional<std::int64_t> exact_count;
};

// Poisson count, uniform midpoints inside the region, uniform orientation.
std::vector<ScratchSegment> generate_random(const RandomPatternSpec& spec, std::mt19937_64& rng);

struct ConcentricSpec {
    Vec2 center;
    double inner_radius = 100e-6;
    double pitch = 2e-6;
    int turns = 1;
    double chord_tolerance = 0.5e-6;
    double width = 1e-6;
    double depth = 0.125e-6;
    ProfileKind profile = ProfileKind::Rect;
};

// Segments per ring is the smallest n with sagitta <= tolerance, at least 3.
int ring_segment_count(double radius, double chord_tolerance);
std::vector<ScratchSegment> generate_concentric(const ConcentricSpec& spec);

struct VariationSpec {
    double amplitude_w = 0.0;  // meters
    double amplitude_d = 0.0;  // meters
    double frequency = 1e5;    // 1/m along the scratch
};

inline constexpr double kMinScratchWidth = 10e-9;

struct WidthDepth {
    double width;
    double depth;
};

// Simplex-noise modulated (W, D) at arc position t, seeded by the segment id.
WidthDepth vary_parameters(const ScratchSegment& segment, const VariationSpec& spec, double t);

// 2-D simplex noise in [-1, 1].
double simplex_noise(double x, double y);

// Splits a varied segment into pieces of length <= step with constant (W, D)
// sampled at each piece's center. Pieces keep the parent id.
std::vector<ScratchSegment> subdivide_varied(const ScratchSegment& segment, const VariationSpec& spec,
                                             double step);

// Bounding box over all endpoints; zero box for an empty pattern.
Region pattern_bounds(std::span<const ScratchSegment> segments);

}  // namespace scratchwave
