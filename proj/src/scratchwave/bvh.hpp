#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scratchwave/scratch.hpp"

namespace scratchwave {

struct Aabb {
    Vec2 min;
    Vec2 max;

    void extend(const Aabb& o);
    bool contains(const Aabb& o) const;
    double distance_squared(Vec2 p) const;
};

// Flattened hierarchy in depth-first order. On a miss (or after a leaf),
// traversal continues at `skip`; on a hit of an inner node it continues at
// the next array slot, which is the node's first child.
struct BvhNode {
    Aabb box;
    std::uint32_t skip = 0;
    std::int32_t segment = -1;  // index into the segment array for leaves, -1 otherwise
};

struct BvhBuildOptions {
    // Segments longer than split_factor x mean length are cut into equal
    // parametric chunks, at most split_budget per segment.
    double split_factor = 4.0;
    int split_budget = 8;
};

struct QueryStats {
    std::uint64_t nodes_visited = 0;
    std::uint64_t leaf_tests = 0;
};

class SegmentBvh {
public:
    SegmentBvh() = default;
    SegmentBvh(std::span<const ScratchSegment> segments, BvhBuildOptions options = {});

    // Indices (into the build segment array) whose centerline lies within
    // `radius` of `center`, sorted and unique.
    std::vector<std::uint32_t> query_disc(Vec2 center, double radius, QueryStats* stats = nullptr) const;
    void query_disc(Vec2 center, double radius, std::vector<std::uint32_t>& out, QueryStats* stats = nullptr) const;

    std::span<const BvhNode> nodes() const { return nodes_; }
    std::span<const ScratchSegment> segments() const { return segments_; }
    bool empty() const { return nodes_.empty(); }

private:
    std::vector<ScratchSegment> segments_;
    std::vector<BvhNode> nodes_;
};

SegmentBvh build_bvh(std::span<const ScratchSegment> segments, BvhBuildOptions options = {});

// Distance from p to the segment [a, b].
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

// Reference result: exhaustive scan.
std::vector<std::uint32_t> brute_force_disc(std::span<const ScratchSegment> segments, Vec2 center, double radius);

}  // namespace scratchwave
