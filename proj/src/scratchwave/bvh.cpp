#include "scratchwave/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scratchwave/error.hpp"

namespace scratchwave {

void Aabb::extend(const Aabb& o) {
    min = {std::min(min.x, o.min.x), std::min(min.y, o.min.y)};
    max = {std::max(max.x, o.max.x), std::max(max.y, o.max.y)};
}

bool Aabb::contains(const Aabb& o) const {
    return min.x <= o.min.x && min.y <= o.min.y && max.x >= o.max.x && max.y >= o.max.y;
}

double Aabb::distance_squared(Vec2 p) const {
    const double dx = std::max({min.x - p.x, 0.0, p.x - max.x});
    const double dy = std::max({min.y - p.y, 0.0, p.y - max.y});
    return dx * dx + dy * dy;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return length(p - (a + d * t));
}

std::vector<std::uint32_t> brute_force_disc(std::span<const ScratchSegment> segments, Vec2 center, double radius) {
    std::vector<std::uint32_t> out;
    for (size_t i = 0; i < segments.size(); ++i) {
        if (point_segment_distance(center, segments[i].p0, segments[i].p1) <= radius) {
            out.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return out;
}

namespace {

struct Reference {
    Aabb box;
    std::uint32_t segment;
    std::uint32_t code;
};

Aabb chunk_box(Vec2 a, Vec2 b, double pad) {
    return {{std::min(a.x, b.x) - pad, std::min(a.y, b.y) - pad}, {std::max(a.x, b.x) + pad, std::max(a.y, b.y) + pad}};
}

std::uint32_t spread_bits(std::uint32_t v) {
    v &= 0xffffu;
    v = (v | (v << 8)) & 0x00ff00ffu;
    v = (v | (v << 4)) & 0x0f0f0f0fu;
    v = (v | (v << 2)) & 0x33333333u;
    v = (v | (v << 1)) & 0x55555555u;
    return v;
}

std::uint32_t quantize(double v, double lo, double hi) {
    if (!(hi > lo)) return 0;
    const double q = (v - lo) / (hi - lo) * 65535.0;
    return static_cast<std::uint32_t>(std::clamp(q, 0.0, 65535.0));
}

class Builder {
public:
    Builder(std::vector<Reference>& refs, std::vector<BvhNode>& nodes) : refs_(refs), nodes_(nodes) {}

    // Emits the subtree for refs_[first, last) in depth-first order.
    void emit(size_t first, size_t last) {
        const size_t index = nodes_.size();
        nodes_.emplace_back();
        if (last - first == 1) {
            nodes_[index].box = refs_[first].box;
            nodes_[index].segment = static_cast<std::int32_t>(refs_[first].segment);
        } else {
            const size_t split = find_split(first, last);
            emit(first, split);
            emit(split, last);
            Aabb box = refs_[first].box;
            for (size_t i = first + 1; i < last; ++i) box.extend(refs_[i].box);
            nodes_[index].box = box;
        }
        nodes_[index].skip = static_cast<std::uint32_t>(nodes_.size());
    }

private:
    // Highest differing Morton bit between the range ends; falls back to
    // the median when all codes are equal.
    size_t find_split(size_t first, size_t last) const {
        const std::uint32_t a = refs_[first].code;
        const std::uint32_t b = refs_[last - 1].code;
        if (a == b) return (first + last) / 2;
        const int prefix = __builtin_clz(a ^ b);
        size_t split = first;
        size_t step = last - 1 - first;
        do {
            step = (step + 1) >> 1;
            const size_t probe = split + step;
            if (probe < last - 1 && __builtin_clz(a ^ refs_[probe].code) > prefix) split = probe;
        } while (step > 1);
        return split + 1;
    }

    std::vector<Reference>& refs_;
    std::vector<BvhNode>& nodes_;
};

}  // namespace

SegmentBvh::SegmentBvh(std::span<const ScratchSegment> segments, BvhBuildOptions options)
    : segments_(segments.begin(), segments.end()) {
    if (segments_.empty()) return;
    double mean_len = 0.0;
    for (const auto& s : segments_) mean_len += s.length();
    mean_len /= static_cast<double>(segments_.size());
    const double threshold = options.split_factor * mean_len;
    const int budget = std::max(1, options.split_budget);

    std::vector<Reference> refs;
    refs.reserve(segments_.size());
    for (size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[i];
        const double pad = 0.5 * s.width;
        const Aabb whole = chunk_box(s.p0, s.p1, pad);
        const double diag = length(whole.max - whole.min);
        int chunks = 1;
        if (diag > threshold && threshold > 0.0) {
            chunks = std::min(budget, static_cast<int>(std::ceil(diag / threshold)));
        }
        const Vec2 d = s.p1 - s.p0;
        for (int c = 0; c < chunks; ++c) {
            const Vec2 a = s.p0 + d * (static_cast<double>(c) / chunks);
            const Vec2 b = s.p0 + d * (static_cast<double>(c + 1) / chunks);
            refs.push_back({chunk_box(a, b, pad), static_cast<std::uint32_t>(i), 0});
        }
    }

    Aabb bounds = refs.front().box;
    for (const auto& r : refs) bounds.extend(r.box);
    for (auto& r : refs) {
        const Vec2 c = (r.box.min + r.box.max) * 0.5;
        r.code = spread_bits(quantize(c.x, bounds.min.x, bounds.max.x)) |
                 (spread_bits(quantize(c.y, bounds.min.y, bounds.max.y)) << 1);
    }
    std::stable_sort(refs.begin(), refs.end(), [](const Reference& a, const Reference& b) { return a.code < b.code; });

    nodes_.reserve(2 * refs.size());
    Builder(refs, nodes_).emit(0, refs.size());
}

void SegmentBvh::query_disc(Vec2 center, double radius, std::vector<std::uint32_t>& out, QueryStats* stats) const {
    out.clear();
    if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "query radius must be positive");
    const double r2 = radius * radius;
    const auto n = static_cast<std::uint32_t>(nodes_.size());
    std::uint32_t i = 0;
    while (i < n) {
        const BvhNode& node = nodes_[i];
        if (stats) ++stats->nodes_visited;
        if (node.box.distance_squared(center) > r2) {
            i = node.skip;
            continue;
        }
        if (node.segment >= 0) {
            if (stats) ++stats->leaf_tests;
            const auto& s = segments_[static_cast<size_t>(node.segment)];
            if (point_segment_distance(center, s.p0, s.p1) <= radius) out.push_back(static_cast<std::uint32_t>(node.segment));
        }
        ++i;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<std::uint32_t> SegmentBvh::query_disc(Vec2 center, double radius, QueryStats* stats) const {
    std::vector<std::uint32_t> out;
    query_disc(center, radius, out, stats);
    return out;
}

SegmentBvh build_bvh(std::span<const ScratchSegment> segments, BvhBuildOptions options) {
    return SegmentBvh(segments, options);
}

}  // namespace scratchwave
