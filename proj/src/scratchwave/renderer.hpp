#pragma once

#include <optional>
#include <vector>

#include "scratchwave/image_io.hpp"
#include "scratchwave/scene.hpp"

namespace scratchwave {

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
};

struct Hit {
    int patch = -1;
    double t = 0.0;
    Vec3 point;
    Vec2 uv;  // patch coordinates (meters)
};

struct PixelFootprint {
    Vec3 hit;
    Vec2 x0;
    double extent_x = 0.0;  // patch-plane distance to the next pixel column (meters)
    double extent_y = 0.0;  // and to the next row
};

// Pinhole camera mapping continuous pixel coordinates (x right, y down) to rays.
class CameraModel {
public:
    CameraModel(const Camera& camera, int width, int height);
    Ray ray(double px, double py) const;

private:
    Vec3 origin_;
    Vec3 forward_;
    Vec3 right_;
    Vec3 up_;
    double half_h_ = 0.0;
    double half_w_ = 0.0;
    int width_ = 1;
    int height_ = 1;
};

// Ray differentials through the neighboring pixel corners projected onto the
// hit plane.
PixelFootprint compute_footprint(const CameraModel& camera, int px, int py, const Hit& hit, const Patch& patch);

class Renderer {
public:
    explicit Renderer(const SceneDescription& scene);

    Image render() const;

    std::optional<Hit> intersect(const Ray& ray, double t_max = INFINITY) const;
    // Hit of the ray through the pixel center.
    std::optional<Hit> primary_hit(int px, int py) const;
    const CameraModel& camera() const { return camera_; }
    const SceneDescription& scene() const { return scene_; }
    const SegmentBvh& bvh(int patch) const { return bvhs_[static_cast<size_t>(patch)]; }

    // SVBRDF of a patch at patch point x0 for local directions.
    double brdf(int patch, Vec2 x0, std::span<const ScratchSegment> candidates, const DirectionCosines& wi,
                const DirectionCosines& wo, double lambda) const;
    // Radiance toward the ray origin at one wavelength.
    double trace(const Ray& ray, double lambda, Rng& rng) const;

private:
    struct Frame {
        Vec3 u, v, n;
    };
    DirectionCosines to_local(int patch, Vec3 d) const;
    Vec3 to_world(int patch, const DirectionCosines& d) const;
    bool occluded(Vec3 origin, Vec3 dir, double t_max) const;
    void render_pixel(int px, int py, float* out) const;

    SceneDescription scene_;
    CameraModel camera_;
    std::vector<SegmentBvh> bvhs_;
    std::vector<Frame> frames_;
};

// Convenience wrapper: validate, render.
Image render(const SceneDescription& scene);

}  // namespace scratchwave
