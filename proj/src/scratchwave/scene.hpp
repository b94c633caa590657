#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scratchwave/bvh.hpp"
#include "scratchwave/diffraction.hpp"
#include "scratchwave/sampling.hpp"
#include "scratchwave/spectral.hpp"

namespace scratchwave {

struct Camera {
    Vec3 position{0.0, 0.0, 1.0};
    Vec3 look_at{0.0, 0.0, 0.0};
    Vec3 up{0.0, 1.0, 0.0};
    double vfov_deg = 40.0;
};

enum class LightKind { Directional, Point, Environment };

struct Light {
    LightKind kind = LightKind::Directional;
    Vec3 direction{0.0, 0.0, 1.0};  // unit, from the scene toward the light
    Vec3 position;
    double intensity = 1.0;  // irradiance (directional), W/sr (point), radiance (environment)
};

enum class BaseModel { Specular, Ggx };

struct SurfaceMaterial {
    MaterialParams params;
    BaseModel base = BaseModel::Specular;
    GgxParams ggx;
    VmfParams vmf;
    EvalOptions options;
};

// Planar rectangle with its own scratch pattern in (u, v) patch coordinates,
// origin at the center. Only the +normal side reflects.
struct Patch {
    Vec3 center;
    Vec3 u_axis{1.0, 0.0, 0.0};
    Vec3 v_axis{0.0, 1.0, 0.0};
    double half_u = 1e-3;
    double half_v = 1e-3;
    double sigma = 10e-6;
    SurfaceMaterial material;
    std::vector<ScratchSegment> segments;

    Vec3 normal() const { return normalize(cross(u_axis, v_axis)); }
};

struct RenderSettings {
    int width = 128;
    int height = 128;
    int spp = 16;
    WavelengthMode mode = WavelengthMode::Rgb;
    int depth = 2;
    std::uint64_t seed = 0;
    int threads = 0;  // 0: hardware concurrency
    double exposure = 1.0;
};

struct SceneDescription {
    Camera camera;
    std::vector<Light> lights;
    std::vector<Patch> patches;
    RenderSettings settings;
};

// Throws ErrorCode::Validation with every offending field listed.
void validate(const SceneDescription& scene);

// JSON scene; pattern files resolve relative to `base_dir`.
SceneDescription parse_scene(const std::string& text, const std::filesystem::path& base_dir = {});
SceneDescription load_scene(const std::filesystem::path& path);

}  // namespace scratchwave
