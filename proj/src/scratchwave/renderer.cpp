#include "scratchwave/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

#include "scratchwave/error.hpp"

namespace scratchwave {

namespace {

constexpr int kTile = 16;
constexpr int kSpectralStrata = 16;
constexpr double kRayOffset = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

CameraModel::CameraModel(const Camera& c, int width, int height)
    : origin_(c.position), width_(width), height_(height) {
    forward_ = normalize(c.look_at - c.position);
    right_ = normalize(cross(forward_, c.up));
    up_ = cross(right_, forward_);
    half_h_ = std::tan(0.5 * c.vfov_deg * kPi / 180.0);
    half_w_ = half_h_ * width / height;
}

Ray CameraModel::ray(double px, double py) const {
    const double sx = (2.0 * px / width_ - 1.0) * half_w_;
    const double sy = (1.0 - 2.0 * py / height_) * half_h_;
    return {origin_, normalize(forward_ + right_ * sx + up_ * sy)};
}

PixelFootprint compute_footprint(const CameraModel& camera, int px, int py, const Hit& hit, const Patch& patch) {
    const Vec3 n = patch.normal();
    auto on_plane = [&](const Ray& r) {
        const double denom = dot(r.dir, n);
        if (std::abs(denom) < 1e-15) return hit.point;
        const double t = dot(patch.center - r.origin, n) / denom;
        return r.origin + r.dir * t;
    };
    const Vec3 p = on_plane(camera.ray(px + 0.5, py + 0.5));
    const Vec3 px1 = on_plane(camera.ray(px + 1.5, py + 0.5));
    const Vec3 py1 = on_plane(camera.ray(px + 0.5, py + 1.5));
    PixelFootprint f;
    f.hit = hit.point;
    f.x0 = hit.uv;
    f.extent_x = length(px1 - p);
    f.extent_y = length(py1 - p);
    return f;
}

Renderer::Renderer(const SceneDescription& scene)
    : scene_(scene), camera_(scene.camera, scene.settings.width, scene.settings.height) {
    for (const auto& p : scene_.patches) {
        bvhs_.emplace_back(p.segments);
        frames_.push_back({p.u_axis, p.v_axis, p.normal()});
    }
}

std::optional<Hit> Renderer::intersect(const Ray& ray, double t_max) const {
    std::optional<Hit> best;
    for (size_t i = 0; i < scene_.patches.size(); ++i) {
        const Patch& p = scene_.patches[i];
        const Frame& f = frames_[i];
        const double denom = dot(ray.dir, f.n);
        if (std::abs(denom) < 1e-15) continue;
        const double t = dot(p.center - ray.origin, f.n) / denom;
        if (!(t > 0.0) || t >= t_max || (best && t >= best->t)) continue;
        const Vec3 q = ray.origin + ray.dir * t;
        const Vec3 d = q - p.center;
        const Vec2 uv{dot(d, f.u), dot(d, f.v)};
        if (std::abs(uv.x) > p.half_u || std::abs(uv.y) > p.half_v) continue;
        best = Hit{static_cast<int>(i), t, q, uv};
    }
    return best;
}

std::optional<Hit> Renderer::primary_hit(int px, int py) const { return intersect(camera_.ray(px + 0.5, py + 0.5)); }

DirectionCosines Renderer::to_local(int patch, Vec3 d) const {
    const Frame& f = frames_[static_cast<size_t>(patch)];
    return {dot(d, f.u), dot(d, f.v), dot(d, f.n)};
}

Vec3 Renderer::to_world(int patch, const DirectionCosines& d) const {
    const Frame& f = frames_[static_cast<size_t>(patch)];
    return normalize(f.u * d.alpha + f.v * d.beta + f.n * d.gamma);
}

bool Renderer::occluded(Vec3 origin, Vec3 dir, double t_max) const { return intersect({origin, dir}, t_max).has_value(); }

double Renderer::brdf(int patch, Vec2 x0, std::span<const ScratchSegment> candidates, const DirectionCosines& wi,
                      const DirectionCosines& wo, double lambda) const {
    const Patch& p = scene_.patches[static_cast<size_t>(patch)];
    const SurfaceMaterial& m = p.material;
    const CoherenceKernel kernel(p.sigma);
    if (m.base == BaseModel::Specular) {
        return eval_brdf_candidates(candidates, x0, wi, wo, lambda, kernel, m.params, m.options).f_r;
    }
    const double c = blend_weight(candidates, kernel, x0);
    const double f_ggx = eval_ggx(wi, wo, m.ggx, m.params.fresnel.f0(lambda));
    if (c <= 0.0) return f_ggx;
    MaterialParams scratch = m.params;
    scratch.a_base = 0.0;
    scratch.a_mask = 1.0;
    scratch.a_scratch = 1.0;
    const double f_s = eval_brdf_candidates(candidates, x0, wi, wo, lambda, kernel, scratch, m.options).f_r;
    return (1.0 - c) * f_ggx + c * f_s;
}

double Renderer::trace(const Ray& primary, double lambda, Rng& rng) const {
    const Light* env = nullptr;
    for (const auto& l : scene_.lights) {
        if (l.kind == LightKind::Environment) env = &l;
    }
    std::optional<Hit> hit = intersect(primary);
    if (!hit) return env ? env->intensity : 0.0;

    Ray ray = primary;
    double throughput = 1.0;
    double radiance = 0.0;
    std::vector<std::uint32_t> ids;
    std::vector<ScratchSegment> candidates;
    for (int bounce = 0; bounce < scene_.settings.depth; ++bounce) {
        const int pi = hit->patch;
        const Patch& patch = scene_.patches[static_cast<size_t>(pi)];
        const DirectionCosines wo = to_local(pi, -ray.dir);
        if (wo.gamma <= 0.0) break;
        const Vec3 n = frames_[static_cast<size_t>(pi)].n;
        const Vec3 origin = hit->point + n * kRayOffset;
        const Vec2 x0 = hit->uv;
        const CoherenceKernel kernel(patch.sigma);

        candidates.clear();
        const SegmentBvh& bvh = bvhs_[static_cast<size_t>(pi)];
        if (!bvh.empty()) {
            bvh.query_disc(x0, default_query_radius(kernel), ids);
            for (auto id : ids) candidates.push_back(patch.segments[id]);
        }

        for (const auto& light : scene_.lights) {
            Vec3 dir;
            double irradiance = 0.0;
            double dist = INFINITY;
            if (light.kind == LightKind::Directional) {
                dir = light.direction;
                irradiance = light.intensity;
            } else if (light.kind == LightKind::Point) {
                const Vec3 d = light.position - hit->point;
                dist = length(d);
                if (!(dist > 0.0)) continue;
                dir = d * (1.0 / dist);
                irradiance = light.intensity / (dist * dist);
            } else {
                continue;
            }
            const DirectionCosines wi = to_local(pi, dir);
            if (wi.gamma <= 0.0 || irradiance <= 0.0) continue;
            if (occluded(origin, dir, dist)) continue;
            radiance += throughput * brdf(pi, x0, candidates, wi, wo, lambda) * irradiance * wi.gamma;
        }

        // Without an environment light a BRDF sample only matters if the path
        // may continue.
        if (!env && bounce + 1 >= scene_.settings.depth) break;

        MixtureSampler::Config cfg;
        cfg.vmf = patch.material.vmf;
        cfg.ggx = patch.material.ggx;
        if (patch.material.base == BaseModel::Ggx) {
            const double c = blend_weight(candidates, kernel, x0);
            cfg.base_weight = 0.1 * c;
            cfg.scratch_weight = c;
            cfg.ggx_weight = 1.0 - c;
        }
        const MixtureSampler sampler(candidates, kernel, x0, lambda, cfg);

        if (env && env->intensity > 0.0) {
            // Cosine-weighted light sample, balance-weighted against the BRDF sampler.
            const double r = std::sqrt(uniform01(rng));
            const double phi = 2.0 * kPi * uniform01(rng);
            const DirectionCosines wi{r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - r * r))};
            const double pdf_light = wi.gamma / kPi;
            if (pdf_light > 0.0) {
                const double pdf_brdf = sampler.pdf(wo, wi);
                const double w = pdf_light / (pdf_light + pdf_brdf);
                const Vec3 dir = to_world(pi, wi);
                if (!occluded(origin, dir, INFINITY)) {
                    radiance += throughput * brdf(pi, x0, candidates, wi, wo, lambda) * env->intensity * wi.gamma * w / pdf_light;
                }
            }
        }

        const auto rec = sampler.sample(wo, rng);
        if (!rec) break;
        const DirectionCosines wi = rec->omega_o;
        const double f = brdf(pi, x0, candidates, wi, wo, lambda);
        if (!(f > 0.0)) break;
        throughput *= f * wi.gamma / rec->pdf;
        ray = {origin, to_world(pi, wi)};
        hit = intersect(ray);
        if (!hit) {
            if (env) {
                const double pdf_light = wi.gamma / kPi;
                radiance += throughput * env->intensity * rec->pdf / (rec->pdf + pdf_light);
            }
            break;
        }
    }
    return radiance;
}

void Renderer::render_pixel(int px, int py, float* out) const {
    const RenderSettings& s = scene_.settings;
    const std::uint64_t index = static_cast<std::uint64_t>(py) * s.width + px;
    Rng rng(splitmix64(s.seed ^ splitmix64(index)));
    double acc[3] = {0.0, 0.0, 0.0};
    if (s.mode == WavelengthMode::Rgb) {
        const double lambdas[3] = {kLambdaRed, kLambdaGreen, kLambdaBlue};
        for (int k = 0; k < s.spp; ++k) {
            const Ray ray = camera_.ray(px + uniform01(rng), py + uniform01(rng));
            for (int c = 0; c < 3; ++c) acc[c] += trace(ray, lambdas[c], rng);
        }
        for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(acc[c] / s.spp);
        return;
    }
    // One wavelength per camera sample, strata cycled from a random offset.
    const int offset = static_cast<int>(uniform01(rng) * kSpectralStrata);
    const double range_nm = (kLambdaMax - kLambdaMin) * 1e9;
    const double k = cmf_normalization() * range_nm;
    for (int i = 0; i < s.spp; ++i) {
        const Ray ray = camera_.ray(px + uniform01(rng), py + uniform01(rng));
        const double lambda = stratum_wavelength((i + offset) % kSpectralStrata, kSpectralStrata, uniform01(rng));
        const double l = trace(ray, lambda, rng);
        const ColorXYZ m = cmf(lambda);
        acc[0] += l * m.x * k;
        acc[1] += l * m.y * k;
        acc[2] += l * m.z * k;
    }
    const ColorRGB rgb = xyz_to_linear_srgb({acc[0] / s.spp, acc[1] / s.spp, acc[2] / s.spp});
    out[0] = static_cast<float>(rgb.r);
    out[1] = static_cast<float>(rgb.g);
    out[2] = static_cast<float>(rgb.b);
}

Image Renderer::render() const {
    const RenderSettings& s = scene_.settings;
    Image image(s.width, s.height);
    const int tiles_x = (s.width + kTile - 1) / kTile;
    const int tiles_y = (s.height + kTile - 1) / kTile;
    const int tiles = tiles_x * tiles_y;
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (int t = next++; t < tiles; t = next++) {
                const int x0 = (t % tiles_x) * kTile;
                const int y0 = (t / tiles_x) * kTile;
                for (int y = y0; y < std::min(y0 + kTile, s.height); ++y) {
                    for (int x = x0; x < std::min(x0 + kTile, s.width); ++x) render_pixel(x, y, image.pixel(x, y));
                }
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = tiles;
        }
    };
    int threads = s.threads > 0 ? s.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, tiles);
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return image;
}

Image render(const SceneDescription& scene) {
    validate(scene);
    return Renderer(scene).render();
}

}  // namespace scratchwave
