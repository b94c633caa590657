#include "scratchwave/scratchwave.h"

#include <cmath>
#include <memory>
#include <string>

#include "scratchwave/bvh.hpp"
#include "scratchwave/diffraction.hpp"
#include "scratchwave/error.hpp"
#include "scratchwave/image_io.hpp"
#include "scratchwave/oracle.hpp"
#include "scratchwave/pattern_io.hpp"
#include "scratchwave/renderer.hpp"
#include "scratchwave/scene.hpp"

namespace sw = scratchwave;

struct sw_pattern {
    std::vector<sw::ScratchSegment> segments;
};

struct sw_evaluator {
    sw::SegmentBvh bvh;
    sw::CoherenceKernel kernel;
    sw::MaterialParams material;
    sw::EvalOptions options;
};

struct sw_scene {
    sw::SceneDescription scene;
};

struct sw_image {
    sw::Image image;
};

namespace {

thread_local std::string last_error;

int status_of(sw::ErrorCode code) {
    switch (code) {
        case sw::ErrorCode::InvalidArgument: return SW_ERR_INVALID_ARGUMENT;
        case sw::ErrorCode::DegenerateSegment: return SW_ERR_DEGENERATE_SEGMENT;
        case sw::ErrorCode::ParseError: return SW_ERR_PARSE;
        case sw::ErrorCode::UnsupportedFeature: return SW_ERR_UNSUPPORTED;
        case sw::ErrorCode::BelowHorizon: return SW_ERR_BELOW_HORIZON;
        case sw::ErrorCode::Validation: return SW_ERR_VALIDATION;
        case sw::ErrorCode::Io: return SW_ERR_IO;
        case sw::ErrorCode::WindowTruncation: return SW_ERR_WINDOW_TRUNCATION;
        case sw::ErrorCode::Internal: return SW_ERR_INTERNAL;
    }
    return SW_ERR_INTERNAL;
}

int set_error(int status, const std::string& message) {
    last_error = message;
    return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return SW_OK;
    } catch (const sw::Error& e) {
        return set_error(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SW_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(SW_ERR_INTERNAL, e.what());
    }
}

#define SW_REQUIRE(cond, what) \
    if (!(cond)) return set_error(SW_ERR_INVALID_ARGUMENT, what)

sw::ProfileKind profile_of(int p) {
    if (p == SW_PROFILE_RECT) return sw::ProfileKind::Rect;
    if (p == SW_PROFILE_TRIANGLE) return sw::ProfileKind::Triangle;
    sw::fail(sw::ErrorCode::InvalidArgument, "unknown profile " + std::to_string(p));
}

sw::DirectionCosines direction(const double* v) {
    const double len = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (!(std::abs(len - 1.0) < 1e-9)) sw::fail(sw::ErrorCode::InvalidArgument, "direction must be a unit vector");
    return {v[0], v[1], v[2]};
}

}  // namespace

extern "C" {

const char* sw_last_error(void) { return last_error.c_str(); }

const char* sw_status_name(int status) {
    switch (status) {
        case SW_OK: return "ok";
        case SW_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case SW_ERR_DEGENERATE_SEGMENT: return "degenerate-segment";
        case SW_ERR_PARSE: return "parse-error";
        case SW_ERR_UNSUPPORTED: return "unsupported-feature";
        case SW_ERR_BELOW_HORIZON: return "below-horizon";
        case SW_ERR_VALIDATION: return "validation-error";
        case SW_ERR_IO: return "io-error";
        case SW_ERR_WINDOW_TRUNCATION: return "window-truncation";
        case SW_ERR_INTERNAL: return "internal-error";
        default: return "unknown";
    }
}

int sw_pattern_create(sw_pattern** out) {
    SW_REQUIRE(out, "out is null");
    return guarded([&] { *out = new sw_pattern; });
}

int sw_pattern_load(const char* path, sw_pattern** out) {
    SW_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto p = std::make_unique<sw_pattern>();
        p->segments = sw::load_pattern_file(path);
        *out = p.release();
    });
}

int sw_pattern_save(const sw_pattern* pattern, const char* path) {
    SW_REQUIRE(pattern && path, "null argument");
    return guarded([&] { sw::save_pattern_file(path, pattern->segments); });
}

int sw_pattern_add_segment(sw_pattern* pattern, const sw_segment* s) {
    SW_REQUIRE(pattern && s, "null argument");
    return guarded([&] {
        sw::ScratchSegment seg{{s->x0, s->y0}, {s->x1, s->y1}, s->width, s->depth, profile_of(s->profile),
                               static_cast<std::int64_t>(pattern->segments.size())};
        sw::validate(seg);
        pattern->segments.push_back(seg);
    });
}

int sw_pattern_size(const sw_pattern* pattern, size_t* out) {
    SW_REQUIRE(pattern && out, "null argument");
    *out = pattern->segments.size();
    return SW_OK;
}

int sw_pattern_get_segment(const sw_pattern* pattern, size_t index, sw_segment* out) {
    SW_REQUIRE(pattern && out, "null argument");
    SW_REQUIRE(index < pattern->segments.size(), "segment index out of range");
    const auto& s = pattern->segments[index];
    *out = {s.p0.x, s.p0.y, s.p1.x, s.p1.y, s.width, s.depth,
            s.profile == sw::ProfileKind::Rect ? SW_PROFILE_RECT : SW_PROFILE_TRIANGLE};
    return SW_OK;
}

int sw_pattern_generate_grating(int count, double spacing, double length, double width, double depth, int profile,
                                sw_pattern** out) {
    SW_REQUIRE(out, "out is null");
    return guarded([&] {
        auto p = std::make_unique<sw_pattern>();
        p->segments = sw::generate_grating(count, spacing, length, width, depth, profile_of(profile));
        *out = p.release();
    });
}

void sw_pattern_destroy(sw_pattern* pattern) { delete pattern; }

int sw_evaluator_create(const sw_pattern* pattern, double sigma, const sw_material* material, sw_evaluator** out) {
    SW_REQUIRE(pattern && material && out, "null argument");
    return guarded([&] {
        sw::MaterialParams m;
        m.a_base = material->a_base;
        m.a_scratch = material->a_scratch;
        m.a_mask = material->a_mask;
        m.fresnel.samples = {{550e-9, material->fresnel_f0}};
        sw::validate(m);
        *out = new sw_evaluator{sw::SegmentBvh(pattern->segments), sw::CoherenceKernel(sigma), m, {}};
    });
}

int sw_evaluator_set_coherent(sw_evaluator* evaluator, int coherent) {
    SW_REQUIRE(evaluator, "evaluator is null");
    evaluator->options.coherent = coherent != 0;
    return SW_OK;
}

int sw_eval_brdf(const sw_evaluator* e, double x, double y, const double omega_i[3], const double omega_o[3],
                 double lambda, sw_brdf_value* out) {
    SW_REQUIRE(e && omega_i && omega_o && out, "null argument");
    return guarded([&] {
        const auto r = sw::eval_brdf({x, y}, direction(omega_i), direction(omega_o), lambda, e->kernel, e->material,
                                     e->bvh, e->options);
        *out = {r.base_response.real(), r.base_response.imag(), r.scratch_response.real(), r.scratch_response.imag(),
                r.f_r};
    });
}

void sw_evaluator_destroy(sw_evaluator* evaluator) { delete evaluator; }

int sw_scene_load(const char* path, sw_scene** out) {
    SW_REQUIRE(path && out, "null argument");
    return guarded([&] {
        auto s = std::make_unique<sw_scene>();
        s->scene = sw::load_scene(path);
        *out = s.release();
    });
}

int sw_scene_set_spp(sw_scene* scene, int spp) {
    SW_REQUIRE(scene, "scene is null");
    scene->scene.settings.spp = spp;
    return SW_OK;
}

int sw_scene_set_resolution(sw_scene* scene, int width, int height) {
    SW_REQUIRE(scene, "scene is null");
    scene->scene.settings.width = width;
    scene->scene.settings.height = height;
    return SW_OK;
}

int sw_scene_set_mode(sw_scene* scene, int mode) {
    SW_REQUIRE(scene, "scene is null");
    SW_REQUIRE(mode == SW_MODE_RGB || mode == SW_MODE_SPECTRAL16, "unknown wavelength mode");
    scene->scene.settings.mode = mode == SW_MODE_RGB ? sw::WavelengthMode::Rgb : sw::WavelengthMode::Spectral;
    return SW_OK;
}

int sw_scene_set_seed(sw_scene* scene, uint64_t seed) {
    SW_REQUIRE(scene, "scene is null");
    scene->scene.settings.seed = seed;
    return SW_OK;
}

int sw_scene_set_threads(sw_scene* scene, int threads) {
    SW_REQUIRE(scene, "scene is null");
    scene->scene.settings.threads = threads;
    return SW_OK;
}

int sw_scene_exposure(const sw_scene* scene, double* out) {
    SW_REQUIRE(scene && out, "null argument");
    *out = scene->scene.settings.exposure;
    return SW_OK;
}

void sw_scene_destroy(sw_scene* scene) { delete scene; }

int sw_render(const sw_scene* scene, sw_image** out) {
    SW_REQUIRE(scene && out, "null argument");
    return guarded([&] {
        auto img = std::make_unique<sw_image>();
        img->image = sw::render(scene->scene);
        *out = img.release();
    });
}

int sw_image_size(const sw_image* image, int* width, int* height) {
    SW_REQUIRE(image && width && height, "null argument");
    *width = image->image.width;
    *height = image->image.height;
    return SW_OK;
}

const float* sw_image_data(const sw_image* image) { return image ? image->image.rgb.data() : nullptr; }

int sw_image_write(const sw_image* image, const char* path, double exposure) {
    SW_REQUIRE(image && path, "null argument");
    return guarded([&] { sw::write_image(image->image, path, sw::format_from_path(path), exposure); });
}

void sw_image_destroy(sw_image* image) { delete image; }

int sw_oracle_run(const sw_pattern* pattern, const sw_oracle_params* params, const char* out_dir,
                  sw_oracle_metrics* metrics) {
    SW_REQUIRE(pattern && params && out_dir, "null argument");
    return guarded([&] {
        sw::OracleRequest req;
        req.segments = pattern->segments;
        req.sigma = params->sigma;
        req.lambda = params->lambda;
        req.x0 = {params->x0, params->y0};
        req.grid = {params->resolution, params->extent};
        const auto summary = sw::run_oracle(req);
        sw::write_oracle_report(summary, req, out_dir);
        if (metrics) {
            *metrics = {summary.parseval_relative, summary.tangential_r2, summary.tangential.l2_relative,
                        summary.central_lobe.l2_relative, summary.side_lobes.l2_relative,
                        summary.side_lobes.sign_test_p};
        }
    });
}

}  // extern "C"
