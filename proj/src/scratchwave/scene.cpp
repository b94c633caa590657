#include "scratchwave/scene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scratchwave/error.hpp"
#include "scratchwave/pattern_io.hpp"

namespace scratchwave {

namespace {

using nlohmann::json;

// Accumulates field errors so a broken scene reports all of them at once.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

    double number(const json& j, const char* key, const std::string& path, double fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_number()) {
            error(path + "." + key, "expected a number");
            return fallback;
        }
        return v.get<double>();
    }

    std::int64_t integer(const json& j, const char* key, const std::string& path, std::int64_t fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            error(path + "." + key, "expected an integer");
            return fallback;
        }
        return v.get<std::int64_t>();
    }

    bool boolean(const json& j, const char* key, const std::string& path, bool fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_boolean()) {
            error(path + "." + key, "expected true or false");
            return fallback;
        }
        return v.get<bool>();
    }

    std::string string(const json& j, const char* key, const std::string& path, const std::string& fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_string()) {
            error(path + "." + key, "expected a string");
            return fallback;
        }
        return v.get<std::string>();
    }

    Vec3 vec3(const json& j, const char* key, const std::string& path, Vec3 fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
            error(path + "." + key, "expected [x, y, z]");
            return fallback;
        }
        return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }

    Vec2 vec2(const json& j, const char* key, const std::string& path, Vec2 fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            error(path + "." + key, "expected a two-element array");
            return fallback;
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    UniformRange range(const json& j, const char* key, const std::string& path, UniformRange fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (v.is_number()) return {v.get<double>(), v.get<double>()};
        const Vec2 r = vec2(j, key, path, {fallback.lo, fallback.hi});
        if (r.x > r.y) error(path + "." + key, "range lower bound exceeds upper bound");
        return {r.x, r.y};
    }

    ProfileKind profile(const json& j, const std::string& path) {
        const std::string p = string(j, "profile", path, "rect");
        if (p == "rect") return ProfileKind::Rect;
        if (p == "tri") return ProfileKind::Triangle;
        error(path + ".profile", "expected \"rect\" or \"tri\"");
        return ProfileKind::Rect;
    }

private:
    std::vector<std::string>& errors_;
};

void check_keys(Reader& r, const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
        r.error(path, "expected an object");
        return;
    }
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) r.error(path + "." + k, "unknown field");
    }
}

RenderSettings read_settings(Reader& r, const json& j) {
    RenderSettings s;
    if (!j.contains("settings")) return s;
    const json& o = j.at("settings");
    check_keys(r, o, "settings", {"width", "height", "spp", "mode", "depth", "seed", "threads", "exposure"});
    if (!o.is_object()) return s;
    s.width = static_cast<int>(r.integer(o, "width", "settings", s.width));
    s.height = static_cast<int>(r.integer(o, "height", "settings", s.height));
    s.spp = static_cast<int>(r.integer(o, "spp", "settings", s.spp));
    s.depth = static_cast<int>(r.integer(o, "depth", "settings", s.depth));
    s.seed = static_cast<std::uint64_t>(r.integer(o, "seed", "settings", 0));
    s.threads = static_cast<int>(r.integer(o, "threads", "settings", 0));
    s.exposure = r.number(o, "exposure", "settings", s.exposure);
    const std::string mode = r.string(o, "mode", "settings", "rgb");
    if (mode == "rgb") {
        s.mode = WavelengthMode::Rgb;
    } else if (mode == "spectral16") {
        s.mode = WavelengthMode::Spectral;
    } else {
        r.error("settings.mode", "expected \"rgb\" or \"spectral16\"");
    }
    return s;
}

Camera read_camera(Reader& r, const json& j) {
    Camera c;
    if (!j.contains("camera")) {
        r.error("camera", "missing");
        return c;
    }
    const json& o = j.at("camera");
    check_keys(r, o, "camera", {"position", "look_at", "up", "vfov_deg"});
    if (!o.is_object()) return c;
    c.position = r.vec3(o, "position", "camera", c.position);
    c.look_at = r.vec3(o, "look_at", "camera", c.look_at);
    c.up = r.vec3(o, "up", "camera", c.up);
    c.vfov_deg = r.number(o, "vfov_deg", "camera", c.vfov_deg);
    return c;
}

std::vector<Light> read_lights(Reader& r, const json& j) {
    std::vector<Light> out;
    if (!j.contains("lights")) return out;
    const json& arr = j.at("lights");
    if (!arr.is_array()) {
        r.error("lights", "expected an array");
        return out;
    }
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "lights[" + std::to_string(i) + "]";
        const json& o = arr[i];
        Light l;
        const std::string type = o.is_object() ? r.string(o, "type", path, "") : "";
        if (type == "directional") {
            check_keys(r, o, path, {"type", "direction", "irradiance"});
            l.kind = LightKind::Directional;
            l.direction = r.vec3(o, "direction", path, l.direction);
            l.intensity = r.number(o, "irradiance", path, 1.0);
            if (length(l.direction) > 0.0) l.direction = normalize(l.direction);
        } else if (type == "point") {
            check_keys(r, o, path, {"type", "position", "intensity"});
            l.kind = LightKind::Point;
            l.position = r.vec3(o, "position", path, l.position);
            l.intensity = r.number(o, "intensity", path, 1.0);
        } else if (type == "environment") {
            check_keys(r, o, path, {"type", "radiance"});
            l.kind = LightKind::Environment;
            l.intensity = r.number(o, "radiance", path, 1.0);
        } else {
            r.error(path + ".type", "expected \"directional\", \"point\" or \"environment\"");
            continue;
        }
        out.push_back(l);
    }
    return out;
}

SurfaceMaterial read_material(Reader& r, const json& o, const std::string& path) {
    SurfaceMaterial m;
    check_keys(r, o, path,
               {"a_base", "a_scratch", "a_mask", "fresnel_f0", "base", "ggx_alpha", "kappa", "coherent", "variation"});
    if (!o.is_object()) return m;
    m.params.a_base = r.number(o, "a_base", path, 1.0);
    m.params.a_scratch = r.number(o, "a_scratch", path, 1.0);
    m.params.a_mask = r.number(o, "a_mask", path, 1.0);
    if (o.contains("fresnel_f0")) {
        const json& f = o.at("fresnel_f0");
        if (f.is_number()) {
            m.params.fresnel.samples = {{550e-9, f.get<double>()}};
        } else if (f.is_array()) {
            for (size_t i = 0; i < f.size(); ++i) {
                const json& e = f[i];
                if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                    r.error(path + ".fresnel_f0[" + std::to_string(i) + "]", "expected [wavelength_nm, f0]");
                    continue;
                }
                m.params.fresnel.samples.emplace_back(e[0].get<double>() * 1e-9, e[1].get<double>());
            }
        } else {
            r.error(path + ".fresnel_f0", "expected a number or a table of [wavelength_nm, f0]");
        }
    }
    const std::string base = r.string(o, "base", path, "specular");
    if (base == "specular") {
        m.base = BaseModel::Specular;
    } else if (base == "ggx") {
        m.base = BaseModel::Ggx;
    } else {
        r.error(path + ".base", "expected \"specular\" or \"ggx\"");
    }
    m.ggx.alpha = r.number(o, "ggx_alpha", path, m.ggx.alpha);
    m.vmf.kappa = r.number(o, "kappa", path, m.vmf.kappa);
    m.options.coherent = r.boolean(o, "coherent", path, true);
    if (o.contains("variation")) {
        const json& v = o.at("variation");
        const std::string vp = path + ".variation";
        check_keys(r, v, vp, {"amplitude_w", "amplitude_d", "frequency"});
        if (v.is_object()) {
            VariationSpec spec;
            spec.amplitude_w = r.number(v, "amplitude_w", vp, 0.0);
            spec.amplitude_d = r.number(v, "amplitude_d", vp, 0.0);
            spec.frequency = r.number(v, "frequency", vp, spec.frequency);
            if (spec.amplitude_w < 0.0 || spec.amplitude_d < 0.0) r.error(vp, "amplitudes must be >= 0");
            m.options.variation = spec;
        }
    }
    return m;
}

std::vector<ScratchSegment> read_pattern(Reader& r, const json& o, const std::string& path, const Patch& patch,
                                         const std::filesystem::path& base_dir) {
    if (!o.is_object()) {
        r.error(path, "expected an object");
        return {};
    }
    if (o.contains("file")) {
        check_keys(r, o, path, {"file"});
        const std::string file = r.string(o, "file", path, "");
        std::filesystem::path p(file);
        if (p.is_relative()) p = base_dir / p;
        try {
            return load_pattern_file(p);
        } catch (const Error& e) {
            r.error(path + ".file", e.what());
            return {};
        }
    }
    const std::string gen = r.string(o, "generator", path, "");
    try {
        if (gen == "random") {
            check_keys(r, o, path,
                       {"generator", "seed", "count", "density", "length", "width", "depth", "profile", "region"});
            RandomPatternSpec spec;
            spec.region = {{-patch.half_u, -patch.half_v}, {patch.half_u, patch.half_v}};
            if (o.contains("region")) {
                const json& reg = o.at("region");
                if (reg.is_object()) {
                    spec.region.min = r.vec2(reg, "min", path + ".region", spec.region.min);
                    spec.region.max = r.vec2(reg, "max", path + ".region", spec.region.max);
                } else {
                    r.error(path + ".region", "expected {\"min\": [u, v], \"max\": [u, v]}");
                }
            }
            spec.density = r.number(o, "density", path, 0.0);
            if (o.contains("count")) spec.exact_count = r.integer(o, "count", path, 0);
            spec.length = r.range(o, "length", path, spec.length);
            spec.width = r.range(o, "width", path, spec.width);
            spec.depth = r.range(o, "depth", path, spec.depth);
            spec.profile = r.profile(o, path);
            if (spec.density < 0.0) r.error(path + ".density", "must be >= 0");
            if (spec.exact_count && *spec.exact_count < 0) r.error(path + ".count", "must be >= 0");
            std::mt19937_64 rng(static_cast<std::uint64_t>(r.integer(o, "seed", path, 1)));
            return generate_random(spec, rng);
        }
        if (gen == "grating") {
            check_keys(r, o, path, {"generator", "count", "spacing", "length", "width", "depth", "profile"});
            return generate_grating(static_cast<int>(r.integer(o, "count", path, 1)), r.number(o, "spacing", path, 2e-6),
                                    r.number(o, "length", path, 40e-6), r.number(o, "width", path, 1e-6),
                                    r.number(o, "depth", path, 0.125e-6), r.profile(o, path));
        }
        if (gen == "concentric") {
            check_keys(r, o, path,
                       {"generator", "center", "inner_radius", "pitch", "turns", "chord_tolerance", "width", "depth",
                        "profile"});
            ConcentricSpec spec;
            spec.center = r.vec2(o, "center", path, spec.center);
            spec.inner_radius = r.number(o, "inner_radius", path, spec.inner_radius);
            spec.pitch = r.number(o, "pitch", path, spec.pitch);
            spec.turns = static_cast<int>(r.integer(o, "turns", path, spec.turns));
            spec.chord_tolerance = r.number(o, "chord_tolerance", path, spec.chord_tolerance);
            spec.width = r.number(o, "width", path, spec.width);
            spec.depth = r.number(o, "depth", path, spec.depth);
            spec.profile = r.profile(o, path);
            return generate_concentric(spec);
        }
    } catch (const Error& e) {
        r.error(path, e.what());
        return {};
    }
    r.error(path, "expected \"file\" or \"generator\": random, grating or concentric");
    return {};
}

std::vector<Patch> read_patches(Reader& r, const json& j, const std::filesystem::path& base_dir) {
    std::vector<Patch> out;
    if (!j.contains("patches")) return out;
    const json& arr = j.at("patches");
    if (!arr.is_array()) {
        r.error("patches", "expected an array");
        return out;
    }
    for (size_t i = 0; i < arr.size(); ++i) {
        const std::string path = "patches[" + std::to_string(i) + "]";
        const json& o = arr[i];
        check_keys(r, o, path, {"center", "u_axis", "v_axis", "size", "sigma", "material", "pattern"});
        if (!o.is_object()) continue;
        Patch p;
        p.center = r.vec3(o, "center", path, p.center);
        p.u_axis = r.vec3(o, "u_axis", path, p.u_axis);
        p.v_axis = r.vec3(o, "v_axis", path, p.v_axis);
        const Vec2 size = r.vec2(o, "size", path, {2.0 * p.half_u, 2.0 * p.half_v});
        p.half_u = 0.5 * size.x;
        p.half_v = 0.5 * size.y;
        p.sigma = r.number(o, "sigma", path, p.sigma);
        if (o.contains("material")) p.material = read_material(r, o.at("material"), path + ".material");
        if (o.contains("pattern")) p.segments = read_pattern(r, o.at("pattern"), path + ".pattern", p, base_dir);
        out.push_back(std::move(p));
    }
    return out;
}

std::string join(const std::vector<std::string>& errors) {
    std::string msg = "invalid scene:";
    for (const auto& e : errors) msg += "\n  " + e;
    return msg;
}

void collect(const SceneDescription& s, std::vector<std::string>& errors) {
    auto bad = [&](const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); };
    const RenderSettings& rs = s.settings;
    if (rs.width < 1) bad("settings.width", "must be >= 1");
    if (rs.height < 1) bad("settings.height", "must be >= 1");
    if (rs.spp < 1) bad("settings.spp", "must be >= 1");
    if (rs.depth < 1) bad("settings.depth", "must be >= 1");
    if (rs.threads < 0) bad("settings.threads", "must be >= 0");
    if (!(rs.exposure > 0.0)) bad("settings.exposure", "must be > 0");
    const Camera& c = s.camera;
    if (!(c.vfov_deg > 0.0 && c.vfov_deg < 180.0)) bad("camera.vfov_deg", "must lie in (0, 180)");
    const Vec3 fwd = c.look_at - c.position;
    if (!(length(fwd) > 0.0)) bad("camera.look_at", "must differ from camera.position");
    else if (!(length(cross(fwd, c.up)) > 1e-12 * length(fwd) * length(c.up))) bad("camera.up", "must not be parallel to the view direction");
    for (size_t i = 0; i < s.lights.size(); ++i) {
        const std::string path = "lights[" + std::to_string(i) + "]";
        const Light& l = s.lights[i];
        if (!(l.intensity >= 0.0) || !std::isfinite(l.intensity)) bad(path, "intensity must be finite and >= 0");
        if (l.kind == LightKind::Directional && !(std::abs(length(l.direction) - 1.0) < 1e-9)) bad(path + ".direction", "must be nonzero");
    }
    if (s.patches.empty()) bad("patches", "at least one patch is required");
    for (size_t i = 0; i < s.patches.size(); ++i) {
        const std::string path = "patches[" + std::to_string(i) + "]";
        const Patch& p = s.patches[i];
        if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) bad(path + ".sigma", "must be > 0");
        if (!(p.half_u > 0.0 && p.half_v > 0.0)) bad(path + ".size", "must be positive");
        const double lu = length(p.u_axis);
        const double lv = length(p.v_axis);
        if (!(std::abs(lu - 1.0) < 1e-6 && std::abs(lv - 1.0) < 1e-6 && std::abs(dot(p.u_axis, p.v_axis)) < 1e-6)) {
            bad(path, "u_axis and v_axis must be orthonormal");
        }
        try {
            validate(p.material.params);
        } catch (const Error& e) {
            bad(path + ".material", e.what());
        }
        if (!(p.material.ggx.alpha > 0.0 && p.material.ggx.alpha <= 1.0)) bad(path + ".material.ggx_alpha", "must lie in (0, 1]");
        if (!(p.material.vmf.kappa > 0.0)) bad(path + ".material.kappa", "must be > 0");
        for (size_t k = 0; k < p.segments.size(); ++k) {
            try {
                validate(p.segments[k]);
            } catch (const Error& e) {
                bad(path + ".pattern[" + std::to_string(k) + "]", e.what());
                break;
            }
        }
    }
}

}  // namespace

void validate(const SceneDescription& scene) {
    std::vector<std::string> errors;
    collect(scene, errors);
    if (!errors.empty()) fail(ErrorCode::Validation, join(errors));
}

SceneDescription parse_scene(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, std::string("scene is not valid JSON: ") + e.what());
    }
    std::vector<std::string> errors;
    Reader r(errors);
    check_keys(r, j, "scene", {"settings", "camera", "lights", "patches"});
    SceneDescription s;
    if (j.is_object()) {
        s.settings = read_settings(r, j);
        s.camera = read_camera(r, j);
        s.lights = read_lights(r, j);
        s.patches = read_patches(r, j, base_dir);
    }
    collect(s, errors);
    if (!errors.empty()) fail(ErrorCode::Validation, join(errors));
    return s;
}

SceneDescription load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot read scene " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str(), path.parent_path());
}

}  // namespace scratchwave
