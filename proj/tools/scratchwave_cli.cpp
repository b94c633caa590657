#include <cstdio>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "scratchwave/scratchwave.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

int report(int status, const char* what) {
    std::fprintf(stderr, "error: %s (%s): %s\n", what, sw_status_name(status), sw_last_error());
    switch (status) {
        case SW_ERR_VALIDATION:
        case SW_ERR_PARSE:
        case SW_ERR_INVALID_ARGUMENT:
        case SW_ERR_DEGENERATE_SEGMENT:
        case SW_ERR_UNSUPPORTED:
        case SW_ERR_WINDOW_TRUNCATION:
            return kExitValidation;
        default:
            return kExitFailure;
    }
}

struct RenderArgs {
    std::string scene;
    std::string output;
    int spp = 0;
    std::string res;
    std::string mode;
    long long seed = -1;
    int threads = -1;
    double exposure = 0.0;
};

int run_render(const RenderArgs& a) {
    int width = 0;
    int height = 0;
    if (!a.res.empty()) {
        std::smatch m;
        if (!std::regex_match(a.res, m, std::regex(R"((\d+)x(\d+))"))) {
            std::fprintf(stderr, "error: --res expects WxH, got \"%s\"\n", a.res.c_str());
            return kExitValidation;
        }
        width = std::stoi(m[1]);
        height = std::stoi(m[2]);
    }
    sw_scene* scene = nullptr;
    int rc = sw_scene_load(a.scene.c_str(), &scene);
    if (rc != SW_OK) return report(rc, "loading scene");
    if (a.spp != 0) sw_scene_set_spp(scene, a.spp);
    if (!a.res.empty()) sw_scene_set_resolution(scene, width, height);
    if (!a.mode.empty()) sw_scene_set_mode(scene, a.mode == "rgb" ? SW_MODE_RGB : SW_MODE_SPECTRAL16);
    if (a.seed >= 0) sw_scene_set_seed(scene, static_cast<uint64_t>(a.seed));
    if (a.threads >= 0) sw_scene_set_threads(scene, a.threads);
    double exposure = a.exposure;
    if (exposure <= 0.0) sw_scene_exposure(scene, &exposure);

    sw_image* image = nullptr;
    rc = sw_render(scene, &image);
    sw_scene_destroy(scene);
    if (rc != SW_OK) return report(rc, "rendering");
    rc = sw_image_write(image, a.output.c_str(), exposure);
    sw_image_destroy(image);
    if (rc != SW_OK) return report(rc, "writing image");
    return 0;
}

struct OracleArgs {
    std::string pattern;
    double sigma = 10e-6;
    double lambda = 0.5e-6;
    std::vector<double> x0{0.0, 0.0};
    std::string out;
    int resolution = 4096;
    double extent = 120e-6;
};

int run_oracle(const OracleArgs& a) {
    sw_pattern* pattern = nullptr;
    int rc = sw_pattern_load(a.pattern.c_str(), &pattern);
    if (rc != SW_OK) return report(rc, "loading pattern");
    sw_oracle_params params{a.sigma, a.lambda, a.x0[0], a.x0[1], a.resolution, a.extent};
    sw_oracle_metrics m{};
    rc = sw_oracle_run(pattern, &params, a.out.c_str(), &m);
    sw_pattern_destroy(pattern);
    if (rc != SW_OK) return report(rc, "running oracle");
    std::printf("parseval_relative %.3g\ntangential_r2 %.6f\ncentral_lobe_l2 %.4g\nside_lobe_l2 %.4g\nside_lobe_sign_p %.3g\n",
                m.parseval_relative, m.tangential_r2, m.central_l2, m.side_l2, m.side_sign_p);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wave-optical scratch shading: renderer and FFT oracle"};
    app.require_subcommand(1);

    RenderArgs ra;
    auto* render = app.add_subcommand("render", "Render a scene file to PFM or PNG");
    render->add_option("scene", ra.scene, "Scene file (JSON)")->required();
    render->add_option("-o,--output", ra.output, "Output image (.pfm or .png)")->required();
    render->add_option("--spp", ra.spp, "Samples per pixel")->check(CLI::PositiveNumber);
    render->add_option("--res", ra.res, "Resolution WxH");
    render->add_option("--mode", ra.mode, "Wavelength mode")->check(CLI::IsMember({"rgb", "spectral16"}));
    render->add_option("--seed", ra.seed, "Random seed")->check(CLI::NonNegativeNumber);
    render->add_option("--threads", ra.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    render->add_option("--exposure", ra.exposure, "PNG exposure scale (default from scene)");

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "Compare the analytic BRDF against a windowed FFT");
    oracle->add_option("pattern", oa.pattern, "Pattern file (.txt or .svg)")->required();
    oracle->add_option("--sigma", oa.sigma, "Coherence sigma (m)")->required()->check(CLI::PositiveNumber);
    oracle->add_option("--lambda", oa.lambda, "Wavelength (m)")->required()->check(CLI::PositiveNumber);
    oracle->add_option("--x0", oa.x0, "Window center X,Y (m)")->required()->delimiter(',')->expected(2);
    oracle->add_option("--out", oa.out, "Report directory")->required();
    oracle->add_option("--resolution", oa.resolution, "Grid cells per axis")->check(CLI::PositiveNumber);
    oracle->add_option("--extent", oa.extent, "Grid extent (m)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }
    if (render->parsed()) return run_render(ra);
    return run_oracle(oa);
}
