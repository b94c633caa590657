#ifndef SCRATCHWAVE_H
#define SCRATCHWAVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SW_BUILDING_LIBRARY)
#define SW_API __attribute__((visibility("default")))
#else
#define SW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning int returns one of these. */
enum {
    SW_OK = 0,
    SW_ERR_INVALID_ARGUMENT = 1,
    SW_ERR_DEGENERATE_SEGMENT = 2,
    SW_ERR_PARSE = 3,
    SW_ERR_UNSUPPORTED = 4,
    SW_ERR_BELOW_HORIZON = 5,
    SW_ERR_VALIDATION = 6,
    SW_ERR_IO = 7,
    SW_ERR_WINDOW_TRUNCATION = 8,
    SW_ERR_INTERNAL = 9
};

enum { SW_PROFILE_RECT = 0, SW_PROFILE_TRIANGLE = 1 };
enum { SW_MODE_RGB = 0, SW_MODE_SPECTRAL16 = 1 };

typedef struct sw_pattern sw_pattern;
typedef struct sw_evaluator sw_evaluator;
typedef struct sw_scene sw_scene;
typedef struct sw_image sw_image;

/* Message for the most recent failure on the calling thread. */
SW_API const char* sw_last_error(void);
SW_API const char* sw_status_name(int status);

/* Lengths in meters. */
typedef struct sw_segment {
    double x0, y0, x1, y1;
    double width;
    double depth;
    int profile;
} sw_segment;

SW_API int sw_pattern_create(sw_pattern** out);
/* Native text format, or the SVG subset for *.svg. */
SW_API int sw_pattern_load(const char* path, sw_pattern** out);
SW_API int sw_pattern_save(const sw_pattern* pattern, const char* path);
SW_API int sw_pattern_add_segment(sw_pattern* pattern, const sw_segment* segment);
SW_API int sw_pattern_size(const sw_pattern* pattern, size_t* out);
SW_API int sw_pattern_get_segment(const sw_pattern* pattern, size_t index, sw_segment* out);
SW_API int sw_pattern_generate_grating(int count, double spacing, double length, double width, double depth,
                                       int profile, sw_pattern** out);
SW_API void sw_pattern_destroy(sw_pattern* pattern);

typedef struct sw_material {
    double a_base;
    double a_scratch;
    double a_mask;
    double fresnel_f0; /* wavelength independent */
} sw_material;

typedef struct sw_brdf_value {
    double base_re, base_im;
    double scratch_re, scratch_im;
    double f_r; /* 1/sr */
} sw_brdf_value;

/* Builds the segment hierarchy for `pattern`; the pattern may be destroyed
   afterwards. */
SW_API int sw_evaluator_create(const sw_pattern* pattern, double sigma, const sw_material* material,
                               sw_evaluator** out);
SW_API int sw_evaluator_set_coherent(sw_evaluator* evaluator, int coherent);
/* Directions are unit vectors pointing away from the surface, z up. */
SW_API int sw_eval_brdf(const sw_evaluator* evaluator, double x, double y, const double omega_i[3],
                        const double omega_o[3], double lambda, sw_brdf_value* out);
SW_API void sw_evaluator_destroy(sw_evaluator* evaluator);

SW_API int sw_scene_load(const char* path, sw_scene** out);
SW_API int sw_scene_set_spp(sw_scene* scene, int spp);
SW_API int sw_scene_set_resolution(sw_scene* scene, int width, int height);
SW_API int sw_scene_set_mode(sw_scene* scene, int mode);
SW_API int sw_scene_set_seed(sw_scene* scene, uint64_t seed);
SW_API int sw_scene_set_threads(sw_scene* scene, int threads);
SW_API int sw_scene_exposure(const sw_scene* scene, double* out);
SW_API void sw_scene_destroy(sw_scene* scene);

SW_API int sw_render(const sw_scene* scene, sw_image** out);
SW_API int sw_image_size(const sw_image* image, int* width, int* height);
/* Linear sRGB floats, 3 per pixel, top row first. */
SW_API const float* sw_image_data(const sw_image* image);
/* Format from the extension: .pfm or .png. */
SW_API int sw_image_write(const sw_image* image, const char* path, double exposure);
SW_API void sw_image_destroy(sw_image* image);

typedef struct sw_oracle_params {
    double sigma;
    double lambda;
    double x0, y0;
    int resolution;   /* cells per axis */
    double extent;    /* meters */
} sw_oracle_params;

typedef struct sw_oracle_metrics {
    double parseval_relative;
    double tangential_r2;
    double tangential_l2;
    double central_l2;
    double side_l2;
    double side_sign_p;
} sw_oracle_metrics;

/* Writes slice_tangential.csv, slice_bitangential.csv and summary.txt into
   out_dir. `metrics` may be NULL. */
SW_API int sw_oracle_run(const sw_pattern* pattern, const sw_oracle_params* params, const char* out_dir,
                         sw_oracle_metrics* metrics);

#ifdef __cplusplus
}
#endif

#endif
