/* blendopt: palette, opacity and layer-order optimization for overlapped charts.
 *
 * C interface over the C++ core. Handles are opaque; every fallible call
 * returns a blendopt_status and, on failure, records a message (and for
 * parse errors the offending field path) retrievable from the calling thread.
 * Strings returned through char** are heap allocated and must be released
 * with blendopt_string_free.
 */
#ifndef BLENDOPT_H
#define BLENDOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BLENDOPT_API __declspec(dllexport)
#else
#define BLENDOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blendopt_status {
    BLENDOPT_OK = 0,
    BLENDOPT_ERR_INVALID_ARGUMENT = 1,
    BLENDOPT_ERR_PARSE = 2,
    BLENDOPT_ERR_IO = 3,
    BLENDOPT_ERR_VALIDATION = 4,
    BLENDOPT_ERR_INFEASIBLE_START = 5,
    BLENDOPT_ERR_GENERATION_FAILED = 6,
    BLENDOPT_ERR_UNSUPPORTED = 7,
    BLENDOPT_ERR_INTERNAL = 99
} blendopt_status;

typedef struct blendopt_model blendopt_model;
typedef struct blendopt_scene blendopt_scene;
typedef struct blendopt_result blendopt_result;

BLENDOPT_API const char* blendopt_version(void);
BLENDOPT_API const char* blendopt_status_name(blendopt_status status);

/* Message of the last failed call on this thread ("" when none). */
BLENDOPT_API const char* blendopt_last_error(void);
/* Field path of the last parse error on this thread ("" when none). */
BLENDOPT_API const char* blendopt_last_error_path(void);

BLENDOPT_API void blendopt_string_free(char* s);

/* Name model (color-term count matrix). */
BLENDOPT_API blendopt_status blendopt_model_load_file(const char* path, blendopt_model** out);
BLENDOPT_API blendopt_status blendopt_model_load_json(const char* json, size_t len, blendopt_model** out);
BLENDOPT_API size_t blendopt_model_bin_count(const blendopt_model* model);
BLENDOPT_API size_t blendopt_model_term_count(const blendopt_model* model);
BLENDOPT_API void blendopt_model_free(blendopt_model* model);
/* Survey export JSON -> name-model JSON. */
BLENDOPT_API blendopt_status blendopt_convert_survey_export(const char* json, size_t len, char** out_model_json);

/* Scenes: histogram documents or mask manifests. base_dir resolves mask files (NULL = "."). */
BLENDOPT_API blendopt_status blendopt_scene_load_file(const char* path, blendopt_scene** out);
BLENDOPT_API blendopt_status blendopt_scene_from_json(const char* json, size_t len, const char* base_dir,
                                                      blendopt_scene** out);
BLENDOPT_API size_t blendopt_scene_class_count(const blendopt_scene* scene);
BLENDOPT_API size_t blendopt_scene_region_count(const blendopt_scene* scene);
/* 1 when the scene carries histogram geometry (SVG renderable), 0 for raster scenes. */
BLENDOPT_API int blendopt_scene_has_histogram(const blendopt_scene* scene);
/* Regions, membership, pair-share matrix, sizes, adjacency and warnings as JSON. */
BLENDOPT_API blendopt_status blendopt_scene_describe(const blendopt_scene* scene, char** out_json);
BLENDOPT_API void blendopt_scene_free(blendopt_scene* scene);

/* options_json (may be NULL):
 *   {"config": {...}, "schedule": {...}, "seed": n, "palette": {"fixed": [...], "initial": [...]}} */
BLENDOPT_API blendopt_status blendopt_optimize(const blendopt_scene* scene, const blendopt_model* model,
                                               const char* options_json, blendopt_result** out);
BLENDOPT_API blendopt_status blendopt_result_document(const blendopt_result* result, char** out_json);
BLENDOPT_API blendopt_status blendopt_result_breakdown(const blendopt_result* result, char** out_json);
BLENDOPT_API blendopt_status blendopt_result_trace_csv(const blendopt_result* result, char** out_csv);
BLENDOPT_API double blendopt_result_total(const blendopt_result* result);
BLENDOPT_API void blendopt_result_free(blendopt_result* result);

/* solution_json is a solution document or {"palette","opacities","order"}.
 * config_json (may be NULL) overrides the document's config. */
BLENDOPT_API blendopt_status blendopt_score(const blendopt_scene* scene, const blendopt_model* model,
                                            const char* solution_json, const char* config_json,
                                            char** out_breakdown_json);

/* options_json (may be NULL): {"width": 640, "height": 400, "blend_space": "linear"}.
 * Returns BLENDOPT_ERR_UNSUPPORTED for raster scenes; use blendopt_render_png. */
BLENDOPT_API blendopt_status blendopt_render_svg(const blendopt_scene* scene, const char* solution_json,
                                                 const char* options_json, char** out_svg);
/* Region-color map of a raster scene written as PNG. */
BLENDOPT_API blendopt_status blendopt_render_png(const blendopt_scene* scene, const char* solution_json,
                                                 const char* options_json, const char* path);

/* params_json: {"classes": 2..4, "smoothness": "smooth"|"moderate"|"unsmooth", "bins": 25, "seed": n}.
 * Output: {"histogram": <histogram document>, "kl": [...]} */
BLENDOPT_API blendopt_status blendopt_gen_stimulus(const char* params_json, char** out_json);

typedef void (*blendopt_ready_fn)(int port, void* user);

/* Blocks serving the HTTP API until the process ends. port 0 picks a free
 * port; on_ready (may be NULL) receives the bound port before serving. */
BLENDOPT_API blendopt_status blendopt_serve(const blendopt_model* model, const char* host, int port,
                                            unsigned workers, unsigned ttl_seconds, blendopt_ready_fn on_ready,
                                            void* user);

#ifdef __cplusplus
}
#endif

#endif
