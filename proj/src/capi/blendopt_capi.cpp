#include "blendopt/blendopt.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "blendopt/annealer.hpp"
#include "blendopt/errors.hpp"
#include "blendopt/io.hpp"
#include "blendopt/name_model.hpp"
#include "blendopt/render.hpp"
#include "blendopt/service.hpp"
#include "blendopt/version.hpp"

struct blendopt_model {
    std::shared_ptr<const blendopt::NameModel> model;
};

struct blendopt_scene {
    blendopt::SceneStructure scene;
};

struct blendopt_result {
    blendopt::OptimizeResult result;
    std::string document;
    std::string breakdown;
};

namespace {

using blendopt::io::Json;

thread_local std::string g_error;
thread_local std::string g_error_path;

blendopt_status fail(blendopt_status status, const std::string& message, const std::string& path = "") {
    g_error = message;
    g_error_path = path;
    return status;
}

// Maps core exceptions onto status codes; every entry point funnels through here.
template <typename F>
blendopt_status guarded(F&& body) {
    g_error.clear();
    g_error_path.clear();
    try {
        return body();
    } catch (const blendopt::ParseError& e) {
        return fail(BLENDOPT_ERR_PARSE, e.what(), e.where());
    } catch (const blendopt::ValidationError& e) {
        return fail(BLENDOPT_ERR_VALIDATION, e.what());
    } catch (const blendopt::ContractViolation& e) {
        return fail(BLENDOPT_ERR_INVALID_ARGUMENT, e.what());
    } catch (const blendopt::InfeasibleStart& e) {
        return fail(BLENDOPT_ERR_INFEASIBLE_START, e.what());
    } catch (const blendopt::GenerationFailed& e) {
        return fail(BLENDOPT_ERR_GENERATION_FAILED, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BLENDOPT_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BLENDOPT_ERR_IO, e.what());
    } catch (...) {
        return fail(BLENDOPT_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size());
    out[s.size()] = '\0';
    return out;
}

Json parse_optional(const char* text, const char* where) {
    if (!text || !*text) return Json();
    return blendopt::io::parse_json(text, where);
}

struct ResolvedSolution {
    blendopt::Solution solution;
    std::optional<blendopt::ObjectiveConfig> config;
};

ResolvedSolution resolve_solution(const char* text, std::size_t class_count) {
    if (!text) throw blendopt::ContractViolation("solution JSON is required");
    const Json j = blendopt::io::parse_json(text, "solution");
    if (!j.is_object()) throw blendopt::ParseError("solution", "expected an object");
    if (j.contains("format")) {
        blendopt::io::SolutionDocument doc = blendopt::io::read_solution_document(text);
        if (doc.classes.size() != class_count) {
            throw blendopt::ParseError("classes", "document has " + std::to_string(doc.classes.size()) +
                                                      " classes, scene has " + std::to_string(class_count));
        }
        return {std::move(doc.solution), doc.config};
    }
    return {blendopt::io::solution_from_json(j, class_count, "solution"), std::nullopt};
}

blendopt::RenderOptions render_options(const char* options_json, const ResolvedSolution& sol) {
    blendopt::RenderOptions o;
    if (sol.config) o.blend_space = sol.config->blend_space;
    const Json j = parse_optional(options_json, "options");
    if (j.is_null()) return o;
    if (!j.is_object()) throw blendopt::ParseError("options", "expected an object");
    const auto dim = [&](const char* key, std::size_t& dst) {
        if (auto it = j.find(key); it != j.end()) {
            if (!it->is_number_unsigned()) throw blendopt::ParseError(std::string("options.") + key, "expected a positive integer");
            dst = it->get<std::size_t>();
            if (dst == 0 || dst > 20000) throw blendopt::ParseError(std::string("options.") + key, "out of range");
        }
    };
    dim("width", o.width);
    dim("height", o.height);
    if (auto it = j.find("blend_space"); it != j.end()) {
        if (!it->is_string()) throw blendopt::ParseError("options.blend_space", "expected a string");
        try {
            o.blend_space = blendopt::parse_blend_space(it->get<std::string>());
        } catch (const blendopt::ParseError&) {
            throw blendopt::ParseError("options.blend_space", "expected \"linear\" or \"gamma\"");
        }
    }
    return o;
}

}  // namespace

extern "C" {

const char* blendopt_version(void) { return blendopt::kVersion; }

const char* blendopt_status_name(blendopt_status status) {
    switch (status) {
        case BLENDOPT_OK: return "ok";
        case BLENDOPT_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case BLENDOPT_ERR_PARSE: return "parse_error";
        case BLENDOPT_ERR_IO: return "io_error";
        case BLENDOPT_ERR_VALIDATION: return "validation_error";
        case BLENDOPT_ERR_INFEASIBLE_START: return "infeasible_start";
        case BLENDOPT_ERR_GENERATION_FAILED: return "generation_failed";
        case BLENDOPT_ERR_UNSUPPORTED: return "unsupported";
        case BLENDOPT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* blendopt_last_error(void) { return g_error.c_str(); }

const char* blendopt_last_error_path(void) { return g_error_path.c_str(); }

void blendopt_string_free(char* s) { std::free(s); }

blendopt_status blendopt_model_load_json(const char* json, size_t len, blendopt_model** out) {
    if (!json || !out) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto model = std::make_shared<const blendopt::NameModel>(blendopt::load_name_model(std::string_view(json, len)));
        *out = new blendopt_model{std::move(model)};
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_model_load_file(const char* path, blendopt_model** out) {
    if (!path || !out) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    std::string bytes;
    const blendopt_status st = guarded([&] {
        bytes = blendopt::io::read_file(path);
        return BLENDOPT_OK;
    });
    if (st != BLENDOPT_OK) return st;
    return blendopt_model_load_json(bytes.data(), bytes.size(), out);
}

size_t blendopt_model_bin_count(const blendopt_model* model) { return model ? model->model->bin_count() : 0; }

size_t blendopt_model_term_count(const blendopt_model* model) { return model ? model->model->term_count() : 0; }

void blendopt_model_free(blendopt_model* model) { delete model; }

blendopt_status blendopt_convert_survey_export(const char* json, size_t len, char** out_model_json) {
    if (!json || !out_model_json) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out_model_json = nullptr;
    return guarded([&] {
        *out_model_json = dup_string(blendopt::convert_survey_export(std::string_view(json, len)));
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_scene_load_file(const char* path, blendopt_scene** out) {
    if (!path || !out) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        *out = new blendopt_scene{blendopt::io::load_scene_file(path)};
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_scene_from_json(const char* json, size_t len, const char* base_dir, blendopt_scene** out) {
    if (!json || !out) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const Json j = blendopt::io::parse_json(std::string_view(json, len), "scene");
        *out = new blendopt_scene{blendopt::io::scene_from_json(j, base_dir ? base_dir : ".")};
        return BLENDOPT_OK;
    });
}

size_t blendopt_scene_class_count(const blendopt_scene* scene) { return scene ? scene->scene.class_count : 0; }

size_t blendopt_scene_region_count(const blendopt_scene* scene) { return scene ? scene->scene.region_count() : 0; }

int blendopt_scene_has_histogram(const blendopt_scene* scene) {
    return scene && scene->scene.histogram.has_value() ? 1 : 0;
}

blendopt_status blendopt_scene_describe(const blendopt_scene* scene, char** out_json) {
    if (!scene || !out_json) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded([&] {
        *out_json = dup_string(blendopt::io::scene_to_json(scene->scene).dump(2) + "\n");
        return BLENDOPT_OK;
    });
}

void blendopt_scene_free(blendopt_scene* scene) { delete scene; }

blendopt_status blendopt_optimize(const blendopt_scene* scene, const blendopt_model* model, const char* options_json,
                                  blendopt_result** out) {
    if (!scene || !model || !out) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const Json opts = parse_optional(options_json, "options");
        if (!opts.is_null() && !opts.is_object()) throw blendopt::ParseError("options", "expected an object");
        const auto get = [&](const char* key) { return opts.is_object() && opts.contains(key) ? opts[key] : Json(); };
        const blendopt::ObjectiveConfig cfg = blendopt::io::config_from_json(get("config"), "config");
        blendopt::AnnealSchedule schedule = blendopt::io::schedule_from_json(get("schedule"), "schedule");
        if (const Json seed = get("seed"); !seed.is_null()) {
            if (!seed.is_number_unsigned()) throw blendopt::ParseError("seed", "expected a non-negative integer");
            schedule.seed = seed.get<std::uint64_t>();
        }
        const blendopt::PaletteOptions palette =
            blendopt::io::palette_options_from_json(get("palette"), scene->scene.class_count, "palette");

        auto result = std::make_unique<blendopt_result>();
        result->result = blendopt::optimize(scene->scene, *model->model, cfg, schedule, palette);
        const auto& r = result->result;
        result->document =
            blendopt::io::write_solution_document(scene->scene, r.solution, r.breakdown, cfg, schedule, r.seed);
        result->breakdown = blendopt::io::breakdown_to_json(scene->scene, r.breakdown, cfg).dump(2) + "\n";
        *out = result.release();
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_result_document(const blendopt_result* result, char** out_json) {
    if (!result || !out_json) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out_json = dup_string(result->document);
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_result_breakdown(const blendopt_result* result, char** out_json) {
    if (!result || !out_json) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out_json = dup_string(result->breakdown);
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_result_trace_csv(const blendopt_result* result, char** out_csv) {
    if (!result || !out_csv) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *out_csv = dup_string(result->result.trace.to_csv());
        return BLENDOPT_OK;
    });
}

double blendopt_result_total(const blendopt_result* result) {
    return result ? result->result.breakdown.total : 0.0;
}

void blendopt_result_free(blendopt_result* result) { delete result; }

blendopt_status blendopt_score(const blendopt_scene* scene, const blendopt_model* model, const char* solution_json,
                               const char* config_json, char** out_breakdown_json) {
    if (!scene || !model || !solution_json || !out_breakdown_json) {
        return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    }
    *out_breakdown_json = nullptr;
    return guarded([&] {
        const ResolvedSolution sol = resolve_solution(solution_json, scene->scene.class_count);
        blendopt::ObjectiveConfig cfg = sol.config.value_or(blendopt::ObjectiveConfig{});
        if (const Json j = parse_optional(config_json, "config"); !j.is_null()) {
            cfg = blendopt::io::config_from_json(j, "config");
        }
        const blendopt::ScoreBreakdown b = blendopt::total_score(scene->scene, sol.solution, cfg, *model->model);
        *out_breakdown_json = dup_string(blendopt::io::breakdown_to_json(scene->scene, b, cfg).dump(2) + "\n");
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_render_svg(const blendopt_scene* scene, const char* solution_json, const char* options_json,
                                    char** out_svg) {
    if (!scene || !solution_json || !out_svg) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out_svg = nullptr;
    if (!scene->scene.histogram) {
        return fail(BLENDOPT_ERR_UNSUPPORTED, "raster scenes render as PNG region maps; use blendopt_render_png");
    }
    return guarded([&] {
        const ResolvedSolution sol = resolve_solution(solution_json, scene->scene.class_count);
        *out_svg = dup_string(blendopt::render_svg(scene->scene, sol.solution, render_options(options_json, sol)));
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_render_png(const blendopt_scene* scene, const char* solution_json, const char* options_json,
                                    const char* path) {
    if (!scene || !solution_json || !path) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    if (!scene->scene.raster) {
        return fail(BLENDOPT_ERR_UNSUPPORTED, "histogram scenes render as SVG; use blendopt_render_svg");
    }
    return guarded([&] {
        const ResolvedSolution sol = resolve_solution(solution_json, scene->scene.class_count);
        const blendopt::RenderOptions o = render_options(options_json, sol);
        blendopt::write_png(path, blendopt::render_region_map(scene->scene, sol.solution, o.blend_space));
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_gen_stimulus(const char* params_json, char** out_json) {
    if (!params_json || !out_json) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    *out_json = nullptr;
    return guarded([&] {
        const Json j = blendopt::io::parse_json(params_json, "params");
        const blendopt::Stimulus s = blendopt::gen_stimulus(blendopt::io::stimulus_params_from_json(j, "params"));
        const Json doc = {{"histogram", blendopt::io::histogram_to_json(s.spec)}, {"kl", s.kl}};
        *out_json = dup_string(doc.dump(2) + "\n");
        return BLENDOPT_OK;
    });
}

blendopt_status blendopt_serve(const blendopt_model* model, const char* host, int port, unsigned workers,
                               unsigned ttl_seconds, blendopt_ready_fn on_ready, void* user) {
    if (!model || !host) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "null argument");
    if (port < 0 || port > 65535) return fail(BLENDOPT_ERR_INVALID_ARGUMENT, "port out of range");
    return guarded([&] {
        blendopt::ServiceOptions options;
        options.host = host;
        options.port = port;
        options.workers = workers == 0 ? 1 : workers;
        options.job_ttl = std::chrono::seconds(ttl_seconds == 0 ? 3600 : ttl_seconds);
        blendopt::Service service(model->model, options);
        const int bound = service.bind();
        if (on_ready) on_ready(bound, user);
        service.run();
        return BLENDOPT_OK;
    });
}

}  // extern "C"
