// Command-line front end. Talks to the library exclusively through blendopt.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blendopt/blendopt.h"

namespace {

using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitGeneration = 4;

struct CliError {
    int code;
    std::string message;
};

int exit_code(blendopt_status st) {
    switch (st) {
        case BLENDOPT_OK: return kExitOk;
        case BLENDOPT_ERR_INFEASIBLE_START: return kExitInfeasible;
        case BLENDOPT_ERR_GENERATION_FAILED: return kExitGeneration;
        case BLENDOPT_ERR_INTERNAL: return kExitInternal;
        default: return kExitBadInput;
    }
}

void check(blendopt_status st, const std::string& context) {
    if (st == BLENDOPT_OK) return;
    std::string msg = context + ": " + blendopt_last_error();
    const std::string path = blendopt_last_error_path();
    if (!path.empty() && msg.find(path) == std::string::npos) msg += " (at " + path + ")";
    throw CliError{exit_code(st), msg};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    blendopt_string_free(s);
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{kExitBadInput, path + ": cannot open for reading"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw CliError{kExitBadInput, path + ": cannot write"};
    }
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    ~Handle() { Free(ptr); }
};

using ModelHandle = Handle<blendopt_model, blendopt_model_free>;
using SceneHandle = Handle<blendopt_scene, blendopt_scene_free>;
using ResultHandle = Handle<blendopt_result, blendopt_result_free>;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct ObjectiveFlags {
    std::string weights;
    std::optional<double> eta;
    std::optional<double> sigma;
    std::optional<std::string> similarity;
    std::optional<std::string> separability;
    std::optional<std::string> blend_space;

    void attach(CLI::App* cmd) {
        cmd->add_option("--weights", weights, "Objective weights w_wa,w_bd,w_cs (default 1,1,1)");
        cmd->add_option("--eta", eta, "JND threshold on pairwise CIEDE2000 (default 3)");
        cmd->add_option("--sigma", sigma, "Minimum lightness difference to the background (default 5)");
        cmd->add_option("--similarity", similarity, "name | color | luminance | hue");
        cmd->add_option("--separability-scale", separability, "normalized | raw");
        cmd->add_option("--blend-space", blend_space, "linear | gamma");
    }

    // Only explicitly given flags appear, so document configs are kept otherwise.
    Json to_json() const {
        Json j = Json::object();
        if (!weights.empty()) {
            const auto parts = split(weights, ',');
            if (parts.size() != 3) throw CliError{kExitBadInput, "--weights expects three comma-separated numbers"};
            Json w = Json::array();
            for (const auto& p : parts) {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(p, &used);
                    if (used != p.size()) throw std::invalid_argument(p);
                    w.push_back(v);
                } catch (const std::exception&) {
                    throw CliError{kExitBadInput, "--weights: '" + p + "' is not a number"};
                }
            }
            j["weights"] = w;
        }
        if (eta) j["jnd_threshold"] = *eta;
        if (sigma) j["bg_contrast"] = *sigma;
        if (similarity) j["similarity"] = *similarity;
        if (separability) j["separability_scale"] = *separability;
        if (blend_space) j["blend_space"] = *blend_space;
        return j;
    }
};

struct ScheduleFlags {
    std::optional<double> t_start;
    std::optional<double> t_end;
    std::optional<double> gamma;
    std::optional<int> rgb_step;
    std::optional<double> alpha_step;
    std::optional<double> alpha_min;
    std::optional<double> alpha_max;
    std::optional<int> retries;

    void attach(CLI::App* cmd) {
        cmd->add_option("--t-start", t_start, "Initial temperature (default 1e5)");
        cmd->add_option("--t-end", t_end, "Final temperature (default 1e-3)");
        cmd->add_option("--gamma", gamma, "Cooling coefficient (default 0.99)");
        cmd->add_option("--rgb-step", rgb_step, "Color move magnitude per channel (default 10)");
        cmd->add_option("--alpha-step", alpha_step, "Opacity move magnitude (default 0.1)");
        cmd->add_option("--alpha-min", alpha_min, "Lowest opacity (default 0.1)");
        cmd->add_option("--alpha-max", alpha_max, "Highest opacity (default 0.9)");
        cmd->add_option("--max-retries", retries, "Feasibility redraws per candidate (default 100)");
    }

    Json to_json() const {
        Json j = Json::object();
        if (t_start) j["t_start"] = *t_start;
        if (t_end) j["t_end"] = *t_end;
        if (gamma) j["gamma"] = *gamma;
        if (rgb_step) j["rgb_step"] = *rgb_step;
        if (alpha_step) j["alpha_step"] = *alpha_step;
        if (alpha_min) j["alpha_min"] = *alpha_min;
        if (alpha_max) j["alpha_max"] = *alpha_max;
        if (retries) j["max_candidate_retries"] = *retries;
        return j;
    }
};

Json palette_list(const std::string& text, bool allow_free) {
    Json out = Json::array();
    for (const auto& p : split(text, ',')) {
        if (p.empty() && allow_free) {
            out.push_back(nullptr);
        } else {
            out.push_back(p);
        }
    }
    return out;
}

void load_inputs(const std::string& scene_path, const std::string& model_path, SceneHandle& scene,
                 ModelHandle* model) {
    check(blendopt_scene_load_file(scene_path.c_str(), &scene.ptr), scene_path);
    if (model) check(blendopt_model_load_file(model_path.c_str(), &model->ptr), model_path);
}

void print_breakdown(const std::string& breakdown_json) {
    const Json b = Json::parse(breakdown_json);
    std::printf("e_wa      %.9f\n", b["e_wa"].get<double>());
    std::printf("e_bd      %.9f\n", b["e_bd"].get<double>());
    std::printf("e_cs      %.9f\n", b["e_cs"].get<double>());
    std::printf("total     %.9f\n", b["total"].get<double>());
    if (!b["excluded"].empty()) {
        std::string ex;
        for (const auto& e : b["excluded"]) ex += (ex.empty() ? "" : ", ") + e.get<std::string>();
        std::printf("excluded  %s (zero weight)\n", ex.c_str());
    }
    std::printf("feasible  %s\n", b["constraints_ok"].get<bool>() ? "yes" : "no");
    for (const auto& n : b["notes"]) std::printf("note      %s\n", n.get<std::string>().c_str());
}

void render_to(const SceneHandle& scene, const std::string& solution, const Json& options, const std::string& out) {
    const std::string opts = options.dump();
    if (blendopt_scene_has_histogram(scene.ptr)) {
        char* svg = nullptr;
        check(blendopt_render_svg(scene.ptr, solution.c_str(), opts.c_str(), &svg), "render");
        spit(out, take(svg));
    } else {
        std::fprintf(stderr, "notice: raster scene, writing a region-color PNG to %s\n", out.c_str());
        check(blendopt_render_png(scene.ptr, solution.c_str(), opts.c_str(), out.c_str()), "render");
    }
}

void on_ready(int port, void* user) {
    const auto* host = static_cast<const std::string*>(user);
    std::printf("listening on http://%s:%d\n", host->c_str(), port);
    std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Palette, opacity and layer-order optimization for overlapped charts"};
    app.require_subcommand(1);
    app.set_version_flag("--version", blendopt_version());

    // optimize
    auto* opt = app.add_subcommand("optimize", "Optimize palette, opacities and render order");
    std::string scene_path, model_path, out_path, trace_path, render_path, fixed_palette, initial_palette;
    std::uint64_t seed = 0;
    ObjectiveFlags obj_flags;
    ScheduleFlags sched_flags;
    opt->add_option("--scene", scene_path, "Histogram spec or mask manifest (JSON)")->required();
    opt->add_option("--name-model", model_path, "Name model file")->required();
    opt->add_option("--seed", seed, "Random seed (default 0)");
    opt->add_option("--out", out_path, "Solution document to write")->required();
    opt->add_option("--trace", trace_path, "Annealing trace CSV to write");
    opt->add_option("--render", render_path, "SVG (histograms) or PNG (masks) to write");
    opt->add_option("--fixed-palette", fixed_palette, "Locked colors, e.g. \"#1f77b4,#ff7f0e\"; empty entries stay free");
    opt->add_option("--initial-palette", initial_palette, "Starting colors, one per class");
    obj_flags.attach(opt);
    sched_flags.attach(opt);

    // score
    auto* score = app.add_subcommand("score", "Score a solution document against a scene");
    std::string solution_path, score_out;
    ObjectiveFlags score_flags;
    score->add_option("--scene", scene_path, "Histogram spec or mask manifest (JSON)")->required();
    score->add_option("--name-model", model_path, "Name model file")->required();
    score->add_option("--solution", solution_path, "Solution document")->required();
    score->add_option("--out", score_out, "Write the breakdown JSON here instead of stdout");
    score_flags.attach(score);

    // render
    auto* render = app.add_subcommand("render", "Render a solution as SVG (histograms) or PNG (masks)");
    std::size_t width = 640, height = 400;
    std::optional<std::string> render_blend;
    render->add_option("--scene", scene_path, "Histogram spec or mask manifest (JSON)")->required();
    render->add_option("--solution", solution_path, "Solution document")->required();
    render->add_option("--out", out_path, "Output SVG or PNG path")->required();
    render->add_option("--width", width, "Canvas width (SVG)");
    render->add_option("--height", height, "Canvas height (SVG)");
    render->add_option("--blend-space", render_blend, "Override the document's blend space");

    // gen-stimuli
    auto* gen = app.add_subcommand("gen-stimuli", "Generate overlapped Gaussian histogram stimuli");
    std::size_t classes = 2, bins = 25, count = 1;
    std::string smoothness = "smooth", out_dir;
    gen->add_option("--classes", classes, "Number of classes (2-4)");
    gen->add_option("--smoothness", smoothness, "smooth | moderate | unsmooth");
    gen->add_option("--bins", bins, "Number of bins (default 25)");
    gen->add_option("--seed", seed, "Seed of the first stimulus");
    gen->add_option("--count", count, "Number of stimuli (seeds seed..seed+count-1)");
    auto* gen_out = gen->add_option("--out", out_path, "Output file (single stimulus)");
    gen->add_option("--out-dir", out_dir, "Output directory (one file per stimulus)")->excludes(gen_out);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    unsigned workers = 2, ttl = 3600;
    serve->add_option("--name-model", model_path, "Name model file")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 = any free port)");
    serve->add_option("--workers", workers, "Optimization worker threads");
    serve->add_option("--ttl", ttl, "Seconds a finished job stays retrievable");

    // convert-name-model
    auto* convert = app.add_subcommand("convert-name-model", "Convert a color-term survey export to a name model");
    std::string input_path;
    convert->add_option("--input", input_path, "Survey export JSON")->required();
    convert->add_option("--out", out_path, "Name model file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (*opt) {
            SceneHandle scene;
            ModelHandle model;
            load_inputs(scene_path, model_path, scene, &model);
            Json options = {{"config", obj_flags.to_json()}, {"schedule", sched_flags.to_json()}, {"seed", seed}};
            if (!fixed_palette.empty()) options["palette"]["fixed"] = palette_list(fixed_palette, true);
            if (!initial_palette.empty()) options["palette"]["initial"] = palette_list(initial_palette, false);
            ResultHandle result;
            check(blendopt_optimize(scene.ptr, model.ptr, options.dump().c_str(), &result.ptr), "optimize");
            char* doc = nullptr;
            check(blendopt_result_document(result.ptr, &doc), "optimize");
            const std::string document = take(doc);
            spit(out_path, document);
            if (!trace_path.empty()) {
                char* csv = nullptr;
                check(blendopt_result_trace_csv(result.ptr, &csv), "trace");
                spit(trace_path, take(csv));
            }
            if (!render_path.empty()) render_to(scene, document, Json::object(), render_path);
            const Json d = Json::parse(document);
            std::string palette;
            for (std::size_t k = 0; k < d["palette"].size(); ++k) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s%s@%.2f", k ? " " : "", d["palette"][k].get<std::string>().c_str(),
                              d["opacities"][k].get<double>());
                palette += buf;
            }
            std::printf("palette   %s\n", palette.c_str());
            std::printf("order     %s (bottom to top)\n", d["order"].dump().c_str());
            char* breakdown = nullptr;
            check(blendopt_result_breakdown(result.ptr, &breakdown), "optimize");
            print_breakdown(take(breakdown));
        } else if (*score) {
            SceneHandle scene;
            ModelHandle model;
            load_inputs(scene_path, model_path, scene, &model);
            const std::string solution = slurp(solution_path);
            const Json overrides = score_flags.to_json();
            std::string cfg;
            if (!overrides.empty()) {
                // Start from the document's config and apply the flags on top.
                Json base = Json::parse(solution, nullptr, false);
                Json merged = base.is_object() && base.contains("config") ? base["config"] : Json::object();
                merged.update(overrides);
                cfg = merged.dump();
            }
            char* breakdown = nullptr;
            check(blendopt_score(scene.ptr, model.ptr, solution.c_str(), cfg.empty() ? nullptr : cfg.c_str(), &breakdown),
                  "score");
            const std::string b = take(breakdown);
            if (score_out.empty()) {
                std::fputs(b.c_str(), stdout);
            } else {
                spit(score_out, b);
                print_breakdown(b);
            }
        } else if (*render) {
            SceneHandle scene;
            load_inputs(scene_path, "", scene, nullptr);
            Json options = {{"width", width}, {"height", height}};
            if (render_blend) options["blend_space"] = *render_blend;
            render_to(scene, slurp(solution_path), options, out_path);
        } else if (*gen) {
            if (out_path.empty() && out_dir.empty()) throw CliError{kExitBadInput, "gen-stimuli needs --out or --out-dir"};
            if (!out_path.empty() && count != 1) throw CliError{kExitBadInput, "--out writes one stimulus; use --out-dir"};
            if (!out_dir.empty()) {
                std::error_code ec;
                std::filesystem::create_directories(out_dir, ec);
                if (ec) throw CliError{kExitBadInput, out_dir + ": " + ec.message()};
            }
            for (std::size_t k = 0; k < count; ++k) {
                const Json params = {{"classes", classes}, {"smoothness", smoothness}, {"bins", bins}, {"seed", seed + k}};
                char* out = nullptr;
                check(blendopt_gen_stimulus(params.dump().c_str(), &out), "gen-stimuli");
                const Json doc = Json::parse(take(out));
                std::string path = out_path;
                if (path.empty()) {
                    path = out_dir + "/stimulus-" + smoothness + "-m" + std::to_string(classes) + "-s" +
                           std::to_string(seed + k) + ".json";
                }
                spit(path, doc["histogram"].dump(2) + "\n");
                std::printf("%s kl=%s\n", path.c_str(), doc["kl"].dump().c_str());
            }
        } else if (*serve) {
            ModelHandle model;
            check(blendopt_model_load_file(model_path.c_str(), &model.ptr), model_path);
            check(blendopt_serve(model.ptr, host.c_str(), port, workers, ttl, on_ready, &host), "serve");
        } else if (*convert) {
            const std::string bytes = slurp(input_path);
            char* out = nullptr;
            check(blendopt_convert_survey_export(bytes.data(), bytes.size(), &out), input_path);
            spit(out_path, take(out));
        }
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
