#include <cstdio>
#include <cstdlib>
#include <string>

#include "doctest.h"

#include "blendopt/blendopt.h"

namespace {

std::string src(const std::string& rel) { return std::string(BLENDOPT_SOURCE_DIR) + "/" + rel; }

std::string take(char* s) {
    std::string out = s ? s : "";
    blendopt_string_free(s);
    return out;
}

const char* kFig3 = R"({"format": "blendopt-histogram", "version": 1, "background": "#ffffff",
  "bin_edges": [0, 1, 2, 3, 4, 5],
  "classes": [{"label": "A", "heights": [4, 4, 2, 0, 0]},
              {"label": "B", "heights": [0, 2, 4, 4, 0]},
              {"label": "C", "heights": [0, 0, 1, 2, 4]}]})";

const char* kShort = R"({"schedule": {"t_start": 10, "t_end": 0.01, "gamma": 0.97}, "seed": 3})";

struct Handles {
    blendopt_model* model = nullptr;
    blendopt_scene* scene = nullptr;
    Handles() {
        REQUIRE(blendopt_model_load_file(src("tests/fixtures/tiny_terms.model.json").c_str(), &model) == BLENDOPT_OK);
        REQUIRE(blendopt_scene_from_json(kFig3, std::string(kFig3).size(), nullptr, &scene) == BLENDOPT_OK);
    }
    ~Handles() {
        blendopt_scene_free(scene);
        blendopt_model_free(model);
    }
};

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(blendopt_version()) == "0.1.0");
    CHECK(std::string(blendopt_status_name(BLENDOPT_ERR_PARSE)) == "parse_error");
    CHECK(std::string(blendopt_status_name(BLENDOPT_OK)) == "ok");
}

TEST_CASE("model and scene handles") {
    Handles h;
    CHECK(blendopt_model_bin_count(h.model) == 9);
    CHECK(blendopt_model_term_count(h.model) == 6);
    CHECK(blendopt_scene_class_count(h.scene) == 3);
    CHECK(blendopt_scene_region_count(h.scene) == 6);
    CHECK(blendopt_scene_has_histogram(h.scene) == 1);
    char* desc = nullptr;
    REQUIRE(blendopt_scene_describe(h.scene, &desc) == BLENDOPT_OK);
    CHECK(take(desc).find("\"regions\"") != std::string::npos);
}

TEST_CASE("errors carry status, message and path") {
    blendopt_scene* scene = nullptr;
    const std::string bad = R"({"format": "blendopt-histogram", "version": 1, "bin_edges": [0, 1],
      "classes": [{"label": "A", "heights": ["x"]}]})";
    CHECK(blendopt_scene_from_json(bad.c_str(), bad.size(), nullptr, &scene) == BLENDOPT_ERR_PARSE);
    CHECK(scene == nullptr);
    CHECK(std::string(blendopt_last_error_path()) == "classes[0].heights[0]");
    CHECK(std::string(blendopt_last_error()).size() > 0);

    blendopt_model* model = nullptr;
    CHECK(blendopt_model_load_file("/nonexistent/model.json", &model) == BLENDOPT_ERR_IO);
    CHECK(blendopt_model_load_file(nullptr, &model) == BLENDOPT_ERR_INVALID_ARGUMENT);

    // identical coverage is a validation failure, not a parse failure
    const std::string dup = R"({"format": "blendopt-histogram", "version": 1, "bin_edges": [0, 1, 2],
      "classes": [{"label": "A", "heights": [1, 2]}, {"label": "B", "heights": [1, 2]}]})";
    const blendopt_status s = blendopt_scene_from_json(dup.c_str(), dup.size(), nullptr, &scene);
    CHECK((s == BLENDOPT_ERR_PARSE || s == BLENDOPT_ERR_VALIDATION));

    char* out = nullptr;
    CHECK(blendopt_gen_stimulus(R"({"classes": 9})", &out) == BLENDOPT_ERR_PARSE);
    CHECK(std::string(blendopt_last_error_path()) == "params.classes");

    // a successful call clears the previous error
    REQUIRE(blendopt_gen_stimulus(R"({"classes": 2, "seed": 1})", &out) == BLENDOPT_OK);
    blendopt_string_free(out);
    CHECK(std::string(blendopt_last_error()).empty());
}

TEST_CASE("optimize, score and render round trip") {
    Handles h;
    blendopt_result* result = nullptr;
    REQUIRE(blendopt_optimize(h.scene, h.model, kShort, &result) == BLENDOPT_OK);
    char* doc = nullptr;
    REQUIRE(blendopt_result_document(result, &doc) == BLENDOPT_OK);
    const std::string document = take(doc);
    char* trace = nullptr;
    REQUIRE(blendopt_result_trace_csv(result, &trace) == BLENDOPT_OK);
    CHECK(take(trace).rfind("iteration,", 0) == 0);

    char* bd = nullptr;
    REQUIRE(blendopt_result_breakdown(result, &bd) == BLENDOPT_OK);
    const std::string breakdown = take(bd);

    char* rescored = nullptr;
    REQUIRE(blendopt_score(h.scene, h.model, document.c_str(), nullptr, &rescored) == BLENDOPT_OK);
    CHECK(take(rescored) == breakdown);

    char* svg = nullptr;
    REQUIRE(blendopt_render_svg(h.scene, document.c_str(), R"({"width": 320, "height": 200})", &svg) == BLENDOPT_OK);
    CHECK(take(svg).rfind("<svg", 0) == 0);

    // same seed, same bytes
    blendopt_result* again = nullptr;
    REQUIRE(blendopt_optimize(h.scene, h.model, kShort, &again) == BLENDOPT_OK);
    REQUIRE(blendopt_result_document(again, &doc) == BLENDOPT_OK);
    CHECK(take(doc) == document);
    CHECK(blendopt_result_total(again) == blendopt_result_total(result));
    blendopt_result_free(again);
    blendopt_result_free(result);
}

TEST_CASE("infeasible start and bad options") {
    Handles h;
    blendopt_result* result = nullptr;
    CHECK(blendopt_optimize(h.scene, h.model, R"({"config": {"jnd_threshold": 500}})", &result) ==
          BLENDOPT_ERR_INFEASIBLE_START);
    CHECK(result == nullptr);
    CHECK(blendopt_optimize(h.scene, h.model, R"({"schedule": {"gamma": 2}})", &result) == BLENDOPT_ERR_PARSE);
    CHECK(std::string(blendopt_last_error_path()) == "schedule");
    CHECK(blendopt_optimize(h.scene, h.model, "{", &result) == BLENDOPT_ERR_PARSE);
    CHECK(blendopt_optimize(nullptr, h.model, nullptr, &result) == BLENDOPT_ERR_INVALID_ARGUMENT);
}
