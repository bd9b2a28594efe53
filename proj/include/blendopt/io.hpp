#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "blendopt/annealer.hpp"
#include "blendopt/objective.hpp"
#include "blendopt/scene.hpp"
#include "blendopt/stimulus.hpp"

// JSON documents exchanged by the CLI, the HTTP service and the C API.
// Every reader throws ParseError whose where() is a dotted field path
// ("config.weights[1]") so callers can report the offending field.
namespace blendopt::io {

using Json = nlohmann::json;

inline constexpr std::string_view kHistogramFormat = "blendopt-histogram";
inline constexpr std::string_view kMaskManifestFormat = "blendopt-mask-manifest";
inline constexpr std::string_view kSolutionFormat = "blendopt-solution";

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Throws ParseError at `where` when the text is not JSON.
Json parse_json(std::string_view text, const std::string& where = "");

HistogramSpec histogram_from_json(const Json& j, const std::string& where = "");
Json histogram_to_json(const HistogramSpec& spec);

LayerMaskSet mask_manifest_from_json(const Json& j, const std::filesystem::path& base_dir,
                                     MaskOptions* options = nullptr, const std::string& where = "");

/// Scene from an inline document; mask manifests resolve layer files
/// relative to base_dir.
SceneStructure scene_from_json(const Json& j, const std::filesystem::path& base_dir = ".",
                               const std::string& where = "");
SceneStructure load_scene_file(const std::filesystem::path& path);

/// Regions, membership, pair share, sizes and adjacency.
Json scene_to_json(const SceneStructure& scene);

/// Missing keys keep their defaults.
ObjectiveConfig config_from_json(const Json& j, const std::string& where = "config");
Json config_to_json(const ObjectiveConfig& cfg);

AnnealSchedule schedule_from_json(const Json& j, const std::string& where = "schedule");
Json schedule_to_json(const AnnealSchedule& schedule);

/// {"fixed": ["#hex" | null, ...], "initial": ["#hex", ...]}
PaletteOptions palette_options_from_json(const Json& j, std::size_t class_count, const std::string& where = "palette");

/// {"palette": [...], "opacities": [...], "order": [...]}, sizes checked against class_count.
Solution solution_from_json(const Json& j, std::size_t class_count, const std::string& where = "solution");
Json solution_to_json(const Solution& sol);

Json breakdown_to_json(const SceneStructure& scene, const ScoreBreakdown& b, const ObjectiveConfig& cfg);

StimulusParams stimulus_params_from_json(const Json& j, const std::string& where = "params");

struct SolutionDocument {
    std::vector<std::string> classes;
    Solution solution;
    ObjectiveConfig config;
    AnnealSchedule schedule;
    std::uint64_t seed = 0;
};

/// Deterministic bytes for identical inputs.
std::string write_solution_document(const SceneStructure& scene, const Solution& sol, const ScoreBreakdown& b,
                                    const ObjectiveConfig& cfg, const AnnealSchedule& schedule, std::uint64_t seed);
SolutionDocument read_solution_document(std::string_view bytes);

}  // namespace blendopt::io
