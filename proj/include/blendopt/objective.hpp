#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blendopt/color.hpp"
#include "blendopt/compositing.hpp"
#include "blendopt/name_model.hpp"
#include "blendopt/scene.hpp"

namespace blendopt {

enum class SeparabilityScale { Raw, Normalized };

std::string_view to_string(SeparabilityScale s);
SeparabilityScale parse_separability_scale(std::string_view text);
std::string_view to_string(BlendSpace s);
BlendSpace parse_blend_space(std::string_view text);

struct ObjectiveConfig {
    double w_wa = 1.0;
    double w_bd = 1.0;
    double w_cs = 1.0;
    /// Minimum CIEDE2000 distance between any two region colors (strict).
    double jnd_threshold = 3.0;
    /// Minimum |L| difference between each region color and the background.
    double bg_contrast = 5.0;
    SimilarityMeasure similarity = SimilarityMeasure::Name;
    /// Normalized divides CIEDE2000 by 100 inside the separability term.
    SeparabilityScale separability_scale = SeparabilityScale::Normalized;
    BlendSpace blend_space = BlendSpace::Linear;

    /// Throws ValidationError when a threshold or weight is out of range.
    void validate() const;
    double separability_ceiling() const { return separability_scale == SeparabilityScale::Normalized ? 1.0 : 100.0; }
};

/// Palette P, opacities A and rendering order O for m classes.
struct Solution {
    std::vector<Srgb8> palette;
    std::vector<double> opacities;
    RenderOrder order;

    std::size_t class_count() const { return palette.size(); }
    friend bool operator==(const Solution&, const Solution&) = default;
};

struct RegionColor {
    Srgb8 srgb;
    LabColor lab;
};

struct ConstraintViolation {
    enum class Kind { Jnd, Background };
    Kind kind = Kind::Jnd;
    std::size_t i = 0;
    /// Second region for Jnd; unused for Background.
    std::size_t j = 0;
    double value = 0.0;
};

struct ConstraintReport {
    bool ok = true;
    std::vector<ConstraintViolation> violations;
};

struct ScoreBreakdown {
    double e_wa = 0.0;
    double e_bd = 0.0;
    double e_cs = 0.0;
    double total = 0.0;
    bool constraints_ok = false;
    std::vector<RegionColor> region_colors;
    std::vector<ConstraintViolation> violations;
    /// Vacuous-term conventions that were applied, e.g. "e_bd: no disjoint region pairs".
    std::vector<std::string> notes;
};

/// Throws ContractViolation when the solution does not match the scene.
std::vector<RegionColor> resolve_region_colors(const SceneStructure& scene, const Solution& sol,
                                               BlendSpace space = BlendSpace::Linear);

/// Difficulty weight of class i, in [0, 1).
double class_weight(const SceneStructure& scene, std::size_t cls);

double e_wa(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg,
            const NameModel& model);
double e_bd(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg,
            const NameModel& model);
double e_cs(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg);

ConstraintReport check_constraints(const SceneStructure& scene, const std::vector<RegionColor>& colors,
                                   const ObjectiveConfig& cfg);

ScoreBreakdown total_score(const SceneStructure& scene, const Solution& sol, const ObjectiveConfig& cfg,
                           const NameModel& model);

/// Evaluator bound to one scene: pair lists, class weights and similarity
/// lookups are prepared once and reused across many solutions.
class Objective {
public:
    Objective(const SceneStructure& scene, const NameModel& model, ObjectiveConfig cfg);

    const SceneStructure& scene() const { return *scene_; }
    const NameModel& model() const { return *model_; }
    const ObjectiveConfig& config() const { return cfg_; }

    std::vector<RegionColor> resolve(const Solution& sol) const;
    /// True when both hard constraints hold. Exits on the first violation.
    bool feasible(const std::vector<RegionColor>& colors) const;
    ConstraintReport check(const std::vector<RegionColor>& colors) const;

    double similarity(const RegionColor& x, const RegionColor& y) const;

    double within_class(const std::vector<RegionColor>& colors) const;
    double between_class(const std::vector<RegionColor>& colors) const;
    double separability(const std::vector<RegionColor>& colors) const;

    /// Weighted sum only; skips the constraint report.
    double total(const std::vector<RegionColor>& colors) const;
    ScoreBreakdown score(const Solution& sol) const;
    ScoreBreakdown score_colors(std::vector<RegionColor> colors) const;

private:
    struct Pair {
        std::size_t i;
        std::size_t j;
        double weight;
    };

    const SceneStructure* scene_;
    const NameModel* model_;
    ObjectiveConfig cfg_;
    LabColor background_lab_;
    std::vector<double> sqrt_psi_;
    std::vector<Pair> within_pairs_;
    double within_denominator_ = 0.0;
    std::vector<Pair> disjoint_pairs_;
    std::vector<Pair> neighbor_pairs_;
};

}  // namespace blendopt
