#include "blendopt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blendopt/errors.hpp"

namespace blendopt {

std::string_view to_string(SeparabilityScale s) {
    return s == SeparabilityScale::Raw ? "raw" : "normalized";
}

SeparabilityScale parse_separability_scale(std::string_view text) {
    if (text == "raw") return SeparabilityScale::Raw;
    if (text == "normalized") return SeparabilityScale::Normalized;
    throw ParseError("separability_scale", "expected 'raw' or 'normalized'");
}

std::string_view to_string(BlendSpace s) { return s == BlendSpace::Linear ? "linear" : "gamma"; }

BlendSpace parse_blend_space(std::string_view text) {
    if (text == "linear") return BlendSpace::Linear;
    if (text == "gamma") return BlendSpace::Gamma;
    throw ParseError("blend_space", "expected 'linear' or 'gamma'");
}

void ObjectiveConfig::validate() const {
    for (double w : {w_wa, w_bd, w_cs}) {
        if (!std::isfinite(w) || w < 0.0) throw ValidationError("weights must be finite and non-negative");
    }
    if (!std::isfinite(jnd_threshold) || !(jnd_threshold > 0.0)) throw ValidationError("JND threshold must be positive");
    if (!std::isfinite(bg_contrast) || bg_contrast < 0.0) {
        throw ValidationError("background contrast threshold must be non-negative");
    }
}

std::vector<RegionColor> resolve_region_colors(const SceneStructure& scene, const Solution& sol, BlendSpace space) {
    const std::size_t m = scene.class_count;
    if (sol.palette.size() != m || sol.opacities.size() != m || sol.order.size() != m) {
        throw ContractViolation("solution has " + std::to_string(sol.palette.size()) + " classes, scene has " +
                                std::to_string(m));
    }
    std::vector<RegionColor> out;
    out.reserve(scene.regions.size());
    for (const auto& r : scene.regions) {
        const Srgb8 c = region_color(r.signature, sol.palette, sol.opacities, sol.order, scene.background, space);
        out.push_back({c, srgb_to_lab(c)});
    }
    return out;
}

double class_weight(const SceneStructure& scene, std::size_t cls) {
    const std::size_t n = scene.regions.size();
    const std::size_t m = scene.class_count;
    if (cls >= m) throw ContractViolation("class_weight: class index out of range");

    const auto column_sum = [&](std::size_t c) {
        int s = 0;
        for (std::size_t j = 0; j < n; ++j) s += scene.membership(j, c);
        return s;
    };
    int max_count = 0;
    for (std::size_t c = 0; c < m; ++c) max_count = std::max(max_count, column_sum(c));

    double aggregate = 0.0;
    for (std::size_t j = 0; j < n; ++j) aggregate += scene.pair_share(cls, j) * scene.sizes[j];

    const double count_ratio = static_cast<double>(column_sum(cls)) / static_cast<double>(max_count);
    return count_ratio * (1.0 - scene.sizes[cls] / aggregate);
}

Objective::Objective(const SceneStructure& scene, const NameModel& model, ObjectiveConfig cfg)
    : scene_(&scene), model_(&model), cfg_(cfg), background_lab_(srgb_to_lab(scene.background)) {
    cfg_.validate();
    const std::size_t n = scene.regions.size();
    const std::size_t m = scene.class_count;
    sqrt_psi_.resize(m);
    for (std::size_t c = 0; c < m; ++c) sqrt_psi_[c] = std::sqrt(class_weight(scene, c));

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = m; j < n; ++j) {
            const int w = scene.pair_share(i, j);
            if (w > 0) {
                within_pairs_.push_back({i, j, static_cast<double>(w)});
                within_denominator_ += w;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (scene.pair_share(i, j) == 0) disjoint_pairs_.push_back({i, j, 1.0});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : scene.adjacency[i]) neighbor_pairs_.push_back({i, j, 1.0 + scene.sizes[i]});
    }
}

std::vector<RegionColor> Objective::resolve(const Solution& sol) const {
    return resolve_region_colors(*scene_, sol, cfg_.blend_space);
}

bool Objective::feasible(const std::vector<RegionColor>& colors) const {
    for (const auto& c : colors) {
        if (luminance_diff(c.lab, background_lab_) < cfg_.bg_contrast) return false;
    }
    for (std::size_t i = 0; i < colors.size(); ++i) {
        for (std::size_t j = i + 1; j < colors.size(); ++j) {
            if (!(ciede2000(colors[i].lab, colors[j].lab) > cfg_.jnd_threshold)) return false;
        }
    }
    return true;
}

ConstraintReport Objective::check(const std::vector<RegionColor>& colors) const {
    return check_constraints(*scene_, colors, cfg_);
}

double Objective::similarity(const RegionColor& x, const RegionColor& y) const {
    if (cfg_.similarity == SimilarityMeasure::Name) {
        return model_->bin_cosine(model_->bin_for(x.srgb), model_->bin_for(y.srgb));
    }
    return alt_similarity(cfg_.similarity, x.lab, y.lab);
}

double Objective::within_class(const std::vector<RegionColor>& colors) const {
    // Empty average contributes 0; the vacuous minimum is 1.
    if (within_pairs_.empty()) return 1.0;
    double num = 0.0;
    double min_s = std::numeric_limits<double>::infinity();
    for (const auto& p : within_pairs_) {
        const double s = similarity(colors[p.i], colors[p.j]);
        num += sqrt_psi_[p.i] * p.weight * s;
        min_s = std::min(min_s, s);
    }
    return num / within_denominator_ + min_s;
}

double Objective::between_class(const std::vector<RegionColor>& colors) const {
    if (disjoint_pairs_.empty()) return 0.0;
    double sum = 0.0;
    double max_s = -std::numeric_limits<double>::infinity();
    for (const auto& p : disjoint_pairs_) {
        const double s = similarity(colors[p.i], colors[p.j]);
        sum += s;
        max_s = std::max(max_s, s);
    }
    return sum / static_cast<double>(disjoint_pairs_.size()) + max_s;
}

double Objective::separability(const std::vector<RegionColor>& colors) const {
    if (neighbor_pairs_.empty()) return cfg_.separability_ceiling();
    const double scale = cfg_.separability_scale == SeparabilityScale::Normalized ? 0.01 : 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : neighbor_pairs_) {
        best = std::min(best, ciede2000(colors[p.i].lab, colors[p.j].lab) * scale * p.weight);
    }
    return best;
}

double Objective::total(const std::vector<RegionColor>& colors) const {
    double t = 0.0;
    if (cfg_.w_wa != 0.0) t += cfg_.w_wa * within_class(colors);
    if (cfg_.w_bd != 0.0) t -= cfg_.w_bd * between_class(colors);
    if (cfg_.w_cs != 0.0) t += cfg_.w_cs * separability(colors);
    return t;
}

ScoreBreakdown Objective::score(const Solution& sol) const { return score_colors(resolve(sol)); }

ScoreBreakdown Objective::score_colors(std::vector<RegionColor> colors) const {
    ScoreBreakdown out;
    out.e_wa = within_class(colors);
    out.e_bd = between_class(colors);
    out.e_cs = separability(colors);
    out.total = cfg_.w_wa * out.e_wa - cfg_.w_bd * out.e_bd + cfg_.w_cs * out.e_cs;
    auto report = check(colors);
    out.constraints_ok = report.ok;
    out.violations = std::move(report.violations);
    if (within_pairs_.empty()) out.notes.emplace_back("e_wa: no overlapping regions, min term taken as 1");
    if (disjoint_pairs_.empty()) out.notes.emplace_back("e_bd: no disjoint region pairs, term is 0");
    if (neighbor_pairs_.empty()) out.notes.emplace_back("e_cs: no adjacent regions, term set to its ceiling");
    out.region_colors = std::move(colors);
    return out;
}

double e_wa(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg,
            const NameModel& model) {
    return Objective(scene, model, cfg).within_class(colors);
}

double e_bd(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg,
            const NameModel& model) {
    return Objective(scene, model, cfg).between_class(colors);
}

double e_cs(const SceneStructure& scene, const std::vector<RegionColor>& colors, const ObjectiveConfig& cfg) {
    cfg.validate();
    if (colors.size() != scene.regions.size()) throw ContractViolation("e_cs: color count differs from region count");
    const double scale = cfg.separability_scale == SeparabilityScale::Normalized ? 0.01 : 1.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.regions.size(); ++i) {
        for (std::size_t j : scene.adjacency[i]) {
            best = std::min(best, ciede2000(colors[i].lab, colors[j].lab) * scale * (1.0 + scene.sizes[i]));
        }
    }
    return std::isinf(best) ? cfg.separability_ceiling() : best;
}

ConstraintReport check_constraints(const SceneStructure& scene, const std::vector<RegionColor>& colors,
                                   const ObjectiveConfig& cfg) {
    ConstraintReport r;
    const LabColor bg = srgb_to_lab(scene.background);
    for (std::size_t i = 0; i < colors.size(); ++i) {
        for (std::size_t j = i + 1; j < colors.size(); ++j) {
            const double d = ciede2000(colors[i].lab, colors[j].lab);
            if (!(d > cfg.jnd_threshold)) r.violations.push_back({ConstraintViolation::Kind::Jnd, i, j, d});
        }
    }
    for (std::size_t i = 0; i < colors.size(); ++i) {
        const double ld = luminance_diff(colors[i].lab, bg);
        if (ld < cfg.bg_contrast) r.violations.push_back({ConstraintViolation::Kind::Background, i, i, ld});
    }
    r.ok = r.violations.empty();
    return r;
}

ScoreBreakdown total_score(const SceneStructure& scene, const Solution& sol, const ObjectiveConfig& cfg,
                           const NameModel& model) {
    return Objective(scene, model, cfg).score(sol);
}

}  // namespace blendopt
