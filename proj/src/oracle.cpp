#include "blendopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "blendopt/errors.hpp"

namespace blendopt::oracle {
namespace {

double pair_similarity(const RegionColor& x, const RegionColor& y, const ObjectiveConfig& cfg,
                       const NameModel& model) {
    if (cfg.similarity == SimilarityMeasure::Name) return name_similarity(model, x.lab, y.lab);
    return alt_similarity(cfg.similarity, x.lab, y.lab);
}

std::vector<RenderOrder> all_orders(std::size_t m) {
    std::vector<std::size_t> p(m);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::vector<RenderOrder> out;
    do {
        out.emplace_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

std::size_t factorial(std::size_t m) {
    std::size_t f = 1;
    for (std::size_t k = 2; k <= m; ++k) f = saturating_mul(f, k);
    return f;
}

}  // namespace

ScoreBreakdown reference_score(const SceneStructure& scene, const Solution& sol, const ObjectiveConfig& cfg,
                               const NameModel& model) {
    cfg.validate();
    const std::size_t n = scene.regions.size();
    const std::size_t m = scene.class_count;
    if (sol.palette.size() != m || sol.opacities.size() != m || sol.order.size() != m) {
        throw ContractViolation("reference_score: solution size differs from class count");
    }

    std::vector<RegionColor> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Srgb8 s = region_color(scene.regions[i].signature, sol.palette, sol.opacities, sol.order,
                                     scene.background, cfg.blend_space);
        c[i] = {s, srgb_to_lab(s)};
    }

    // W = M M^T, recomputed from the membership matrix.
    std::vector<std::vector<double>> W(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < m; ++k) W[i][j] += scene.membership(i, k) * scene.membership(j, k);
        }
    }
    const std::vector<double>& RS = scene.sizes;

    std::vector<double> column(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < n; ++j) column[k] += scene.membership(j, k);
    }
    const double max_column = *std::max_element(column.begin(), column.end());
    std::vector<double> psi(m);
    for (std::size_t i = 0; i < m; ++i) {
        double agg = 0.0;
        for (std::size_t j = 0; j < n; ++j) agg += W[i][j] * RS[j];
        psi[i] = column[i] / max_column * (1.0 - RS[i] / agg);
    }

    ScoreBreakdown out;

    double num = 0.0;
    double den = 0.0;
    double min_s = 1.0;
    bool any_within = false;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = m; j < n; ++j) {
            if (W[i][j] <= 0.0) continue;
            const double s = pair_similarity(c[i], c[j], cfg, model);
            num += std::sqrt(psi[i]) * W[i][j] * s;
            den += W[i][j];
            min_s = any_within ? std::min(min_s, s) : s;
            any_within = true;
        }
    }
    out.e_wa = (den > 0.0 ? num / den : 0.0) + min_s;

    double sum = 0.0;
    double count = 0.0;
    double max_s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double delta = W[i][j] == 0.0 ? 1.0 : 0.0;
            if (delta == 0.0) continue;
            const double s = pair_similarity(c[i], c[j], cfg, model);
            sum += delta * s;
            max_s = count == 0.0 ? s : std::max(max_s, s);
            count += delta;
        }
    }
    out.e_bd = count > 0.0 ? sum / count + max_s : 0.0;

    const double scale = cfg.separability_scale == SeparabilityScale::Normalized ? 100.0 : 1.0;
    bool any_neighbor = false;
    double sep = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : scene.adjacency[i]) {
            const double v = ciede2000(c[i].lab, c[j].lab) / scale * (1.0 + RS[i]);
            sep = any_neighbor ? std::min(sep, v) : v;
            any_neighbor = true;
        }
    }
    out.e_cs = any_neighbor ? sep : (cfg.separability_scale == SeparabilityScale::Normalized ? 1.0 : 100.0);

    out.total = cfg.w_wa * out.e_wa - cfg.w_bd * out.e_bd + cfg.w_cs * out.e_cs;
    out.constraints_ok = satisfies_constraints(scene, c, cfg);
    out.region_colors = std::move(c);
    return out;
}

bool satisfies_constraints(const SceneStructure& scene, const std::vector<RegionColor>& colors,
                           const ObjectiveConfig& cfg) {
    const LabColor bg = srgb_to_lab(scene.background);
    for (std::size_t i = 0; i < colors.size(); ++i) {
        if (!(std::abs(colors[i].lab.L - bg.L) >= cfg.bg_contrast)) return false;
        for (std::size_t j = 0; j < colors.size(); ++j) {
            if (i != j && !(ciede2000(colors[i].lab, colors[j].lab) > cfg.jnd_threshold)) return false;
        }
    }
    return true;
}

std::size_t CandidateGrid::combination_count() const {
    std::size_t total = 1;
    for (const auto& a : color_anchors) total = saturating_mul(total, a.size());
    for (std::size_t k = 0; k < color_anchors.size(); ++k) total = saturating_mul(total, opacity_levels.size());
    return saturating_mul(total, orders.empty() ? factorial(color_anchors.size()) : orders.size());
}

Solution grid_solution(const CandidateGrid& grid, std::size_t m, std::size_t index) {
    Solution sol;
    sol.palette.resize(m);
    sol.opacities.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t base = grid.color_anchors[k].size();
        sol.palette[k] = grid.color_anchors[k][index % base];
        index /= base;
    }
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t base = grid.opacity_levels.size();
        sol.opacities[k] = grid.opacity_levels[index % base];
        index /= base;
    }
    if (grid.orders.empty()) {
        std::vector<std::size_t> p(m);
        std::iota(p.begin(), p.end(), std::size_t{0});
        for (std::size_t k = 0; k < index; ++k) std::next_permutation(p.begin(), p.end());
        sol.order = RenderOrder(std::move(p));
    } else {
        sol.order = grid.orders.at(index);
    }
    return sol;
}

GridOptimum exhaustive_best(const SceneStructure& scene, const CandidateGrid& grid, const ObjectiveConfig& cfg,
                            const NameModel& model, unsigned threads) {
    const std::size_t m = scene.class_count;
    if (grid.color_anchors.size() != m) throw ContractViolation("grid needs one anchor list per class");
    for (const auto& a : grid.color_anchors) {
        if (a.empty()) throw ContractViolation("grid has an empty anchor list");
    }
    if (grid.opacity_levels.empty()) throw ContractViolation("grid has no opacity levels");
    const std::size_t total = grid.combination_count();
    if (total > grid.cap) {
        throw ContractViolation("grid has " + std::to_string(total) + " combinations, above the cap of " +
                                std::to_string(grid.cap));
    }

    CandidateGrid expanded = grid;
    if (expanded.orders.empty()) expanded.orders = all_orders(m);

    struct Partial {
        std::size_t index = std::numeric_limits<std::size_t>::max();
        double score = -std::numeric_limits<double>::infinity();
        std::size_t feasible = 0;
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(total, 1))));
    std::vector<Partial> partial(threads);
    const auto scan = [&](unsigned part) {
        const std::size_t lo = total * part / threads;
        const std::size_t hi = total * (part + 1) / threads;
        Partial& best = partial[part];
        for (std::size_t idx = lo; idx < hi; ++idx) {
            const Solution sol = grid_solution(expanded, m, idx);
            const ScoreBreakdown s = reference_score(scene, sol, cfg, model);
            if (!s.constraints_ok) continue;
            ++best.feasible;
            if (s.total > best.score) {
                best.score = s.total;
                best.index = idx;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned p = 1; p < threads; ++p) pool.emplace_back(scan, p);
        scan(0);
    }

    GridOptimum out;
    out.combination_count = total;
    Partial best;
    for (const auto& p : partial) {
        out.feasible_count += p.feasible;
        if (p.score > best.score) best = p;
    }
    if (out.feasible_count == 0) throw InfeasibleGrid("no feasible combination in the candidate grid");
    out.solution = grid_solution(expanded, m, best.index);
    out.score = best.score;
    return out;
}

}  // namespace blendopt::oracle
