#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "blendopt/objective.hpp"

// Verification harness. Nothing here shares code with the Objective
// evaluator; only color conversion, compositing and the name model are reused.

namespace blendopt::oracle {

/// Literal nested-loop evaluation of the objective, without caching.
ScoreBreakdown reference_score(const SceneStructure& scene, const Solution& sol, const ObjectiveConfig& cfg,
                               const NameModel& model);

/// Brute-force pair scan of both hard constraints.
bool satisfies_constraints(const SceneStructure& scene, const std::vector<RegionColor>& colors,
                           const ObjectiveConfig& cfg);

struct CandidateGrid {
    std::vector<std::vector<Srgb8>> color_anchors;
    std::vector<double> opacity_levels;
    /// Empty means every permutation of the classes.
    std::vector<RenderOrder> orders;
    std::size_t cap = 10'000'000;

    /// Saturates at SIZE_MAX on overflow.
    std::size_t combination_count() const;
};

class InfeasibleGrid : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridOptimum {
    Solution solution;
    double score = 0.0;
    std::size_t feasible_count = 0;
    std::size_t combination_count = 0;
};

/// Enumerates palette x opacity x order combinations, keeps the feasible
/// maximum of reference_score. Ties resolve to the earliest combination.
/// `threads` partitions the enumeration; the result does not depend on it.
GridOptimum exhaustive_best(const SceneStructure& scene, const CandidateGrid& grid, const ObjectiveConfig& cfg,
                            const NameModel& model, unsigned threads = 1);

/// Decodes combination `index` of the grid (palette digits vary fastest).
Solution grid_solution(const CandidateGrid& grid, std::size_t class_count, std::size_t index);

}  // namespace blendopt::oracle
