#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "blendopt/objective.hpp"

namespace blendopt {

using Rng = std::mt19937_64;

enum class MoveKind { Color, Opacity, Order, None };

std::string_view to_string(MoveKind k);

/// Restricts the search to a finite design space: each class picks its color
/// from its own anchor list and its opacity from a shared level list.
struct DiscreteMoveSet {
    std::vector<std::vector<Srgb8>> color_anchors;
    std::vector<double> opacity_levels;
};

struct AnnealSchedule {
    double t_start = 100000.0;
    double t_end = 0.001;
    double gamma = 0.99;
    /// Per-channel RGB offset magnitude for the color move.
    int rgb_step = 10;
    double alpha_step = 0.1;
    double alpha_min = 0.1;
    double alpha_max = 0.9;
    int max_candidate_retries = 100;
    std::uint64_t seed = 0;
    std::optional<DiscreteMoveSet> discrete;

    /// Throws ValidationError when the schedule cannot run.
    void validate() const;
    /// Number of loop iterations, i.e. temperatures t_start * gamma^k above t_end.
    std::size_t iteration_count() const;
};

/// Per-class palette constraints. A locked color never changes; an initial
/// color only seeds the first solution.
struct PaletteOptions {
    std::vector<std::optional<Srgb8>> locked;
    std::vector<Srgb8> initial;

    bool is_locked(std::size_t cls) const { return cls < locked.size() && locked[cls].has_value(); }
};

struct TraceRecord {
    std::size_t iteration = 0;
    double temperature = 0.0;
    double candidate_score = 0.0;
    double best_score = 0.0;
    MoveKind move = MoveKind::None;
    bool accepted = false;
    bool retries_exhausted = false;
};

struct AnnealTrace {
    std::vector<TraceRecord> records;

    /// Columns: iteration,temperature,candidate_score,best_score,move,accepted
    std::string to_csv() const;
};

class InfeasibleStart : public std::runtime_error {
public:
    InfeasibleStart(const std::string& what, ConstraintReport report)
        : std::runtime_error(what), report_(std::move(report)) {}

    const ConstraintReport& report() const { return report_; }

private:
    ConstraintReport report_;
};

/// Random (or palette-seeded) solution that satisfies both hard constraints.
/// Throws InfeasibleStart after max_candidate_retries failed draws.
Solution init_solution(const Objective& objective, const AnnealSchedule& schedule, Rng& rng,
                       const PaletteOptions& palette = {});

struct Perturbation {
    Solution solution;
    MoveKind move = MoveKind::None;
};

/// Applies exactly one move, each kind drawn with probability 1/3; a kind
/// that cannot change the solution (order swap with m == 1, color move with
/// every color locked) is redrawn.
Perturbation perturb(const Solution& sol, const AnnealSchedule& schedule, Rng& rng, const PaletteOptions& palette = {});

struct Candidate {
    Solution solution;
    std::vector<RegionColor> colors;
    MoveKind move = MoveKind::None;
    /// Number of perturbations drawn, including the accepted one.
    int draws = 0;
    /// When set, `solution` is the unchanged input.
    bool retries_exhausted = false;
};

/// Perturbs `current` until the candidate satisfies both hard constraints.
Candidate generate_candidate(const Objective& objective, const Solution& current, const AnnealSchedule& schedule,
                             Rng& rng, const PaletteOptions& palette = {});

/// Metropolis rule: improvements always pass, otherwise exp(delta / T).
bool accept(double delta_e, double temperature, Rng& rng);

struct OptimizeResult {
    Solution solution;
    ScoreBreakdown breakdown;
    AnnealTrace trace;
    std::uint64_t seed = 0;
};

/// Runs the annealing loop and returns the best feasible solution seen.
OptimizeResult optimize(const SceneStructure& scene, const NameModel& model, const ObjectiveConfig& cfg,
                        const AnnealSchedule& schedule, const PaletteOptions& palette = {});

struct BatchResult {
    std::vector<OptimizeResult> runs;
    /// Index of the highest total score; ties go to the earliest seed.
    std::size_t best = 0;
};

/// Independent runs, one per seed, spread over `threads` workers (0 = hardware concurrency).
/// Results do not depend on the thread count.
BatchResult optimize_batch(const SceneStructure& scene, const NameModel& model, const ObjectiveConfig& cfg,
                           const AnnealSchedule& schedule, std::span<const std::uint64_t> seeds,
                           const PaletteOptions& palette = {}, unsigned threads = 0);

}  // namespace blendopt
