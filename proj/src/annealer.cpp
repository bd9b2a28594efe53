#include "blendopt/annealer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "blendopt/errors.hpp"

namespace blendopt {
namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t anchor_of(const std::vector<Srgb8>& anchors, Srgb8 c) {
    const auto it = std::find(anchors.begin(), anchors.end(), c);
    return it == anchors.end() ? 0 : static_cast<std::size_t>(it - anchors.begin());
}

std::size_t level_of(const std::vector<double>& levels, double a) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < levels.size(); ++k) {
        if (std::abs(levels[k] - a) < std::abs(levels[best] - a)) best = k;
    }
    return best;
}

bool color_move_possible(const Solution& sol, const AnnealSchedule& schedule, const PaletteOptions& palette) {
    for (std::size_t c = 0; c < sol.class_count(); ++c) {
        if (palette.is_locked(c)) continue;
        if (!schedule.discrete || schedule.discrete->color_anchors[c].size() > 1) return true;
    }
    return false;
}

bool opacity_move_possible(const AnnealSchedule& schedule) {
    return !schedule.discrete || schedule.discrete->opacity_levels.size() > 1;
}

Solution random_solution(std::size_t m, const AnnealSchedule& schedule, Rng& rng, const PaletteOptions& palette) {
    Solution sol;
    sol.palette.resize(m);
    sol.opacities.resize(m);
    std::uniform_int_distribution<int> channel(0, 255);
    for (std::size_t c = 0; c < m; ++c) {
        if (palette.is_locked(c)) {
            sol.palette[c] = *palette.locked[c];
        } else if (c < palette.initial.size()) {
            sol.palette[c] = palette.initial[c];
        } else if (schedule.discrete) {
            const auto& anchors = schedule.discrete->color_anchors[c];
            sol.palette[c] = anchors[uniform_index(rng, anchors.size())];
        } else {
            sol.palette[c] = {static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng)),
                              static_cast<std::uint8_t>(channel(rng))};
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        if (schedule.discrete) {
            const auto& levels = schedule.discrete->opacity_levels;
            sol.opacities[c] = levels[uniform_index(rng, levels.size())];
        } else {
            sol.opacities[c] = std::uniform_real_distribution<double>(schedule.alpha_min, schedule.alpha_max)(rng);
        }
    }
    std::vector<std::size_t> order(m);
    for (std::size_t c = 0; c < m; ++c) order[c] = c;
    std::shuffle(order.begin(), order.end(), rng);
    sol.order = RenderOrder(std::move(order));
    return sol;
}

}  // namespace

std::string_view to_string(MoveKind k) {
    switch (k) {
        case MoveKind::Color: return "color";
        case MoveKind::Opacity: return "opacity";
        case MoveKind::Order: return "order";
        case MoveKind::None: return "none";
    }
    return "none";
}

void AnnealSchedule::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("cooling coefficient must lie in (0, 1)");
    if (!(t_end > 0.0) || !(t_end < t_start)) throw ValidationError("need 0 < t_end < t_start");
    if (rgb_step <= 0 || !(alpha_step > 0.0)) throw ValidationError("perturbation steps must be positive");
    if (!(alpha_min >= 0.0 && alpha_min < alpha_max && alpha_max <= 1.0)) {
        throw ValidationError("opacity bounds must satisfy 0 <= min < max <= 1");
    }
    if (max_candidate_retries <= 0) throw ValidationError("max_candidate_retries must be positive");
    if (discrete) {
        if (discrete->opacity_levels.empty()) throw ValidationError("discrete move set has no opacity levels");
        for (double a : discrete->opacity_levels) {
            if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("discrete opacity level outside [0, 1]");
        }
        for (const auto& anchors : discrete->color_anchors) {
            if (anchors.empty()) throw ValidationError("discrete move set has a class without anchors");
        }
    }
}

std::size_t AnnealSchedule::iteration_count() const {
    std::size_t n = 0;
    for (double t = t_start; t > t_end; t *= gamma) ++n;
    return n;
}

std::string AnnealTrace::to_csv() const {
    std::string out = "iteration,temperature,candidate_score,best_score,move,accepted\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s,%d\n", r.iteration, r.temperature,
                      r.candidate_score, r.best_score, std::string(to_string(r.move)).c_str(), r.accepted ? 1 : 0);
        out += buf;
    }
    return out;
}

Solution init_solution(const Objective& objective, const AnnealSchedule& schedule, Rng& rng,
                       const PaletteOptions& palette) {
    schedule.validate();
    const std::size_t m = objective.scene().class_count;
    if (schedule.discrete && schedule.discrete->color_anchors.size() != m) {
        throw ValidationError("discrete move set needs one anchor list per class");
    }
    if (!palette.initial.empty() && palette.initial.size() != m) {
        throw ValidationError("initial palette has " + std::to_string(palette.initial.size()) + " colors, scene has " +
                              std::to_string(m) + " classes");
    }
    if (!palette.locked.empty() && palette.locked.size() != m) {
        throw ValidationError("fixed palette has " + std::to_string(palette.locked.size()) + " entries, scene has " +
                              std::to_string(m) + " classes");
    }

    ConstraintReport last;
    for (int attempt = 0; attempt < schedule.max_candidate_retries; ++attempt) {
        Solution sol = random_solution(m, schedule, rng, palette);
        const auto colors = objective.resolve(sol);
        if (objective.feasible(colors)) return sol;
        if (attempt + 1 == schedule.max_candidate_retries) last = objective.check(colors);
    }
    throw InfeasibleStart("no feasible initial solution after " + std::to_string(schedule.max_candidate_retries) +
                              " draws (" + std::to_string(last.violations.size()) + " constraint violations in the last)",
                          std::move(last));
}

Perturbation perturb(const Solution& sol, const AnnealSchedule& schedule, Rng& rng, const PaletteOptions& palette) {
    const std::size_t m = sol.class_count();
    const bool can_color = color_move_possible(sol, schedule, palette);
    const bool can_alpha = opacity_move_possible(schedule);
    const bool can_order = m > 1;
    if (!can_color && !can_alpha && !can_order) return {sol, MoveKind::None};

    for (;;) {
        const double p = uniform01(rng);
        Perturbation out{sol, MoveKind::None};
        if (p < 1.0 / 3.0) {
            if (!can_color) continue;
            std::size_t cls;
            do {
                cls = uniform_index(rng, m);
            } while (palette.is_locked(cls) ||
                     (schedule.discrete && schedule.discrete->color_anchors[cls].size() < 2));
            Srgb8& c = out.solution.palette[cls];
            if (schedule.discrete) {
                const auto& anchors = schedule.discrete->color_anchors[cls];
                const std::size_t cur = anchor_of(anchors, c);
                std::size_t next = uniform_index(rng, anchors.size() - 1);
                if (next >= cur) ++next;
                c = anchors[next];
            } else {
                std::uniform_int_distribution<int> offset(-schedule.rgb_step, schedule.rgb_step);
                const auto shift = [&](std::uint8_t v) {
                    return static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + offset(rng), 0, 255));
                };
                c.r = shift(c.r);
                c.g = shift(c.g);
                c.b = shift(c.b);
            }
            out.move = MoveKind::Color;
        } else if (p < 2.0 / 3.0) {
            if (!can_alpha) continue;
            const std::size_t cls = uniform_index(rng, m);
            const bool up = uniform01(rng) < 0.5;
            double& a = out.solution.opacities[cls];
            if (schedule.discrete) {
                const auto& levels = schedule.discrete->opacity_levels;
                std::size_t k = level_of(levels, a);
                if (up && k + 1 < levels.size()) ++k;
                else if (!up && k > 0) --k;
                a = levels[k];
            } else {
                a = std::clamp(a + (up ? schedule.alpha_step : -schedule.alpha_step), schedule.alpha_min,
                               schedule.alpha_max);
            }
            out.move = MoveKind::Opacity;
        } else {
            if (!can_order) continue;
            const std::size_t p1 = uniform_index(rng, m);
            std::size_t p2 = uniform_index(rng, m - 1);
            if (p2 >= p1) ++p2;
            out.solution.order.swap_positions(p1, p2);
            out.move = MoveKind::Order;
        }
        return out;
    }
}

Candidate generate_candidate(const Objective& objective, const Solution& current, const AnnealSchedule& schedule,
                             Rng& rng, const PaletteOptions& palette) {
    Candidate out;
    for (int draw = 1; draw <= schedule.max_candidate_retries; ++draw) {
        auto [sol, move] = perturb(current, schedule, rng, palette);
        auto colors = objective.resolve(sol);
        if (objective.feasible(colors)) {
            out.solution = std::move(sol);
            out.colors = std::move(colors);
            out.move = move;
            out.draws = draw;
            return out;
        }
    }
    out.solution = current;
    out.colors = objective.resolve(current);
    out.draws = schedule.max_candidate_retries;
    out.retries_exhausted = true;
    return out;
}

bool accept(double delta_e, double temperature, Rng& rng) {
    if (delta_e > 0.0) return true;
    return uniform01(rng) < std::exp(delta_e / temperature);
}

OptimizeResult optimize(const SceneStructure& scene, const NameModel& model, const ObjectiveConfig& cfg,
                        const AnnealSchedule& schedule, const PaletteOptions& palette) {
    schedule.validate();
    const Objective objective(scene, model, cfg);
    Rng rng(schedule.seed);

    Solution current = init_solution(objective, schedule, rng, palette);
    double current_score = objective.total(objective.resolve(current));
    Solution best = current;
    double best_score = current_score;

    OptimizeResult result;
    result.seed = schedule.seed;
    result.trace.records.reserve(schedule.iteration_count());

    std::size_t iteration = 0;
    for (double t = schedule.t_start; t > schedule.t_end; t *= schedule.gamma, ++iteration) {
        Candidate cand = generate_candidate(objective, current, schedule, rng, palette);
        TraceRecord rec;
        rec.iteration = iteration;
        rec.temperature = t;
        rec.move = cand.move;
        if (cand.retries_exhausted) {
            rec.candidate_score = current_score;
            rec.retries_exhausted = true;
        } else {
            const double cand_score = objective.total(cand.colors);
            rec.candidate_score = cand_score;
            if (accept(cand_score - current_score, t, rng)) {
                current = std::move(cand.solution);
                current_score = cand_score;
                rec.accepted = true;
                if (current_score > best_score) {
                    best = current;
                    best_score = current_score;
                }
            }
        }
        rec.best_score = best_score;
        result.trace.records.push_back(rec);
    }

    result.breakdown = objective.score(best);
    result.solution = std::move(best);
    return result;
}

BatchResult optimize_batch(const SceneStructure& scene, const NameModel& model, const ObjectiveConfig& cfg,
                           const AnnealSchedule& schedule, std::span<const std::uint64_t> seeds,
                           const PaletteOptions& palette, unsigned threads) {
    BatchResult out;
    if (seeds.empty()) throw ContractViolation("optimize_batch: no seeds");
    out.runs.resize(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) {
            try {
                AnnealSchedule s = schedule;
                s.seed = seeds[k];
                out.runs[k] = optimize(scene, model, cfg, s, palette);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, seeds.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    for (std::size_t k = 1; k < out.runs.size(); ++k) {
        if (out.runs[k].breakdown.total > out.runs[out.best].breakdown.total) out.best = k;
    }
    return out;
}

}  // namespace blendopt
