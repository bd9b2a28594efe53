// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "blendopt/annealer.hpp"
#include "blendopt/color.hpp"
#include "blendopt/compositing.hpp"
#include "blendopt/io.hpp"
#include "blendopt/name_model.hpp"
#include "blendopt/objective.hpp"
#include "blendopt/oracle.hpp"
#include "blendopt/scene.hpp"
#include "blendopt/stimulus.hpp"
#include "ciede2000_pairs.hpp"
#include "support.hpp"

using namespace blendopt;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::string> failed;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) failed.push_back(name);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Checker written against the raw definitions, not the objective module.
bool independent_constraints(const SceneStructure& scene, const Solution& sol, const ObjectiveConfig& cfg,
                             std::string* why) {
    const LinearRgb bg = to_linear(scene.background);
    const LabColor bg_lab = srgb_to_lab(scene.background);
    std::vector<LabColor> labs;
    for (const auto& region : scene.regions) {
        std::vector<std::size_t> layers(region.signature.begin(), region.signature.end());
        std::sort(layers.begin(), layers.end(),
                  [&](std::size_t a, std::size_t b) { return sol.order.rank_of(a) < sol.order.rank_of(b); });
        double r, g, b;
        if (cfg.blend_space == BlendSpace::Linear) {
            r = bg.r, g = bg.g, b = bg.b;
        } else {
            r = scene.background.r / 255.0, g = scene.background.g / 255.0, b = scene.background.b / 255.0;
        }
        for (std::size_t cls : layers) {
            const Srgb8 c = sol.palette[cls];
            const double a = sol.opacities[cls];
            const auto ch = [&](std::uint8_t v) {
                return cfg.blend_space == BlendSpace::Linear ? srgb_decode(v / 255.0) : v / 255.0;
            };
            r = a * ch(c.r) + (1 - a) * r;
            g = a * ch(c.g) + (1 - a) * g;
            b = a * ch(c.b) + (1 - a) * b;
        }
        const auto enc = [&](double v) {
            v = std::clamp(v, 0.0, 1.0);
            if (cfg.blend_space == BlendSpace::Linear) v = srgb_encode(v);
            return static_cast<std::uint8_t>(std::lround(v * 255.0));
        };
        labs.push_back(srgb_to_lab({enc(r), enc(g), enc(b)}));
    }
    for (std::size_t i = 0; i < labs.size(); ++i) {
        if (std::abs(labs[i].L - bg_lab.L) < cfg.bg_contrast) {
            *why = fmt("region %zu |dL| %.3f", i, std::abs(labs[i].L - bg_lab.L));
            return false;
        }
        for (std::size_t j = i + 1; j < labs.size(); ++j) {
            if (!(ciede2000(labs[i], labs[j]) > cfg.jnd_threshold)) {
                *why = fmt("regions %zu,%zu dE %.3f", i, j, ciede2000(labs[i], labs[j]));
                return false;
            }
        }
    }
    return true;
}

void color_core() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& p : kDe00Pairs) {
        const double d = ciede2000({p.L1, p.a1, p.b1}, {p.L2, p.a2, p.b2});
        worst = std::max(worst, std::abs(d - p.expected));
    }
    int worst_rt = 0;
    for (int r = 0; r < 256; r += 5) {
        for (int g = 0; g < 256; g += 5) {
            for (int b = 0; b < 256; b += 5) {
                const Srgb8 c{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                const Srgb8 back = lab_to_srgb(srgb_to_lab(c)).color;
                worst_rt = std::max({worst_rt, std::abs(back.r - r), std::abs(back.g - g), std::abs(back.b - b)});
            }
        }
    }
    const double t = seconds_since(t0);
    report("ciede2000+roundtrip", worst <= 1e-4 && worst_rt <= 1 && t < 1.0,
           fmt("34 pairs max err %.2e (<=1e-4), round trip max %d (<=1), %.3fs (<1s)", worst, worst_rt, t));
}

void porter_duff() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Rgba s{{u(rng), u(rng), u(rng)}, u(rng)};
        const Rgba d{{u(rng), u(rng), u(rng)}, u(rng)};
        const Rgba o = over(s, d);
        const double a = s.alpha + d.alpha * (1 - s.alpha);
        const auto ch = [&](double cs, double cd) { return a == 0 ? 0.0 : (cs * s.alpha + cd * d.alpha * (1 - s.alpha)) / a; };
        worst = std::max({worst, std::abs(o.alpha - a), std::abs(o.color.r - ch(s.color.r, d.color.r)),
                          std::abs(o.color.g - ch(s.color.g, d.color.g)), std::abs(o.color.b - ch(s.color.b, d.color.b))});
    }
    report("porter-duff over", worst <= 1e-12, fmt("1000 pairs max err %.2e (<=1e-12)", worst));
}

void fig3_scene() {
    const auto t0 = Clock::now();
    const SceneStructure s = scene_from_histograms(testing::fig3_spec());
    const double t = seconds_since(t0);
    const std::vector<std::vector<int>> rows{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}, {1, 1, 1}};
    bool ok = s.region_count() == 6;
    for (std::size_t i = 0; ok && i < 6; ++i) {
        for (std::size_t c = 0; c < 3; ++c) ok = ok && s.membership(i, c) == rows[i][c];
    }
    const auto w = [&](std::size_t i, std::size_t j) { return s.pair_share(i - 1, j - 1); };
    ok = ok && w(1, 4) == 1 && w(1, 5) == 0 && w(5, 6) == 2 && w(1, 3) == 0 && t < 1.0;
    report("fig3 scene", ok,
           fmt("%zu regions, W14=%d W15=%d W56=%d delta(W13)=%d, %.4fs", s.region_count(), w(1, 4), w(1, 5), w(5, 6),
               w(1, 3) == 0 ? 1 : 0, t));
}

void objective_equivalence(const NameModel& model) {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    int count = 0, degenerate = 0;
    const SimilarityMeasure measures[] = {SimilarityMeasure::Name, SimilarityMeasure::Color, SimilarityMeasure::Luminance,
                                          SimilarityMeasure::Hue};
    for (int k = 0; k < 200; ++k) {
        const std::size_t m = 1 + k % 4;
        const bool disjoint = k % 5 == 0;
        const SceneStructure scene = scene_from_histograms(testing::random_histogram(m, rng, disjoint));
        const Solution sol = testing::random_solution(m, rng);
        ObjectiveConfig cfg;
        cfg.similarity = measures[k % 4];
        cfg.separability_scale = k % 3 == 0 ? SeparabilityScale::Raw : SeparabilityScale::Normalized;
        cfg.blend_space = k % 7 == 0 ? BlendSpace::Gamma : BlendSpace::Linear;
        const ScoreBreakdown a = total_score(scene, sol, cfg, model);
        const ScoreBreakdown b = oracle::reference_score(scene, sol, cfg, model);
        worst = std::max({worst, std::abs(a.total - b.total), std::abs(a.e_wa - b.e_wa), std::abs(a.e_bd - b.e_bd),
                          std::abs(a.e_cs - b.e_cs)});
        if (a.constraints_ok != b.constraints_ok) worst = 1.0;
        degenerate += disjoint;
        ++count;
    }
    report("objective == oracle", worst <= 1e-9,
           fmt("%d instances (m=1..4, %d no-overlap), max |diff| %.2e (<=1e-9)", count, degenerate, worst));
}

std::vector<Stimulus> stimulus_corpus() {
    std::vector<Stimulus> out;
    for (std::size_t m : {2, 3, 4}) {
        for (Smoothness sm : {Smoothness::Smooth, Smoothness::Moderate, Smoothness::Unsmooth}) {
            for (std::uint64_t rep = 0; rep < 2; ++rep) {
                StimulusParams p;
                p.classes = m;
                p.smoothness = sm;
                p.seed = 1000 * m + 10 * static_cast<std::uint64_t>(sm) + rep;
                out.push_back(gen_stimulus(p));
            }
        }
    }
    return out;
}

void constraint_guarantee(const NameModel& model) {
    const auto t0 = Clock::now();
    const std::vector<Stimulus> corpus = stimulus_corpus();
    const ObjectiveConfig cfg;
    AnnealSchedule sched;
    std::vector<std::uint64_t> seeds(20);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
    int runs = 0, passed = 0;
    std::string first_failure;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        const SceneStructure scene = scene_from_histograms(corpus[s].spec);
        const BatchResult batch = optimize_batch(scene, model, cfg, sched, seeds);
        for (const auto& r : batch.runs) {
            std::string why;
            ++runs;
            if (independent_constraints(scene, r.solution, cfg, &why)) {
                ++passed;
            } else if (first_failure.empty()) {
                first_failure = fmt(" first failure: stimulus %zu seed %llu %s", s,
                                    static_cast<unsigned long long>(r.seed), why.c_str());
            }
        }
    }
    report("constraint guarantee", runs == 360 && passed == runs,
           fmt("%d/%d runs feasible (18 stimuli x 20 seeds, eta=3, sigma=5), %.1fs%s", passed, runs, seconds_since(t0),
               first_failure.c_str()));
}

void sa_vs_exhaustive(const NameModel& model) {
    const auto t0 = Clock::now();
    HistogramSpec spec;
    spec.class_labels = {"A", "B"};
    spec.bin_edges = {0, 1, 2, 3, 4, 5, 6};
    spec.heights = {{1, 3, 4, 2, 0, 0}, {0, 0, 2, 4, 3, 1}};
    const SceneStructure scene = scene_from_histograms(spec);
    oracle::CandidateGrid grid;
    grid.color_anchors = {{{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}},
                          {{255, 127, 14}, {23, 190, 207}, {140, 86, 75}, {188, 189, 34}}};
    grid.opacity_levels = {0.3, 0.5, 0.7};
    const ObjectiveConfig cfg;
    const oracle::GridOptimum opt = oracle::exhaustive_best(scene, grid, cfg, model);

    AnnealSchedule sched;
    sched.discrete = DiscreteMoveSet{grid.color_anchors, grid.opacity_levels};
    int hits = 0;
    std::string scores;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        sched.seed = seed;
        const OptimizeResult r = optimize(scene, model, cfg, sched);
        const double ratio_ok = r.breakdown.total >= opt.score - 0.05 * std::abs(opt.score);
        hits += ratio_ok;
        scores += fmt(" %.4f", r.breakdown.total);
    }
    const double t = seconds_since(t0);
    report("SA vs exhaustive", opt.combination_count == 288 && hits >= 4 && t < 60.0,
           fmt("%zu combos (%zu feasible), optimum %.4f, seeds:%s, %d/5 within 5%% (need 4), %.1fs (<60s)",
               opt.combination_count, opt.feasible_count, opt.score, scores.c_str(), hits, t));
}

void schedule_arithmetic() {
    const AnnealSchedule s;
    const auto expected = static_cast<std::size_t>(std::ceil(std::log(100000.0 / 0.001) / std::log(1.0 / 0.99)));
    report("schedule arithmetic", s.iteration_count() == expected && expected == 1833,
           fmt("iterations %zu, closed form %zu", s.iteration_count(), expected));
}

void ablation(const NameModel& model) {
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    const double weights[4][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ScoreBreakdown terms[4];
    bool feasible = true;
    for (int k = 0; k < 4; ++k) {
        ObjectiveConfig cfg;
        cfg.w_wa = weights[k][0];
        cfg.w_bd = weights[k][1];
        cfg.w_cs = weights[k][2];
        const BatchResult b = optimize_batch(scene, model, cfg, AnnealSchedule{}, seeds);
        terms[k] = total_score(scene, b.runs[b.best].solution, ObjectiveConfig{}, model);
        feasible = feasible && terms[k].constraints_ok;
    }
    bool order = true;
    for (int k = 0; k < 4; ++k) {
        order = order && terms[0].e_wa >= terms[k].e_wa && terms[1].e_bd <= terms[k].e_bd && terms[2].e_cs >= terms[k].e_cs;
    }
    const auto inside = [&](auto get) {
        double lo = get(terms[0]), hi = lo;
        for (int k = 1; k < 3; ++k) lo = std::min(lo, get(terms[k])), hi = std::max(hi, get(terms[k]));
        return get(terms[3]) >= lo - 1e-12 && get(terms[3]) <= hi + 1e-12;
    };
    const bool envelope = inside([](const ScoreBreakdown& b) { return b.e_wa; }) &&
                          inside([](const ScoreBreakdown& b) { return b.e_bd; }) &&
                          inside([](const ScoreBreakdown& b) { return b.e_cs; });
    std::string detail;
    const char* names[] = {"(1,0,0)", "(0,1,0)", "(0,0,1)", "(1,1,1)"};
    for (int k = 0; k < 4; ++k) {
        detail += fmt("%s wa=%.3f bd=%.3f cs=%.3f; ", names[k], terms[k].e_wa, terms[k].e_bd, terms[k].e_cs);
    }
    report("fig4 ablation", order && envelope && feasible,
           detail + fmt("ordering %s, envelope %s", order ? "ok" : "broken", envelope ? "ok" : "broken"));
}

void convergence(const NameModel& model) {
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    const std::vector<std::uint64_t> seeds{11, 12, 13, 14, 15};
    const BatchResult b = optimize_batch(scene, model, ObjectiveConfig{}, AnnealSchedule{}, seeds);
    const double best = b.runs[b.best].breakdown.total;
    bool within = true, monotone = true;
    std::string scores;
    for (const auto& r : b.runs) {
        within = within && best - r.breakdown.total <= 0.1 * std::abs(best);
        for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
            monotone = monotone && r.trace.records[i].best_score >= r.trace.records[i - 1].best_score;
        }
        scores += fmt(" %.4f", r.breakdown.total);
    }
    report("fig6-convergence", within && monotone,
           fmt("finals:%s, best %.4f, all within 10%%: %s, best-so-far non-decreasing: %s", scores.c_str(), best,
               within ? "yes" : "no", monotone ? "yes" : "no"));
}

void stimuli() {
    bool ok = true;
    std::string detail;
    for (Smoothness sm : {Smoothness::Smooth, Smoothness::Moderate, Smoothness::Unsmooth}) {
        const KlBand band = kl_band(sm);
        int inside = 0;
        double lo = 1e9, hi = -1e9;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            StimulusParams p;
            p.classes = 2 + seed % 3;
            p.smoothness = sm;
            p.seed = seed;
            bool all = true;
            try {
                const Stimulus s = gen_stimulus(p);
                for (std::size_t c = 0; c < s.kl.size(); ++c) {
                    // recompute from the emitted heights
                    const double kl = kl_divergence(s.spec.heights[c], s.ideal[c]);
                    lo = std::min(lo, kl), hi = std::max(hi, kl);
                    const bool in = sm == Smoothness::Smooth ? kl == 0.0 : kl >= band.lo && kl <= band.hi;
                    all = all && in;
                }
            } catch (const std::exception&) {
                all = false;
            }
            inside += all;
        }
        ok = ok && inside == 30;
        detail += fmt("%s %d/30 KL in [%.4f,%.4f]; ", std::string(to_string(sm)).c_str(), inside, lo, hi);
    }
    report("stimulus KL bands", ok, detail);
}

void determinism(const NameModel& model) {
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    const ObjectiveConfig cfg;
    AnnealSchedule sched;
    sched.seed = 42;
    std::string docs[2];
    for (auto& d : docs) {
        const OptimizeResult r = optimize(scene, model, cfg, sched);
        d = io::write_solution_document(scene, r.solution, r.breakdown, cfg, sched, r.seed);
    }
    report("determinism", docs[0] == docs[1] && !docs[0].empty(),
           fmt("two seed-42 runs, documents %zu bytes, identical: %s", docs[0].size(), docs[0] == docs[1] ? "yes" : "no"));
}

}  // namespace

// --expect-fail NAME lets a documented, known failure keep the exit status
// at zero. The FAIL line is still printed.
int main(int argc, char** argv) {
    std::vector<std::string> expected;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::string(argv[i]) == "--expect-fail") expected.emplace_back(argv[i + 1]);
    }
    const NameModel& model = testing::basic_model();
    color_core();
    porter_duff();
    fig3_scene();
    objective_equivalence(model);
    constraint_guarantee(model);
    sa_vs_exhaustive(model);
    schedule_arithmetic();
    ablation(model);
    convergence(model);
    stimuli();
    determinism(model);
    int unexpected = 0;
    for (const auto& name : failed) {
        const bool known = std::find(expected.begin(), expected.end(), name) != expected.end();
        if (!known) ++unexpected;
    }
    std::printf("%zu of 11 criteria failed (%d not listed as expected)\n", failed.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
