#include <cmath>
#include <numeric>

#include "doctest.h"

#include "blendopt/errors.hpp"
#include "blendopt/stimulus.hpp"

using namespace blendopt;

namespace {

// Written out separately from the library version.
double reference_kl(const std::vector<double>& p, const std::vector<double>& q) {
    const double eps = 1e-9;
    double sp = 0, sq = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i] + eps;
        sq += q[i] + eps;
    }
    double kl = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = (p[i] + eps) / sp;
        const double b = (q[i] + eps) / sq;
        kl += a * (std::log(a) - std::log(b));
    }
    return kl;
}

}  // namespace

TEST_CASE("kl divergence on a known pair") {
    const std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
    CHECK(kl_divergence(p, q) == doctest::Approx(0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0)).epsilon(1e-6));
    CHECK(kl_divergence(p, p) == 0.0);
    // unnormalized inputs are normalized first
    const std::vector<double> p2{5, 5}, q2{1, 3};
    CHECK(kl_divergence(p2, q2) == doctest::Approx(kl_divergence(p, q)).epsilon(1e-9));
    const std::vector<double> z{0, 1}, o{1, 0};
    CHECK(std::isfinite(kl_divergence(z, o)));
}

TEST_CASE("smooth stimuli are unperturbed") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Stimulus s = gen_stimulus({2 + seed % 3, Smoothness::Smooth, 25, seed});
        REQUIRE(s.kl.size() == s.spec.class_count());
        for (std::size_t c = 0; c < s.kl.size(); ++c) {
            CHECK(s.kl[c] == 0.0);
            CHECK(s.spec.heights[c] == s.ideal[c]);
        }
    }
}

TEST_CASE("perturbed stimuli land in their KL band") {
    for (Smoothness sm : {Smoothness::Moderate, Smoothness::Unsmooth}) {
        const KlBand band = kl_band(sm);
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            const Stimulus s = gen_stimulus({2 + seed % 3, sm, 25, seed});
            for (std::size_t c = 0; c < s.spec.class_count(); ++c) {
                const double kl = reference_kl(s.spec.heights[c], s.ideal[c]);
                CHECK(kl >= band.lo);
                CHECK(kl <= band.hi);
                CHECK(kl == doctest::Approx(s.kl[c]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("stimuli are reproducible and structurally valid") {
    const Stimulus a = gen_stimulus({3, Smoothness::Moderate, 25, 77});
    const Stimulus b = gen_stimulus({3, Smoothness::Moderate, 25, 77});
    CHECK(a.spec.heights == b.spec.heights);
    const Stimulus c = gen_stimulus({3, Smoothness::Moderate, 25, 78});
    CHECK_FALSE(a.spec.heights == c.spec.heights);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Stimulus s = gen_stimulus({2 + seed % 3, Smoothness::Unsmooth, 25, seed});
        const SceneStructure scene = scene_from_histograms(s.spec);
        CHECK(scene.warnings.empty());
        CHECK(validate_scene(scene).empty());
        CHECK(s.spec.bin_count() == 25);
    }
}

TEST_CASE("ideal heights follow a scaled Gaussian") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Stimulus s = gen_stimulus({4, Smoothness::Smooth, 25, seed});
        for (const auto& h : s.ideal) {
            const double peak = *std::max_element(h.begin(), h.end());
            // peak sits within half a bin of the mean, sd >= 3
            CHECK(peak <= 1.2 + 1e-12);
            CHECK(peak >= 0.8 * std::exp(-0.25 / 18.0) - 1e-12);
            const auto nonzero = std::count_if(h.begin(), h.end(), [](double v) { return v > 0; });
            CHECK(nonzero >= 5);
        }
    }
}

TEST_CASE("bad parameters and exhausted budgets") {
    CHECK_THROWS_AS(gen_stimulus({1, Smoothness::Smooth, 25, 0}), ValidationError);
    CHECK_THROWS_AS(gen_stimulus({5, Smoothness::Smooth, 25, 0}), ValidationError);
    CHECK_THROWS_AS(gen_stimulus({2, Smoothness::Smooth, 2, 0}), ValidationError);
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        StimulusParams p{3, Smoothness::Unsmooth, 25, seed};
        p.max_attempts = 1;
        try {
            gen_stimulus(p);
        } catch (const GenerationFailed&) {
            ++failures;
        }
    }
    CHECK(failures > 0);
    CHECK(parse_smoothness("moderate") == Smoothness::Moderate);
    CHECK_THROWS_AS(parse_smoothness("rough"), ParseError);
}
