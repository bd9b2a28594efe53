#include "blendopt/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "blendopt/errors.hpp"

namespace blendopt {
namespace {

// Bars below this fraction of the class peak are dropped so tails do not
// smear every class across the whole axis.
constexpr double kSupportCutoff = 0.01;

constexpr double kMaxAmplitude = 0.95;

std::vector<double> ideal_heights(std::size_t bins, double mean, double sd, double scale) {
    std::vector<double> h(bins, 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
        const double x = static_cast<double>(b) + 0.5;
        const double v = std::exp(-(x - mean) * (x - mean) / (2.0 * sd * sd));
        h[b] = v >= kSupportCutoff ? scale * v : 0.0;
    }
    return h;
}

}  // namespace

std::string_view to_string(Smoothness s) {
    switch (s) {
        case Smoothness::Smooth: return "smooth";
        case Smoothness::Moderate: return "moderate";
        case Smoothness::Unsmooth: return "unsmooth";
    }
    return "smooth";
}

Smoothness parse_smoothness(std::string_view text) {
    if (text == "smooth") return Smoothness::Smooth;
    if (text == "moderate") return Smoothness::Moderate;
    if (text == "unsmooth") return Smoothness::Unsmooth;
    throw ParseError("smoothness", "expected smooth, moderate or unsmooth");
}

KlBand kl_band(Smoothness s) {
    switch (s) {
        case Smoothness::Smooth: return {0.0, 0.0};
        case Smoothness::Moderate: return {0.02, 0.04};
        case Smoothness::Unsmooth: return {0.07, 0.1};
    }
    return {0.0, 0.0};
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double smoothing) {
    if (p.size() != q.size()) throw ContractViolation("kl_divergence: length mismatch");
    double sp = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        sp += p[i] + smoothing;
        sq += q[i] + smoothing;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = (p[i] + smoothing) / sp;
        const double qi = (q[i] + smoothing) / sq;
        kl += pi * std::log(pi / qi);
    }
    return kl;
}

Stimulus gen_stimulus(const StimulusParams& params) {
    if (params.classes < 2 || params.classes > 4) throw ValidationError("stimulus class count must be 2, 3 or 4");
    if (params.bins < 3) throw ValidationError("stimulus needs at least 3 bins");
    if (params.max_attempts <= 0) throw ValidationError("attempt budget must be positive");

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const KlBand band = kl_band(params.smoothness);
    const std::size_t m = params.classes;
    const double bins = static_cast<double>(params.bins);

    int layouts_left = params.max_attempts;
    while (layouts_left-- > 0) {
        Stimulus out;
        out.spec.bin_edges.resize(params.bins + 1);
        std::iota(out.spec.bin_edges.begin(), out.spec.bin_edges.end(), 0.0);
        for (std::size_t c = 0; c < m; ++c) {
            const double mean = static_cast<double>(c + 1) * bins / static_cast<double>(m + 1) + unit(rng);
            const double sd = std::uniform_real_distribution<double>(3.0, 5.0)(rng);
            const double scale = std::uniform_real_distribution<double>(0.8, 1.2)(rng);
            out.ideal.push_back(ideal_heights(params.bins, mean, sd, scale));
            out.spec.class_labels.push_back(std::string(1, static_cast<char>('A' + c)));
        }

        for (std::size_t c = 0; c < m; ++c) {
            const auto& ideal = out.ideal[c];
            if (params.smoothness == Smoothness::Smooth) {
                out.spec.heights.push_back(ideal);
                out.kl.push_back(kl_divergence(ideal, ideal));
                continue;
            }
            const double mass = std::accumulate(ideal.begin(), ideal.end(), 0.0);
            double amplitude = params.smoothness == Smoothness::Moderate ? 0.3 : 0.6;
            bool hit = false;
            for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
                std::vector<double> h(ideal.size());
                for (std::size_t b = 0; b < h.size(); ++b) h[b] = ideal[b] * (1.0 + amplitude * unit(rng));
                const double pm = std::accumulate(h.begin(), h.end(), 0.0);
                for (double& v : h) v *= mass / pm;
                const double kl = kl_divergence(h, ideal);
                if (band.contains(kl)) {
                    out.spec.heights.push_back(std::move(h));
                    out.kl.push_back(kl);
                    hit = true;
                    break;
                }
                amplitude = kl < band.lo ? std::min(amplitude * 1.05, kMaxAmplitude) : amplitude * 0.95;
            }
            if (!hit) {
                throw GenerationFailed("class " + out.spec.class_labels[c] + ": KL band [" + std::to_string(band.lo) +
                                       ", " + std::to_string(band.hi) + "] not reached in " +
                                       std::to_string(params.max_attempts) + " attempts");
            }
        }

        // Every class needs an exclusive section; otherwise redraw the layout.
        try {
            if (scene_from_histograms(out.spec).warnings.empty()) return out;
        } catch (const ValidationError&) {
        }
    }
    throw GenerationFailed("no layout with an exclusive section per class within the attempt budget");
}

}  // namespace blendopt
