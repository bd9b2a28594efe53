#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "blendopt/scene.hpp"

namespace blendopt {

enum class Smoothness { Smooth, Moderate, Unsmooth };

std::string_view to_string(Smoothness s);
Smoothness parse_smoothness(std::string_view text);

struct KlBand {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double kl) const { return kl >= lo && kl <= hi; }
};

/// Smooth is exactly 0; the others are closed intervals.
KlBand kl_band(Smoothness s);

/// KL(p || q) over normalized bin masses with additive smoothing.
double kl_divergence(std::span<const double> p, std::span<const double> q, double smoothing = 1e-9);

struct StimulusParams {
    std::size_t classes = 2;
    Smoothness smoothness = Smoothness::Smooth;
    std::size_t bins = 25;
    std::uint64_t seed = 0;
    int max_attempts = 10000;
};

struct Stimulus {
    HistogramSpec spec;
    /// Ideal (unperturbed) Gaussian heights per class.
    std::vector<std::vector<double>> ideal;
    /// Measured KL(perturbed || ideal) per class.
    std::vector<double> kl;
};

/// Overlapped Gaussian histograms with perturbation graded by KL band.
/// Throws ValidationError for bad params and GenerationFailed when the band
/// is not reached within the attempt budget.
Stimulus gen_stimulus(const StimulusParams& params);

}  // namespace blendopt
