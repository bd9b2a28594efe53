#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "blendopt/annealer.hpp"
#include "blendopt/io.hpp"
#include "blendopt/name_model.hpp"
#include "blendopt/scene.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(BLENDOPT_SOURCE_DIR) + "/" + rel; }

inline const blendopt::NameModel& tiny_model() {
    static const blendopt::NameModel m =
        blendopt::load_name_model(blendopt::io::read_file(source_path("tests/fixtures/tiny_terms.model.json")));
    return m;
}

inline const blendopt::NameModel& basic_model() {
    static const blendopt::NameModel m =
        blendopt::load_name_model(blendopt::io::read_file(source_path("data/basic_terms.model.json")));
    return m;
}

// Three staggered classes; yields {A},{B},{C},{A,B},{B,C},{A,B,C}.
inline blendopt::HistogramSpec fig3_spec() {
    blendopt::HistogramSpec s;
    s.class_labels = {"A", "B", "C"};
    s.bin_edges = {0, 1, 2, 3, 4, 5};
    s.heights = {{4, 4, 2, 0, 0}, {0, 2, 4, 4, 0}, {0, 0, 1, 2, 4}};
    return s;
}

inline blendopt::Srgb8 random_color(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> ch(0, 255);
    return {static_cast<std::uint8_t>(ch(rng)), static_cast<std::uint8_t>(ch(rng)), static_cast<std::uint8_t>(ch(rng))};
}

inline blendopt::Solution random_solution(std::size_t m, std::mt19937_64& rng) {
    blendopt::Solution sol;
    std::uniform_real_distribution<double> a(0.1, 0.9);
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < m; ++k) {
        sol.palette.push_back(random_color(rng));
        sol.opacities.push_back(a(rng));
        order[k] = k;
    }
    std::shuffle(order.begin(), order.end(), rng);
    sol.order = blendopt::RenderOrder(order);
    return sol;
}

// Random bottom-aligned histograms; `disjoint` places classes in separate bins.
inline blendopt::HistogramSpec random_histogram(std::size_t m, std::mt19937_64& rng, bool disjoint) {
    blendopt::HistogramSpec s;
    const std::size_t bins = disjoint ? 2 * m + 1 : 4 + rng() % 6;
    for (std::size_t b = 0; b <= bins; ++b) s.bin_edges.push_back(static_cast<double>(b));
    std::uniform_real_distribution<double> h(0.5, 5.0);
    for (std::size_t c = 0; c < m; ++c) {
        s.class_labels.push_back(std::string(1, static_cast<char>('A' + c)));
        std::vector<double> row(bins, 0.0);
        if (disjoint) {
            row[2 * c] = h(rng);
        } else {
            for (std::size_t b = 0; b < bins; ++b) {
                if (rng() % 3 != 0) row[b] = h(rng);
            }
        }
        s.heights.push_back(row);
    }
    return s;
}

}  // namespace testing
