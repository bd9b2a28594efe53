#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blendopt/color.hpp"

namespace blendopt {

enum class SimilarityMeasure { Name, Color, Luminance, Hue };

std::string_view to_string(SimilarityMeasure m);
/// Accepts "name", "color", "luminance", "hue".
SimilarityMeasure parse_similarity_measure(std::string_view text);

struct CountEntry {
    std::size_t bin = 0;
    std::size_t term = 0;
    std::uint64_t count = 0;
};

/// Color-term count matrix over a binned color universe.
///
/// Immutable after construction. Nearest-bin lookups for sRGB8 colors are
/// memoized internally; the memo is thread-safe and shared between copies.
class NameModel {
public:
    /// Throws ValidationError when the matrix is empty, a row has no counts,
    /// or an entry indexes outside the bin/term lists.
    NameModel(std::vector<LabColor> bins, std::vector<std::string> terms,
              const std::vector<CountEntry>& counts);

    std::size_t bin_count() const { return bins_.size(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::vector<LabColor>& bins() const { return bins_; }
    const std::vector<std::string>& terms() const { return terms_; }

    /// Dense count row of one bin.
    std::span<const double> row(std::size_t bin) const;

    /// Exhaustive CIEDE2000 nearest-bin search, lowest index wins ties.
    std::size_t nearest_bin(const LabColor& c) const;
    /// Same result as nearest_bin(srgb_to_lab(c)), memoized.
    std::size_t bin_for(Srgb8 c) const;

    /// Cosine similarity between two bin rows.
    double bin_cosine(std::size_t b1, std::size_t b2) const;

    /// Sparse triples in (bin, term) order, zero counts omitted.
    std::vector<CountEntry> sparse_counts() const;

private:
    struct Memo;

    std::vector<LabColor> bins_;
    std::vector<std::string> terms_;
    std::vector<double> dense_;
    std::vector<double> norms_;
    std::shared_ptr<Memo> memo_;
};

/// Parses the JSON model document (format "blendopt-name-model", version 1).
NameModel load_name_model(std::string_view bytes);
std::string dump_name_model(const NameModel& model);

/// Converts a color-term survey export (flat `color` Lab triples, `terms`,
/// sparse `T` as [bin * term_count + term, count] pairs) into the model
/// document. Bins without any counts are dropped.
std::string convert_survey_export(std::string_view bytes);

std::vector<double> name_vector(const NameModel& model, const LabColor& c);
double name_similarity(const NameModel& model, const LabColor& c1, const LabColor& c2);

/// Model-free measures. Throws ContractViolation for SimilarityMeasure::Name.
double alt_similarity(SimilarityMeasure kind, const LabColor& c1, const LabColor& c2);

/// Dispatches to name_similarity or alt_similarity.
double similarity(const NameModel& model, SimilarityMeasure kind, const LabColor& c1,
                  const LabColor& c2);

}  // namespace blendopt
