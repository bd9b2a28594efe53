#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blendopt/color.hpp"

namespace blendopt {

/// Row-major dense matrix.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

/// Sorted, duplicate-free class indices covering a point of the chart.
using Signature = std::vector<std::size_t>;

/// Bottom-aligned overlapped histograms sharing one set of bin edges.
struct HistogramSpec {
    std::vector<std::string> class_labels;
    std::vector<double> bin_edges;
    /// heights[class][bin]
    std::vector<std::vector<double>> heights;
    Srgb8 background{255, 255, 255};

    std::size_t class_count() const { return heights.size(); }
    std::size_t bin_count() const { return bin_edges.empty() ? 0 : bin_edges.size() - 1; }
};

/// One binary coverage mask per class, all of identical dimensions.
struct LayerMaskSet {
    std::size_t width = 0;
    std::size_t height = 0;
    /// masks[class][y * width + x] is nonzero where the class is drawn.
    std::vector<std::vector<std::uint8_t>> masks;
    std::vector<std::string> class_labels;
    Srgb8 background{255, 255, 255};
};

struct RegionInfo {
    std::size_t id = 0;
    Signature signature;
    /// Fraction of the covered chart footprint.
    double size = 0.0;
};

/// Per-pixel region indices for raster scenes (-1 where nothing is drawn).
struct RegionRaster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::int32_t> region_of_pixel;
};

/// Regions, membership and adjacency of one overlapped chart.
///
/// Regions 0..m-1 are the base regions of classes 0..m-1; composite regions
/// follow, ordered by signature size and then lexicographically.
struct SceneStructure {
    std::size_t class_count = 0;
    std::vector<std::string> class_labels;
    std::vector<RegionInfo> regions;
    /// n x m binary membership matrix.
    Matrix<std::uint8_t> membership;
    /// n x n, W = M * M^T.
    Matrix<int> pair_share;
    std::vector<double> sizes;
    /// Sorted neighbor lists, one per region.
    std::vector<std::vector<std::size_t>> adjacency;
    Srgb8 background{255, 255, 255};
    /// Non-fatal construction diagnostics, e.g. a class without exclusive area.
    std::vector<std::string> warnings;

    /// Geometry kept for rendering.
    std::optional<HistogramSpec> histogram;
    std::optional<RegionRaster> raster;

    std::size_t region_count() const { return regions.size(); }
    bool adjacent(std::size_t i, std::size_t j) const;
};

struct MaskOptions {
    double min_region_fraction = 0.0005;
};

/// Throws ValidationError on malformed specs. A class lacking exclusive area
/// is reported in `warnings` and represented by its smallest covering region.
SceneStructure scene_from_histograms(const HistogramSpec& spec);

/// Throws ValidationError on dimension mismatch or when no pixel is covered.
SceneStructure scene_from_masks(const LayerMaskSet& masks, const MaskOptions& options = {});

/// Lists every violated SceneStructure invariant; empty when valid.
std::vector<std::string> validate_scene(const SceneStructure& scene);

/// Renders the bars of a histogram spec into binary layer masks.
LayerMaskSet rasterize_histogram(const HistogramSpec& spec, std::size_t width, std::size_t height);

/// Builds a scene from an explicit region list (signatures + sizes + edges).
/// Used by tests and tools that describe charts structurally.
SceneStructure scene_from_regions(std::size_t class_count, std::vector<Signature> signatures,
                                  std::vector<double> sizes,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  Srgb8 background = {255, 255, 255});

}  // namespace blendopt
