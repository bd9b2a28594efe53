#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "blendopt/color.hpp"

namespace blendopt {

struct Rgba {
    LinearRgb color;
    double alpha = 0.0;
};

/// Space in which `over` interpolates channel values. Linear is the default;
/// Gamma mimics plotting libraries that blend encoded sRGB directly.
enum class BlendSpace { Linear, Gamma };

/// Bottom-to-top drawing order of the classes; always a permutation of 0..m-1.
class RenderOrder {
public:
    RenderOrder() = default;
    /// Throws ContractViolation unless `order` is a permutation of 0..size-1.
    explicit RenderOrder(std::vector<std::size_t> order);

    static RenderOrder identity(std::size_t m);

    std::size_t size() const { return order_.size(); }
    std::size_t operator[](std::size_t pos) const { return order_[pos]; }
    const std::vector<std::size_t>& positions() const { return order_; }
    /// Layer position of a class (0 = bottom).
    std::size_t rank_of(std::size_t cls) const;

    void swap_positions(std::size_t p, std::size_t q);

    friend bool operator==(const RenderOrder&, const RenderOrder&) = default;

private:
    std::vector<std::size_t> order_;
};

/// Porter-Duff source-over. Returns transparent black when both alphas are 0.
Rgba over(const Rgba& src, const Rgba& dst);

/// Final opaque color of a region covered by the classes in `signature`,
/// composited bottom-to-top over the opaque background. Throws
/// ContractViolation on an empty signature or mismatched sizes.
Srgb8 region_color(std::span<const std::size_t> signature, std::span<const Srgb8> palette,
                   std::span<const double> opacities, const RenderOrder& order, Srgb8 background,
                   BlendSpace space = BlendSpace::Linear);

}  // namespace blendopt
