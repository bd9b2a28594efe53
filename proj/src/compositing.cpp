#include "blendopt/compositing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blendopt/errors.hpp"

namespace blendopt {

RenderOrder::RenderOrder(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t cls : order_) {
        if (cls >= order_.size() || seen[cls]) throw ContractViolation("render order is not a permutation");
        seen[cls] = true;
    }
}

RenderOrder RenderOrder::identity(std::size_t m) {
    std::vector<std::size_t> v(m);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return RenderOrder(std::move(v));
}

std::size_t RenderOrder::rank_of(std::size_t cls) const {
    const auto it = std::find(order_.begin(), order_.end(), cls);
    if (it == order_.end()) throw ContractViolation("class not in render order");
    return static_cast<std::size_t>(it - order_.begin());
}

void RenderOrder::swap_positions(std::size_t p, std::size_t q) { std::swap(order_.at(p), order_.at(q)); }

Rgba over(const Rgba& src, const Rgba& dst) {
    const double a = src.alpha + dst.alpha * (1.0 - src.alpha);
    if (a == 0.0) return {{0.0, 0.0, 0.0}, 0.0};
    const double ws = src.alpha;
    const double wd = dst.alpha * (1.0 - src.alpha);
    return {{(ws * src.color.r + wd * dst.color.r) / a, (ws * src.color.g + wd * dst.color.g) / a,
             (ws * src.color.b + wd * dst.color.b) / a},
            a};
}

Srgb8 region_color(std::span<const std::size_t> signature, std::span<const Srgb8> palette,
                   std::span<const double> opacities, const RenderOrder& order, Srgb8 background,
                   BlendSpace space) {
    if (signature.empty()) throw ContractViolation("region_color: empty signature");
    if (palette.size() != opacities.size() || palette.size() != order.size()) {
        throw ContractViolation("region_color: palette, opacities and order sizes differ");
    }

    const auto lift = [space](Srgb8 c) -> LinearRgb {
        if (space == BlendSpace::Linear) return to_linear(c);
        return {c.r / 255.0, c.g / 255.0, c.b / 255.0};
    };

    std::vector<char> member(palette.size(), 0);
    for (std::size_t cls : signature) {
        if (cls >= palette.size()) throw ContractViolation("region_color: class index out of range");
        member[cls] = 1;
    }

    Rgba acc{lift(background), 1.0};
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const std::size_t cls = order[pos];
        if (!member[cls]) continue;
        acc = over({lift(palette[cls]), opacities[cls]}, acc);
    }

    if (space == BlendSpace::Linear) return from_linear(acc.color);
    const auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
    return {q(acc.color.r), q(acc.color.g), q(acc.color.b)};
}

}  // namespace blendopt
