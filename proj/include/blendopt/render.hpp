#pragma once

#include <cstddef>
#include <string>

#include "blendopt/objective.hpp"
#include "blendopt/png_io.hpp"
#include "blendopt/scene.hpp"

namespace blendopt {

struct RenderOptions {
    std::size_t width = 640;
    std::size_t height = 400;
    BlendSpace blend_space = BlendSpace::Linear;
};

/// Plot rectangle inside the SVG canvas, in user units.
struct PlotArea {
    double left = 0.0;
    double top = 0.0;
    double right = 0.0;
    double bottom = 0.0;
};

PlotArea plot_area(const RenderOptions& options);

/// Bars of each class drawn bottom-to-top in render order, with a legend
/// listing the top layer first. Throws ContractViolation for scenes without
/// histogram geometry.
std::string render_svg(const SceneStructure& scene, const Solution& sol, const RenderOptions& options = {});

/// Region color map of a raster scene; uncovered pixels show the background.
/// Throws ContractViolation for scenes without raster geometry.
Image8 render_region_map(const SceneStructure& scene, const Solution& sol, BlendSpace space = BlendSpace::Linear);

}  // namespace blendopt
