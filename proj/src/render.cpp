#include "blendopt/render.hpp"

#include <algorithm>
#include <cstdio>

#include "blendopt/errors.hpp"

namespace blendopt {
namespace {

constexpr double kMarginLeft = 40.0;
constexpr double kMarginRight = 170.0;
constexpr double kMarginTop = 20.0;
constexpr double kMarginBottom = 30.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s == "-0" ? "0" : s;
}

std::string opacity(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", a);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

void check_solution(const SceneStructure& scene, const Solution& sol) {
    const std::size_t m = scene.class_count;
    if (sol.palette.size() != m || sol.opacities.size() != m || sol.order.size() != m) {
        throw ContractViolation("render: solution size differs from class count");
    }
}

}  // namespace

PlotArea plot_area(const RenderOptions& o) {
    return {kMarginLeft, kMarginTop, static_cast<double>(o.width) - kMarginRight,
            static_cast<double>(o.height) - kMarginBottom};
}

std::string render_svg(const SceneStructure& scene, const Solution& sol, const RenderOptions& options) {
    if (!scene.histogram) throw ContractViolation("render_svg: scene has no histogram geometry");
    check_solution(scene, sol);
    if (options.width <= kMarginLeft + kMarginRight + 10 || options.height <= kMarginTop + kMarginBottom + 10) {
        throw ContractViolation("render_svg: canvas too small");
    }
    const HistogramSpec& spec = *scene.histogram;
    const PlotArea area = plot_area(options);
    const double x0 = spec.bin_edges.front();
    const double x1 = spec.bin_edges.back();
    double y_max = 0.0;
    for (const auto& h : spec.heights) y_max = std::max(y_max, *std::max_element(h.begin(), h.end()));
    const auto sx = [&](double x) { return area.left + (x - x0) / (x1 - x0) * (area.right - area.left); };
    const auto sy = [&](double y) { return area.bottom - y / y_max * (area.bottom - area.top); };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" viewBox=\"0 0 " + std::to_string(options.width) + " " +
           std::to_string(options.height) + "\" color-interpolation=\"" +
           (options.blend_space == BlendSpace::Linear ? "linearRGB" : "sRGB") + "\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" fill=\"" + to_hex(scene.background) + "\"/>\n";

    for (std::size_t pos = 0; pos < sol.order.size(); ++pos) {
        const std::size_t c = sol.order[pos];
        out += "  <g class=\"layer\" data-class=\"" + escape(scene.class_labels[c]) + "\" fill=\"" +
               to_hex(sol.palette[c]) + "\" fill-opacity=\"" + opacity(sol.opacities[c]) + "\">\n";
        for (std::size_t b = 0; b < spec.bin_count(); ++b) {
            const double h = spec.heights[c][b];
            if (h <= 0.0) continue;
            const double left = sx(spec.bin_edges[b]);
            const double right = sx(spec.bin_edges[b + 1]);
            const double top = sy(h);
            out += "    <rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) +
                   "\" height=\"" + num(area.bottom - top) + "\"/>\n";
        }
        out += "  </g>\n";
    }

    out += "  <line x1=\"" + num(area.left) + "\" y1=\"" + num(area.bottom) + "\" x2=\"" + num(area.right) +
           "\" y2=\"" + num(area.bottom) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    // Legend: top layer first, matching how the stack reads visually.
    const double lx = area.right + 20.0;
    double ly = area.top;
    out += "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "    <text x=\"" + num(lx) + "\" y=\"" + num(ly + 10.0) + "\">render order (top first)</text>\n";
    for (std::size_t k = 0; k < sol.order.size(); ++k) {
        const std::size_t c = sol.order[sol.order.size() - 1 - k];
        ly += 20.0;
        out += "    <rect x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" width=\"14\" height=\"14\" fill=\"" +
               to_hex(sol.palette[c]) + "\" fill-opacity=\"" + opacity(sol.opacities[c]) + "\"/>\n";
        out += "    <text x=\"" + num(lx + 20.0) + "\" y=\"" + num(ly + 11.0) + "\">" + escape(scene.class_labels[c]) +
               "</text>\n";
    }
    out += "  </g>\n</svg>\n";
    return out;
}

Image8 render_region_map(const SceneStructure& scene, const Solution& sol, BlendSpace space) {
    if (!scene.raster) throw ContractViolation("render_region_map: scene has no raster geometry");
    check_solution(scene, sol);
    std::vector<Srgb8> colors;
    colors.reserve(scene.region_count());
    for (const auto& r : scene.regions) {
        colors.push_back(region_color(r.signature, sol.palette, sol.opacities, sol.order, scene.background, space));
    }
    const RegionRaster& raster = *scene.raster;
    Image8 img;
    img.width = raster.width;
    img.height = raster.height;
    img.channels = 3;
    img.pixels.resize(raster.width * raster.height * 3);
    for (std::size_t p = 0; p < raster.region_of_pixel.size(); ++p) {
        const std::int32_t r = raster.region_of_pixel[p];
        const Srgb8 c = r < 0 ? scene.background : colors[static_cast<std::size_t>(r)];
        img.pixels[3 * p] = c.r;
        img.pixels[3 * p + 1] = c.g;
        img.pixels[3 * p + 2] = c.b;
    }
    return img;
}

}  // namespace blendopt
