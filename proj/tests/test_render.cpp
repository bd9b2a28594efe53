#include <cmath>
#include <regex>

#include "doctest.h"

#include "blendopt/errors.hpp"
#include "blendopt/render.hpp"
#include "support.hpp"

using namespace blendopt;

namespace {

// Minimal rasterizer for the SVG subset the renderer emits: one background
// rect, then groups carrying fill + fill-opacity with axis-aligned rects.
struct SvgLayer {
    Srgb8 fill;
    double opacity;
    std::vector<std::array<double, 4>> rects;
};

struct ParsedSvg {
    bool linear = false;
    Srgb8 background;
    std::vector<SvgLayer> layers;
    std::vector<std::string> legend;
};

ParsedSvg parse_svg(const std::string& svg) {
    ParsedSvg out;
    out.linear = svg.find("color-interpolation=\"linearRGB\"") != std::string::npos;
    std::smatch m;
    const std::regex bg(R"re(<rect x="0" y="0" width="\d+" height="\d+" fill="(#[0-9a-f]{6})"/>)re");
    REQUIRE(std::regex_search(svg, m, bg));
    out.background = *parse_hex(m[1].str());
    const std::regex group(R"re(<g class="layer" data-class="[^"]*" fill="(#[0-9a-f]{6})" fill-opacity="([0-9.eE+-]+)">([\s\S]*?)</g>)re");
    const std::regex rect(R"re(<rect x="([0-9.-]+)" y="([0-9.-]+)" width="([0-9.-]+)" height="([0-9.-]+)"/>)re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), group); it != std::sregex_iterator(); ++it) {
        SvgLayer layer{*parse_hex((*it)[1].str()), std::stod((*it)[2].str()), {}};
        const std::string body = (*it)[3].str();
        for (auto r = std::sregex_iterator(body.begin(), body.end(), rect); r != std::sregex_iterator(); ++r) {
            layer.rects.push_back({std::stod((*r)[1].str()), std::stod((*r)[2].str()), std::stod((*r)[3].str()),
                                   std::stod((*r)[4].str())});
        }
        out.layers.push_back(layer);
    }
    const std::regex text(R"re(<text x="[0-9.]+" y="[0-9.]+">([^<]*)</text>)re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), text); it != std::sregex_iterator(); ++it) {
        out.legend.push_back((*it)[1].str());
    }
    return out;
}

Srgb8 sample(const ParsedSvg& svg, double px, double py) {
    const auto dec = [&](std::uint8_t v) { return svg.linear ? srgb_decode(v / 255.0) : v / 255.0; };
    const auto enc = [&](double v) {
        const double e = svg.linear ? srgb_encode(std::clamp(v, 0.0, 1.0)) : std::clamp(v, 0.0, 1.0);
        return static_cast<std::uint8_t>(std::lround(e * 255.0));
    };
    double r = dec(svg.background.r), g = dec(svg.background.g), b = dec(svg.background.b);
    for (const auto& layer : svg.layers) {
        bool inside = false;
        for (const auto& q : layer.rects) {
            if (px >= q[0] && px < q[0] + q[2] && py >= q[1] && py < q[1] + q[3]) inside = true;
        }
        if (!inside) continue;
        const double a = layer.opacity;
        r = a * dec(layer.fill.r) + (1 - a) * r;
        g = a * dec(layer.fill.g) + (1 - a) * g;
        b = a * dec(layer.fill.b) + (1 - a) * b;
    }
    return {enc(r), enc(g), enc(b)};
}

// Pixel center inside bin `bin` at data height `y`.
std::pair<double, double> pixel_at(const RenderOptions& o, const HistogramSpec& spec, std::size_t bin, double y, double y_max) {
    const PlotArea a = plot_area(o);
    const double xc = (spec.bin_edges[bin] + spec.bin_edges[bin + 1]) / 2.0;
    const double sx = a.left + (xc - spec.bin_edges.front()) / (spec.bin_edges.back() - spec.bin_edges.front()) * (a.right - a.left);
    const double sy = a.bottom - y / y_max * (a.bottom - a.top);
    return {std::floor(sx) + 0.5, std::floor(sy) + 0.5};
}

bool close(Srgb8 a, Srgb8 b) {
    return std::abs(a.r - b.r) <= 1 && std::abs(a.g - b.g) <= 1 && std::abs(a.b - b.b) <= 1;
}

Solution fig3_solution() {
    Solution s;
    s.palette = {{228, 26, 28}, {55, 126, 184}, {77, 175, 74}};
    s.opacities = {0.55, 0.4, 0.7};
    s.order = RenderOrder({2, 0, 1});
    return s;
}

}  // namespace

TEST_CASE("sampled SVG pixels match analytic region colors") {
    const HistogramSpec spec = testing::fig3_spec();
    const SceneStructure scene = scene_from_histograms(spec);
    const Solution sol = fig3_solution();
    for (BlendSpace space : {BlendSpace::Linear, BlendSpace::Gamma}) {
        RenderOptions o;
        o.blend_space = space;
        const ParsedSvg svg = parse_svg(render_svg(scene, sol, o));
        REQUIRE(svg.layers.size() == 3);
        // one interior point per region: {A} {B} {C} {A,B} {B,C} {A,B,C}
        const std::pair<std::size_t, double> probes[] = {{0, 2.0}, {3, 3.0}, {4, 2.0}, {1, 1.0}, {3, 1.0}, {2, 0.5}};
        for (std::size_t region = 0; region < 6; ++region) {
            const auto [px, py] = pixel_at(o, spec, probes[region].first, probes[region].second, 4.0);
            const Srgb8 expected = region_color(scene.regions[region].signature, sol.palette, sol.opacities, sol.order,
                                                scene.background, space);
            CHECK(close(sample(svg, px, py), expected));
        }
    }
}

TEST_CASE("layers follow the render order and the legend lists the top layer first") {
    const SceneStructure scene = scene_from_histograms(testing::fig3_spec());
    const Solution sol = fig3_solution();
    const ParsedSvg svg = parse_svg(render_svg(scene, sol));
    REQUIRE(svg.layers.size() == 3);
    CHECK(svg.layers[0].fill == sol.palette[2]);
    CHECK(svg.layers[1].fill == sol.palette[0]);
    CHECK(svg.layers[2].fill == sol.palette[1]);
    CHECK(svg.layers[0].opacity == doctest::Approx(0.7));
    REQUIRE(svg.legend.size() == 4);
    CHECK(svg.legend[1] == "B");
    CHECK(svg.legend[2] == "A");
    CHECK(svg.legend[3] == "C");
}

TEST_CASE("single class SVG and byte determinism") {
    HistogramSpec spec;
    spec.class_labels = {"only <one>"};
    spec.bin_edges = {0, 1, 2, 3};
    spec.heights = {{1, 3, 2}};
    const SceneStructure scene = scene_from_histograms(spec);
    Solution sol;
    sol.palette = {{10, 20, 30}};
    sol.opacities = {0.5};
    sol.order = RenderOrder::identity(1);
    const std::string a = render_svg(scene, sol);
    CHECK(a == render_svg(scene, sol));
    const ParsedSvg svg = parse_svg(a);
    CHECK(svg.layers.size() == 1);
    CHECK(svg.layers[0].rects.size() == 3);
    REQUIRE(svg.legend.size() == 2);
    CHECK(svg.legend[1] == "only &lt;one&gt;");
}

TEST_CASE("raster scenes render as region maps") {
    const SceneStructure scene = scene_from_masks(rasterize_histogram(testing::fig3_spec(), 100, 80));
    const Solution sol = fig3_solution();
    CHECK_THROWS_AS(render_svg(scene, sol), ContractViolation);
    const Image8 img = render_region_map(scene, sol);
    CHECK(img.width == 100);
    CHECK(img.channels == 3);
    const auto colors = resolve_region_colors(scene, sol);
    for (std::size_t p = 0; p < scene.raster->region_of_pixel.size(); p += 37) {
        const int r = scene.raster->region_of_pixel[p];
        const Srgb8 expected = r < 0 ? scene.background : colors[static_cast<std::size_t>(r)].srgb;
        CHECK(img.pixels[3 * p] == expected.r);
        CHECK(img.pixels[3 * p + 1] == expected.g);
        CHECK(img.pixels[3 * p + 2] == expected.b);
    }
    const SceneStructure analytic = scene_from_histograms(testing::fig3_spec());
    CHECK_THROWS_AS(render_region_map(analytic, sol), ContractViolation);
}
