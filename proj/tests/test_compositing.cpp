#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "blendopt/compositing.hpp"
#include "blendopt/errors.hpp"

using namespace blendopt;

namespace {

// Premultiplied form of source-over, one channel at a time.
double scalar_over(double cs, double as, double cd, double ad, double* alpha_out) {
    const double premul = cs * as + cd * ad * (1.0 - as);
    const double a = as + ad - as * ad;
    *alpha_out = a;
    return a == 0.0 ? 0.0 : premul / a;
}

std::uint8_t encode(double linear) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(srgb_encode(linear), 0.0, 1.0) * 255.0));
}

}  // namespace

TEST_CASE("source-over matches an independent scalar form on random pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Rgba src{{u(rng), u(rng), u(rng)}, u(rng)};
        const Rgba dst{{u(rng), u(rng), u(rng)}, u(rng)};
        const Rgba out = over(src, dst);
        double a = 0.0;
        worst = std::max(worst, std::abs(out.color.r - scalar_over(src.color.r, src.alpha, dst.color.r, dst.alpha, &a)));
        worst = std::max(worst, std::abs(out.color.g - scalar_over(src.color.g, src.alpha, dst.color.g, dst.alpha, &a)));
        worst = std::max(worst, std::abs(out.color.b - scalar_over(src.color.b, src.alpha, dst.color.b, dst.alpha, &a)));
        worst = std::max(worst, std::abs(out.alpha - a));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("over edge cases") {
    const Rgba clear{{0.3, 0.4, 0.5}, 0.0};
    const Rgba opaque{{0.1, 0.2, 0.9}, 1.0};
    const Rgba both = over(clear, clear);
    CHECK(both.alpha == 0.0);
    CHECK(both.color == LinearRgb{0, 0, 0});
    const Rgba top = over(opaque, Rgba{{1, 1, 1}, 1.0});
    CHECK(top.alpha == 1.0);
    CHECK(top.color.b == doctest::Approx(0.9));
    const Rgba under = over(clear, opaque);
    CHECK(under.color.r == doctest::Approx(0.1));
}

TEST_CASE("single layer over the background blends in linear light") {
    const Srgb8 red{255, 0, 0};
    const Srgb8 white{255, 255, 255};
    const std::vector<Srgb8> palette{red};
    const std::vector<double> alpha{0.5};
    const std::vector<std::size_t> sig{0};
    const Srgb8 c = region_color(sig, palette, alpha, RenderOrder::identity(1), white);
    CHECK(c.r == 255);
    CHECK(c.g == encode(0.5));
    CHECK(c.b == encode(0.5));
    const Srgb8 g = region_color(sig, palette, alpha, RenderOrder::identity(1), white, BlendSpace::Gamma);
    CHECK(g.g == 128);
}

TEST_CASE("region color composites members bottom to top") {
    const std::vector<Srgb8> palette{{200, 30, 30}, {30, 30, 200}, {30, 200, 30}};
    const std::vector<double> alpha{0.6, 0.5, 0.7};
    const Srgb8 bg{250, 250, 250};
    const std::vector<std::size_t> sig{0, 1};
    // class 1 below class 0
    const RenderOrder order({1, 0, 2});
    LinearRgb acc = to_linear(bg);
    for (std::size_t cls : {1u, 0u}) {
        const LinearRgb s = to_linear(palette[cls]);
        acc = {alpha[cls] * s.r + (1 - alpha[cls]) * acc.r, alpha[cls] * s.g + (1 - alpha[cls]) * acc.g,
               alpha[cls] * s.b + (1 - alpha[cls]) * acc.b};
    }
    CHECK(region_color(sig, palette, alpha, order, bg) == from_linear(acc));
    // order matters for translucent layers
    CHECK_FALSE(region_color(sig, palette, alpha, order, bg) == region_color(sig, palette, alpha, RenderOrder({0, 1, 2}), bg));
    // classes outside the signature do not contribute
    const std::vector<std::size_t> only2{2};
    CHECK(region_color(only2, palette, alpha, order, bg) == region_color(only2, palette, alpha, RenderOrder({2, 0, 1}), bg));
}

TEST_CASE("render order validation and helpers") {
    CHECK_THROWS_AS(RenderOrder({0, 0, 1}), ContractViolation);
    CHECK_THROWS_AS(RenderOrder({0, 3}), ContractViolation);
    RenderOrder o({2, 0, 1});
    CHECK(o.rank_of(2) == 0);
    CHECK(o.rank_of(1) == 2);
    o.swap_positions(0, 2);
    CHECK(o.positions() == std::vector<std::size_t>{1, 0, 2});
    CHECK(RenderOrder::identity(3).positions() == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("region color rejects malformed input") {
    const std::vector<Srgb8> palette{{1, 2, 3}};
    const std::vector<double> alpha{0.5};
    const std::vector<std::size_t> empty;
    CHECK_THROWS_AS(region_color(empty, palette, alpha, RenderOrder::identity(1), {255, 255, 255}), ContractViolation);
    const std::vector<double> two{0.5, 0.5};
    const std::vector<std::size_t> sig{0};
    CHECK_THROWS_AS(region_color(sig, palette, two, RenderOrder::identity(1), {255, 255, 255}), ContractViolation);
}
