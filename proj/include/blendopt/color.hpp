#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace blendopt {

/// Gamma-encoded sRGB with 8-bit channels.
struct Srgb8 {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Srgb8&, const Srgb8&) = default;

    std::uint32_t packed() const { return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | b; }
};

struct LinearRgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    friend bool operator==(const LinearRgb&, const LinearRgb&) = default;
};

/// CIELAB under D65 / 2 degree observer.
struct LabColor {
    double L = 0.0;
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const LabColor&, const LabColor&) = default;
};

struct LabToSrgbResult {
    Srgb8 color;
    bool clamped = false;
};

double srgb_decode(double encoded);
double srgb_encode(double linear);

LinearRgb to_linear(Srgb8 c);
/// Clamps each channel to [0,1] and rounds to the nearest 8-bit code.
Srgb8 from_linear(const LinearRgb& c);

LabColor srgb_to_lab(Srgb8 c);
LabToSrgbResult lab_to_srgb(const LabColor& lab);

/// CIEDE2000 with kL = kC = kH = 1.
double ciede2000(const LabColor& x, const LabColor& y);

double luminance_diff(const LabColor& x, const LabColor& y);

/// atan2(b, a) in degrees, normalized to [0, 360). Achromatic colors map to 0.
double lch_hue(const LabColor& x);

std::string to_hex(Srgb8 c);
/// Accepts "#rrggbb" or "rrggbb" (case-insensitive).
std::optional<Srgb8> parse_hex(std::string_view text);

}  // namespace blendopt
