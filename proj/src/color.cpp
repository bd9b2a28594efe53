#include "blendopt/color.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace blendopt {
namespace {

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

// linear sRGB -> XYZ (D65); the inverse is derived so the pair round-trips exactly.
constexpr double kToXyz[3][3] = {{0.412453, 0.357580, 0.180423},
                                 {0.212671, 0.715160, 0.072169},
                                 {0.019334, 0.119193, 0.950227}};

struct Inverse {
    double m[3][3];
};

Inverse invert(const double (&a)[3][3]) {
    Inverse r{};
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            r.m[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
        }
    }
    return r;
}

const Inverse& from_xyz() {
    static const Inverse inv = invert(kToXyz);
    return inv;
}

constexpr double kEpsilon = 216.0 / 24389.0;
constexpr double kKappa = 24389.0 / 27.0;

double lab_f(double t) {
    return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

double lab_f_inv(double f) {
    const double f3 = f * f * f;
    return f3 > kEpsilon ? f3 : (116.0 * f - 16.0) / kKappa;
}

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

double hue_deg(double b, double a) {
    if (a == 0.0 && b == 0.0) return 0.0;
    double h = rad2deg(std::atan2(b, a));
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    return h;
}

std::uint8_t quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

double srgb_decode(double encoded) {
    return encoded <= 0.04045 ? encoded / 12.92 : std::pow((encoded + 0.055) / 1.055, 2.4);
}

double srgb_encode(double linear) {
    return linear <= 0.0031308 ? 12.92 * linear : 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

LinearRgb to_linear(Srgb8 c) {
    return {srgb_decode(c.r / 255.0), srgb_decode(c.g / 255.0), srgb_decode(c.b / 255.0)};
}

Srgb8 from_linear(const LinearRgb& c) {
    return {quantize(srgb_encode(std::clamp(c.r, 0.0, 1.0))),
            quantize(srgb_encode(std::clamp(c.g, 0.0, 1.0))),
            quantize(srgb_encode(std::clamp(c.b, 0.0, 1.0)))};
}

LabColor srgb_to_lab(Srgb8 c) {
    const LinearRgb lin = to_linear(c);
    const auto& m = kToXyz;
    const double x = m[0][0] * lin.r + m[0][1] * lin.g + m[0][2] * lin.b;
    const double y = m[1][0] * lin.r + m[1][1] * lin.g + m[1][2] * lin.b;
    const double z = m[2][0] * lin.r + m[2][1] * lin.g + m[2][2] * lin.b;

    const double fx = lab_f(x / kWhiteX);
    const double fy = lab_f(y / kWhiteY);
    const double fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

LabToSrgbResult lab_to_srgb(const LabColor& lab) {
    const double fy = (lab.L + 16.0) / 116.0;
    const double fx = fy + lab.a / 500.0;
    const double fz = fy - lab.b / 200.0;

    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * (lab.L > kKappa * kEpsilon ? fy * fy * fy : lab.L / kKappa);
    const double z = kWhiteZ * lab_f_inv(fz);

    const auto& m = from_xyz().m;
    LinearRgb lin{m[0][0] * x + m[0][1] * y + m[0][2] * z,
                  m[1][0] * x + m[1][1] * y + m[1][2] * z,
                  m[2][0] * x + m[2][1] * y + m[2][2] * z};

    // Tolerate round-off at the gamut boundary before flagging a clamp.
    constexpr double kSlack = 1e-9;
    const auto out = [](double v) { return v < -kSlack || v > 1.0 + kSlack; };
    const bool clamped = out(lin.r) || out(lin.g) || out(lin.b);
    return {from_linear(lin), clamped};
}

double ciede2000(const LabColor& x, const LabColor& y) {
    const double c1 = std::hypot(x.a, x.b);
    const double c2 = std::hypot(y.a, y.b);
    const double c_bar = 0.5 * (c1 + c2);
    const double c_bar7 = std::pow(c_bar, 7.0);
    const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + std::pow(25.0, 7.0))));

    const double a1p = (1.0 + g) * x.a;
    const double a2p = (1.0 + g) * y.a;
    const double c1p = std::hypot(a1p, x.b);
    const double c2p = std::hypot(a2p, y.b);
    const double h1p = hue_deg(x.b, a1p);
    const double h2p = hue_deg(y.b, a2p);

    const double d_lp = y.L - x.L;
    const double d_cp = c2p - c1p;

    double d_hp = 0.0;
    if (c1p * c2p != 0.0) {
        d_hp = h2p - h1p;
        if (d_hp > 180.0) d_hp -= 360.0;
        else if (d_hp < -180.0) d_hp += 360.0;
    }
    const double d_Hp = 2.0 * std::sqrt(c1p * c2p) * std::sin(deg2rad(d_hp / 2.0));

    const double l_bar_p = 0.5 * (x.L + y.L);
    const double c_bar_p = 0.5 * (c1p + c2p);

    double h_bar_p = h1p + h2p;
    if (c1p * c2p != 0.0) {
        if (std::abs(h1p - h2p) <= 180.0) h_bar_p *= 0.5;
        else if (h1p + h2p < 360.0) h_bar_p = 0.5 * (h1p + h2p + 360.0);
        else h_bar_p = 0.5 * (h1p + h2p - 360.0);
    }

    const double t = 1.0 - 0.17 * std::cos(deg2rad(h_bar_p - 30.0)) +
                     0.24 * std::cos(deg2rad(2.0 * h_bar_p)) +
                     0.32 * std::cos(deg2rad(3.0 * h_bar_p + 6.0)) -
                     0.20 * std::cos(deg2rad(4.0 * h_bar_p - 63.0));

    const double d_theta = 30.0 * std::exp(-std::pow((h_bar_p - 275.0) / 25.0, 2.0));
    const double c_bar_p7 = std::pow(c_bar_p, 7.0);
    const double r_c = 2.0 * std::sqrt(c_bar_p7 / (c_bar_p7 + std::pow(25.0, 7.0)));
    const double l50 = (l_bar_p - 50.0) * (l_bar_p - 50.0);
    const double s_l = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
    const double s_c = 1.0 + 0.045 * c_bar_p;
    const double s_h = 1.0 + 0.015 * c_bar_p * t;
    const double r_t = -std::sin(deg2rad(2.0 * d_theta)) * r_c;

    const double tl = d_lp / s_l;
    const double tc = d_cp / s_c;
    const double th = d_Hp / s_h;
    return std::sqrt(tl * tl + tc * tc + th * th + r_t * tc * th);
}

double luminance_diff(const LabColor& x, const LabColor& y) { return std::abs(x.L - y.L); }

double lch_hue(const LabColor& x) { return hue_deg(x.b, x.a); }

std::string to_hex(Srgb8 c) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out = "#000000";
    const std::uint8_t ch[3] = {c.r, c.g, c.b};
    for (int i = 0; i < 3; ++i) {
        out[1 + 2 * i] = kDigits[ch[i] >> 4];
        out[2 + 2 * i] = kDigits[ch[i] & 0xF];
    }
    return out;
}

std::optional<Srgb8> parse_hex(std::string_view text) {
    if (!text.empty() && text.front() == '#') text.remove_prefix(1);
    if (text.size() != 6) return std::nullopt;
    std::uint8_t ch[3];
    for (int i = 0; i < 3; ++i) {
        const auto part = text.substr(2 * i, 2);
        unsigned v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + 2, v, 16);
        if (ec != std::errc{} || ptr != part.data() + 2) return std::nullopt;
        ch[i] = static_cast<std::uint8_t>(v);
    }
    return Srgb8{ch[0], ch[1], ch[2]};
}

}  // namespace blendopt
