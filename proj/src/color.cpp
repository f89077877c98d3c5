#include "dinw/color.hpp"

#include <cmath>

namespace dinw {

namespace {

// sRGB <-> XYZ, D65 white (IEC 61966-2-1 matrix).
constexpr double kXn = 0.95047;
constexpr double kYn = 1.00000;
constexpr double kZn = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

double srgb_linearize(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double srgb_delinearize(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

}  // namespace

LabImage rgb_to_lab(const Frame& rgb) {
    if (rgb.channels != 3) {
        throw ShapeError("rgb_to_lab: expected 3 channels, got " + std::to_string(rgb.channels));
    }
    LabImage out;
    out.width = rgb.width;
    out.height = rgb.height;
    const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
    out.L.resize(n);
    out.a.resize(n);
    out.b.resize(n);
    const float* pr = rgb.row(0, 0);
    const float* pg = rgb.row(1, 0);
    const float* pb = rgb.row(2, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = srgb_linearize(pr[i]);
        const double g = srgb_linearize(pg[i]);
        const double b = srgb_linearize(pb[i]);
        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        const double fx = lab_f(x / kXn);
        const double fy = lab_f(y / kYn);
        const double fz = lab_f(z / kZn);
        out.L[i] = static_cast<float>((116.0 * fy - 16.0) / 100.0);
        out.a[i] = static_cast<float>(500.0 * (fx - fy));
        out.b[i] = static_cast<float>(200.0 * (fy - fz));
    }
    return out;
}

Frame lab_to_rgb(const LabImage& lab) {
    Frame out(lab.width, lab.height, 3);
    float* pr = out.row(0, 0);
    float* pg = out.row(1, 0);
    float* pb = out.row(2, 0);
    const std::size_t n = static_cast<std::size_t>(lab.width) * lab.height;
    for (std::size_t i = 0; i < n; ++i) {
        const double fy = (static_cast<double>(lab.L[i]) * 100.0 + 16.0) / 116.0;
        const double fx = fy + static_cast<double>(lab.a[i]) / 500.0;
        const double fz = fy - static_cast<double>(lab.b[i]) / 200.0;
        const double x = kXn * lab_f_inv(fx);
        const double y = kYn * lab_f_inv(fy);
        const double z = kZn * lab_f_inv(fz);
        const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
        const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
        const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
        pr[i] = clamp01(static_cast<float>(srgb_delinearize(r)));
        pg[i] = clamp01(static_cast<float>(srgb_delinearize(g)));
        pb[i] = clamp01(static_cast<float>(srgb_delinearize(b)));
    }
    return out;
}

Frame rgb_to_L(const Frame& frame) {
    if (frame.channels == 1) return frame;
    LabImage lab = rgb_to_lab(frame);
    Frame out(frame.width, frame.height, 1);
    for (std::size_t i = 0; i < lab.L.size(); ++i) out.data[i] = clamp01(lab.L[i]);
    return out;
}

}  // namespace dinw
