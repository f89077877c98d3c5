#include "dinw/resize.hpp"

#include <algorithm>
#include <cmath>

namespace dinw {

Frame resize_bilinear(const Frame& src, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1) {
        throw ShapeError("resize_bilinear: target " + std::to_string(out_width) + "x" +
                         std::to_string(out_height));
    }
    if (src.width == out_width && src.height == out_height) return src;

    Frame dst(out_width, out_height, src.channels);
    const double sx = static_cast<double>(src.width) / out_width;
    const double sy = static_cast<double>(src.height) / out_height;

    for (int c = 0; c < src.channels; ++c) {
        for (int oy = 0; oy < out_height; ++oy) {
            const double fy = (oy + 0.5) * sy - 0.5;
            const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
            const int y1 = std::min(y0 + 1, src.height - 1);
            const double wy = std::clamp(fy - y0, 0.0, 1.0);
            const float* r0 = src.row(c, y0);
            const float* r1 = src.row(c, y1);
            float* out = dst.row(c, oy);
            for (int ox = 0; ox < out_width; ++ox) {
                const double fx = (ox + 0.5) * sx - 0.5;
                const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
                const int x1 = std::min(x0 + 1, src.width - 1);
                const double wx = std::clamp(fx - x0, 0.0, 1.0);
                const double top = (1.0 - wx) * r0[x0] + wx * r0[x1];
                const double bot = (1.0 - wx) * r1[x0] + wx * r1[x1];
                out[ox] = static_cast<float>((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return dst;
}

}  // namespace dinw
