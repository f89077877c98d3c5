#pragma once

// Shared pieces for the conv kernel backends. Everything here is scalar glue
// (padding, double conversion, gradient folding, term lists); the per-backend
// files supply the inner loops. All buffers hand the backends doubles, so the
// float->double conversion happens once per tile and every backend sees the
// exact same values.

#include <cstdint>
#include <cstring>
#include <vector>

#include "dinw/kernels.hpp"

namespace dinw::kernels::detail {

// Output tile processed per task in conv2d_forward. Bounds the per-channel
// accumulator (kTileRows * kTileCols doubles, L1-resident) and the padded
// input rows staged per tile (in_c * rows * cols doubles, L2-resident).
inline constexpr std::int64_t kTileRows = 4;
inline constexpr std::int64_t kTileCols = 256;

// Writes `count` doubles of the virtually padded row iy starting at padded
// column px0 (padded column j maps to input column j - pad_left).
inline void build_padded_row_segment(const float* plane, const ConvGeom& g, std::int64_t iy,
                                     std::int64_t px0, std::int64_t count, double* dst) {
    if (iy < 0 || iy >= g.in_h) {
        if (!g.replicate) {
            for (std::int64_t j = 0; j < count; ++j) dst[j] = 0.0;
            return;
        }
        iy = iy < 0 ? 0 : g.in_h - 1;
    }
    const float* row = plane + iy * g.in_w;
    for (std::int64_t j = 0; j < count; ++j) {
        std::int64_t ix = px0 + j - g.pad_left;
        if (ix < 0 || ix >= g.in_w) {
            if (!g.replicate) {
                dst[j] = 0.0;
                continue;
            }
            ix = ix < 0 ? 0 : g.in_w - 1;
        }
        dst[j] = static_cast<double>(row[ix]);
    }
}

// Whole padded plane (padded_h x padded_w) in double.
inline void build_padded_plane(const float* plane, const ConvGeom& g, double* dst) {
    for (std::int64_t r = 0; r < g.padded_h(); ++r) {
        build_padded_row_segment(plane, g, r - g.pad_top, 0, g.padded_w(), dst + r * g.padded_w());
    }
}

// Collapses a gradient on the padded grid back onto the real input plane,
// accumulating in double. Zero padding drops the border; replicate padding
// folds each border cell into the edge cell it mirrored. Shared verbatim by
// all backends.
inline void fold_padded_grad(const float* dxpad, const ConvGeom& g, float* dx) {
    const std::int64_t wp = g.padded_w();
    const int pt = g.pad_top;
    const int pb = g.pad_h - g.pad_top;
    const int pl = g.pad_left;
    const int pr = g.pad_w - g.pad_left;
    for (std::int64_t iy = 0; iy < g.in_h; ++iy) {
        for (std::int64_t ix = 0; ix < g.in_w; ++ix) {
            double acc = static_cast<double>(dxpad[(iy + pt) * wp + (ix + pl)]);
            if (g.replicate) {
                const bool top = iy == 0;
                const bool bottom = iy == g.in_h - 1;
                const bool left = ix == 0;
                const bool right = ix == g.in_w - 1;
                auto add_cell = [&](std::int64_t py, std::int64_t px) {
                    acc += static_cast<double>(dxpad[py * wp + px]);
                };
                if (top)
                    for (int j = 0; j < pt; ++j) add_cell(j, ix + pl);
                if (bottom)
                    for (int j = 0; j < pb; ++j) add_cell(pt + g.in_h + j, ix + pl);
                if (left)
                    for (int j = 0; j < pl; ++j) add_cell(iy + pt, j);
                if (right)
                    for (int j = 0; j < pr; ++j) add_cell(iy + pt, pl + g.in_w + j);
                // Corner padding cells replicate the corner pixel.
                if (top && left)
                    for (int a = 0; a < pt; ++a)
                        for (int b = 0; b < pl; ++b) add_cell(a, b);
                if (top && right)
                    for (int a = 0; a < pt; ++a)
                        for (int b = 0; b < pr; ++b) add_cell(a, pl + g.in_w + b);
                if (bottom && left)
                    for (int a = 0; a < pb; ++a)
                        for (int b = 0; b < pl; ++b) add_cell(pt + g.in_h + a, b);
                if (bottom && right)
                    for (int a = 0; a < pb; ++a)
                        for (int b = 0; b < pr; ++b) add_cell(pt + g.in_h + a, pl + g.in_w + b);
            }
            dx[iy * g.in_w + ix] = static_cast<float>(acc);
        }
    }
}

// The input gradient is a convolution itself: stuff the output gradient with
// stride-1 zero rows, flip and transpose the weights, and run the backend's
// forward kernel over the zero-extended grid. Shared by both backends so each
// stays bit-identical to its own forward path.
void conv2d_backward_input_via_forward(const KernelTable& kt, const float* dy, const float* w,
                                       float* dx, const ConvGeom& g);

// Fixed lane-combine order shared by every reduction.
inline double combine_lanes(const double lanes[4]) {
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

}  // namespace dinw::kernels::detail
