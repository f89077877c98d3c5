// Reference kernels. These define the numeric behavior; the SIMD backends
// must reproduce them bit for bit (see kernels.hpp).

#include <algorithm>
#include <vector>

#include "dinw/parallel.hpp"
#include "kernels_detail.hpp"

namespace dinw::kernels {

const KernelTable& scalar_table();

namespace {

using detail::build_padded_plane;
using detail::build_padded_row_segment;
using detail::combine_lanes;
using detail::fold_padded_grad;
using detail::kTileCols;
using detail::kTileRows;

void conv2d_forward_scalar(const float* x, const float* w, const float* bias, float* y,
                           const ConvGeom& g) {
    const std::int64_t ytiles = (g.out_h + kTileRows - 1) / kTileRows;
    const std::int64_t xtiles = (g.out_w + kTileCols - 1) / kTileCols;
    const std::int64_t ktaps = static_cast<std::int64_t>(g.k_h) * g.k_w;

    parallel_for(0, g.batch * ytiles * xtiles, [&](std::int64_t task) {
        const std::int64_t n = task / (ytiles * xtiles);
        const std::int64_t rem = task % (ytiles * xtiles);
        const std::int64_t oy0 = (rem / xtiles) * kTileRows;
        const std::int64_t ox0 = (rem % xtiles) * kTileCols;
        const std::int64_t rows = std::min<std::int64_t>(kTileRows, g.out_h - oy0);
        const std::int64_t tw = std::min<std::int64_t>(kTileCols, g.out_w - ox0);
        const std::int64_t nrows = (rows - 1) * g.stride_h + g.k_h;
        const std::int64_t seg_w = tw + g.k_w - 1;

        // Padded input rows for every channel, converted to double once and
        // reused by all output channels.
        std::vector<double> staged(static_cast<std::size_t>(g.in_c * nrows * seg_w));
        for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
            const float* plane = x + (n * g.in_c + ic) * g.in_h * g.in_w;
            for (std::int64_t r = 0; r < nrows; ++r) {
                build_padded_row_segment(plane, g, oy0 * g.stride_h + r - g.pad_top, ox0, seg_w,
                                         staged.data() + (ic * nrows + r) * seg_w);
            }
        }

        std::vector<double> acc(static_cast<std::size_t>(rows * tw));
        for (std::int64_t oc = 0; oc < g.out_c; ++oc) {
            std::fill(acc.begin(), acc.end(), static_cast<double>(bias[oc]));
            for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
                const float* ws = w + (oc * g.in_c + ic) * ktaps;
                const double* chan = staged.data() + ic * nrows * seg_w;
                for (std::int64_t ty = 0; ty < rows; ++ty) {
                    double* arow = acc.data() + ty * tw;
                    const double* base = chan + ty * g.stride_h * seg_w;
                    for (std::int64_t ox = 0; ox < tw; ++ox) {
                        double a = arow[ox];
                        for (int kh = 0; kh < g.k_h; ++kh) {
                            const double* r = base + kh * seg_w + ox;
                            const float* wk = ws + kh * g.k_w;
                            for (int kw = 0; kw < g.k_w; ++kw) {
                                a += static_cast<double>(wk[kw]) * r[kw];
                            }
                        }
                        arow[ox] = a;
                    }
                }
            }
            for (std::int64_t ty = 0; ty < rows; ++ty) {
                float* yrow = y + ((n * g.out_c + oc) * g.out_h + (oy0 + ty)) * g.out_w + ox0;
                const double* arow = acc.data() + ty * tw;
                for (std::int64_t ox = 0; ox < tw; ++ox) yrow[ox] = static_cast<float>(arow[ox]);
            }
        }
    });
}

void conv2d_backward_input_scalar(const float* dy, const float* w, float* dx,
                                  const ConvGeom& g) {
    detail::conv2d_backward_input_via_forward(scalar_table(), dy, w, dx, g);
}

void conv2d_backward_weights_scalar(const float* x, const float* dy, float* dw, float* db,
                                    const ConvGeom& g) {
    const std::int64_t hp = g.padded_h();
    const std::int64_t wp = g.padded_w();
    const std::int64_t ktaps = static_cast<std::int64_t>(g.k_h) * g.k_w;
    const std::int64_t oplane = g.out_h * g.out_w;

    parallel_for(0, g.in_c, [&](std::int64_t ic) {
        std::vector<double> lanes(static_cast<std::size_t>(g.out_c * ktaps * 4), 0.0);
        std::vector<double> blanes(ic == 0 ? static_cast<std::size_t>(g.out_c * 4) : 0, 0.0);
        std::vector<double> xpad(static_cast<std::size_t>(hp * wp));
        std::vector<double> dyd(static_cast<std::size_t>(oplane));

        for (std::int64_t n = 0; n < g.batch; ++n) {
            build_padded_plane(x + (n * g.in_c + ic) * g.in_h * g.in_w, g, xpad.data());
            for (std::int64_t oc = 0; oc < g.out_c; ++oc) {
                const float* dyp = dy + (n * g.out_c + oc) * oplane;
                for (std::int64_t i = 0; i < oplane; ++i) dyd[static_cast<std::size_t>(i)] = static_cast<double>(dyp[i]);
                // One sweep accumulates every tap; per tap the (oy, ox) term
                // order is unchanged, so lanes match the tap-major
                // formulation bit for bit.
                double* l4 = lanes.data() + oc * ktaps * 4;
                for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
                    const double* dyrow = dyd.data() + oy * g.out_w;
                    for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
                        const double d = dyrow[ox];
                        for (int kh = 0; kh < g.k_h; ++kh) {
                            const double* xrow = xpad.data() + (oy * g.stride_h + kh) * wp;
                            for (int kw = 0; kw < g.k_w; ++kw) {
                                l4[(kh * g.k_w + kw) * 4 + (ox & 3)] += d * xrow[ox + kw];
                            }
                        }
                    }
                }
                if (ic == 0) {
                    double* b4 = blanes.data() + oc * 4;
                    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
                        const double* dyrow = dyd.data() + oy * g.out_w;
                        for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
                            b4[ox & 3] += dyrow[ox];
                        }
                    }
                }
            }
        }

        for (std::int64_t oc = 0; oc < g.out_c; ++oc) {
            for (std::int64_t k = 0; k < ktaps; ++k) {
                dw[(oc * g.in_c + ic) * ktaps + k] =
                    static_cast<float>(combine_lanes(lanes.data() + (oc * ktaps + k) * 4));
            }
            if (ic == 0) db[oc] = static_cast<float>(combine_lanes(blanes.data() + oc * 4));
        }
    });
}

void relu_forward_scalar(const float* x, float* y, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_scalar(const float* x, const float* dy, float* dx, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

double sum_scalar(const float* x, std::int64_t n) {
    double lanes[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::int64_t i = 0; i < n; ++i) lanes[i & 3] += static_cast<double>(x[i]);
    return combine_lanes(lanes);
}

double sum_squares_scalar(const float* x, std::int64_t n) {
    double lanes[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::int64_t i = 0; i < n; ++i) {
        lanes[i & 3] += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    }
    return combine_lanes(lanes);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t = {
        conv2d_forward_scalar,       conv2d_backward_input_scalar,
        conv2d_backward_weights_scalar, relu_forward_scalar,
        relu_backward_scalar,        sum_scalar,
        sum_squares_scalar,
    };
    return t;
}

}  // namespace dinw::kernels
