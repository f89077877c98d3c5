// conv2d_backward_input, expressed as a forward convolution over the
// zero-stuffed output gradient with flipped, channel-transposed weights.
// Runs through whichever backend's forward kernel is handed in, then folds
// the padded grid back onto the input plane.

#include <cstring>
#include <memory>
#include <vector>

#include "dinw/parallel.hpp"
#include "kernels_detail.hpp"

namespace dinw::kernels::detail {

void conv2d_backward_input_via_forward(const KernelTable& kt, const float* dy, const float* w,
                                       float* dx, const ConvGeom& g) {
    const std::int64_t sh = (g.out_h - 1) * g.stride_h + 1;  // stuffed height
    const std::int64_t sw = g.out_w;                         // stride_w == 1
    const std::int64_t hp = g.padded_h();
    const std::int64_t wp = g.padded_w();
    const std::int64_t ktaps = static_cast<std::int64_t>(g.k_h) * g.k_w;

    // With stride 1 the stuffed gradient is dy itself.
    const float* stuffed_ptr = dy;
    std::vector<float> stuffed;
    if (g.stride_h != 1) {
        stuffed.assign(static_cast<std::size_t>(g.batch * g.out_c * sh * sw), 0.0f);
        for (std::int64_t n = 0; n < g.batch; ++n) {
            for (std::int64_t oc = 0; oc < g.out_c; ++oc) {
                const float* src = dy + (n * g.out_c + oc) * g.out_h * g.out_w;
                float* dst = stuffed.data() + (n * g.out_c + oc) * sh * sw;
                for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
                    std::memcpy(dst + oy * g.stride_h * sw, src + oy * g.out_w,
                                static_cast<std::size_t>(g.out_w) * sizeof(float));
                }
            }
        }
        stuffed_ptr = stuffed.data();
    }

    // wf[ic][oc][kh][kw] = w[oc][ic][K-1-kh][K-1-kw]
    std::vector<float> wf(static_cast<std::size_t>(g.in_c * g.out_c * ktaps));
    for (std::int64_t oc = 0; oc < g.out_c; ++oc) {
        for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
            const float* src = w + (oc * g.in_c + ic) * ktaps;
            float* dst = wf.data() + (ic * g.out_c + oc) * ktaps;
            for (int kh = 0; kh < g.k_h; ++kh) {
                for (int kw = 0; kw < g.k_w; ++kw) {
                    dst[kh * g.k_w + kw] = src[(g.k_h - 1 - kh) * g.k_w + (g.k_w - 1 - kw)];
                }
            }
        }
    }

    ConvGeom tg;
    tg.batch = g.batch;
    tg.in_c = g.out_c;
    tg.in_h = sh;
    tg.in_w = sw;
    tg.out_c = g.in_c;
    tg.out_h = hp;
    tg.out_w = wp;
    tg.k_h = g.k_h;
    tg.k_w = g.k_w;
    tg.stride_h = 1;
    tg.stride_w = 1;
    tg.pad_top = g.k_h - 1;
    tg.pad_left = g.k_w - 1;
    tg.pad_h = 2 * (g.k_h - 1);
    tg.pad_w = 2 * (g.k_w - 1);
    tg.replicate = false;  // the transposed grid is zero-extended regardless

    std::vector<float> zero_bias(static_cast<std::size_t>(g.in_c), 0.0f);
    const auto grid = std::make_unique_for_overwrite<float[]>(
        static_cast<std::size_t>(g.batch * g.in_c * hp * wp));
    kt.conv2d_forward(stuffed_ptr, wf.data(), zero_bias.data(), grid.get(), tg);

    parallel_for(0, g.batch * g.in_c, [&](std::int64_t task) {
        fold_padded_grad(grid.get() + task * hp * wp, g, dx + task * g.in_h * g.in_w);
    });
}

}  // namespace dinw::kernels::detail
