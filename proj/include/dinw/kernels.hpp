#pragma once

#include <cstdint>

#include "dinw/tensor.hpp"

namespace dinw::kernels {

// Backend-selectable inner loops. Every backend follows the same numeric
// contract so results do not depend on which one the dispatcher picks:
//
//   * accumulation happens in double; float->double products are exact
//     (24-bit mantissas), so mul+add and fused multiply-add agree bit for bit;
//   * each output element sums its terms in one fixed order (channel-major,
//     then kernel row, then kernel column);
//   * reductions (weight gradients, sums) fill four double lanes keyed by
//     index mod 4 and combine them as (l0+l2)+(l1+l3).
//
// Under that contract the scalar and AVX2 paths return identical bits, which
// is what the equivalence tests assert.
enum class Backend { Scalar, Avx2, Avx512 };

const char* backend_name(Backend b);
bool backend_available(Backend b);

// Active backend: DINW_SIMD={scalar,avx2,avx512,auto} when set, else the
// widest available. set_backend overrides at runtime (tests, bench).
Backend active_backend();
void set_backend(Backend b);

// Resolved same-padding geometry for one conv2d call.
struct ConvGeom {
    std::int64_t batch = 1;
    std::int64_t in_c = 1, in_h = 1, in_w = 1;
    std::int64_t out_c = 1, out_h = 1, out_w = 1;
    int k_h = 1, k_w = 1;
    int stride_h = 1, stride_w = 1;
    int pad_top = 0, pad_left = 0;
    int pad_h = 0, pad_w = 0;  // totals; bottom/right get the remainder
    bool replicate = false;

    std::int64_t padded_h() const { return in_h + pad_h; }
    std::int64_t padded_w() const { return in_w + pad_w; }
};

ConvGeom conv_geometry(const ConvSpec& spec, std::int64_t batch, std::int64_t in_h,
                       std::int64_t in_w);

// x: (n, in_c, in_h, in_w), w: (out_c, in_c, k_h, k_w), bias: out_c,
// y: (n, out_c, out_h, out_w)
using Conv2dForwardFn = void (*)(const float* x, const float* w, const float* bias, float* y,
                                 const ConvGeom& g);
// dy: (n, out_c, out_h, out_w) -> dx: (n, in_c, in_h, in_w)
using Conv2dBackwardInputFn = void (*)(const float* dy, const float* w, float* dx,
                                       const ConvGeom& g);
// dw: (out_c, in_c, k_h, k_w), db: out_c; both overwritten
using Conv2dBackwardWeightsFn = void (*)(const float* x, const float* dy, float* dw, float* db,
                                         const ConvGeom& g);
using ReluForwardFn = void (*)(const float* x, float* y, std::int64_t n);
using ReluBackwardFn = void (*)(const float* x, const float* dy, float* dx, std::int64_t n);
using SumFn = double (*)(const float* x, std::int64_t n);

struct KernelTable {
    Conv2dForwardFn conv2d_forward;
    Conv2dBackwardInputFn conv2d_backward_input;
    Conv2dBackwardWeightsFn conv2d_backward_weights;
    ReluForwardFn relu_forward;
    ReluBackwardFn relu_backward;
    SumFn sum;
    SumFn sum_squares;
};

const KernelTable& table();           // active backend
const KernelTable& table(Backend b);  // explicit backend (equivalence tests)

}  // namespace dinw::kernels
