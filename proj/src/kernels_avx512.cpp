// AVX-512 forward kernel (and the transposed backward-input built on it).
// The lane-structured reductions (weight gradients, sums) and elementwise
// kernels are shared with the AVX2 backend; per-element term order matches
// the scalar reference, so this backend is bit-identical too.

#include <algorithm>
#include <vector>

#include "dinw/parallel.hpp"
#include "kernels_detail.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DINW_AVX512_BUILD 1
#include <immintrin.h>
#else
#define DINW_AVX512_BUILD 0
#endif

namespace dinw::kernels {

const KernelTable* avx2_table_or_null();

#if DINW_AVX512_BUILD

namespace {

using detail::build_padded_row_segment;
using detail::kTileCols;
using detail::kTileRows;

template <int KH, int KW>
void accumulate_row_z(double* arow, std::int64_t tw, const double* base, std::int64_t seg_w,
                      const float* ws) {
    __m512d w[KH * KW];
    for (int i = 0; i < KH * KW; ++i) w[i] = _mm512_set1_pd(static_cast<double>(ws[i]));
    std::int64_t ox = 0;
    for (; ox + 16 <= tw; ox += 16) {
        __m512d a0 = _mm512_loadu_pd(arow + ox);
        __m512d a1 = _mm512_loadu_pd(arow + ox + 8);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                a0 = _mm512_fmadd_pd(w[kh * KW + kw], _mm512_loadu_pd(r + kw), a0);
                a1 = _mm512_fmadd_pd(w[kh * KW + kw], _mm512_loadu_pd(r + kw + 8), a1);
            }
        }
        _mm512_storeu_pd(arow + ox, a0);
        _mm512_storeu_pd(arow + ox + 8, a1);
    }
    for (; ox + 8 <= tw; ox += 8) {
        __m512d a0 = _mm512_loadu_pd(arow + ox);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                a0 = _mm512_fmadd_pd(w[kh * KW + kw], _mm512_loadu_pd(r + kw), a0);
            }
        }
        _mm512_storeu_pd(arow + ox, a0);
    }
    for (; ox < tw; ++ox) {
        double a = arow[ox];
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            const float* wk = ws + kh * KW;
            for (int kw = 0; kw < KW; ++kw) a += static_cast<double>(wk[kw]) * r[kw];
        }
        arow[ox] = a;
    }
}

template <int KH, int KW>
void accumulate_row_pair_z(double* arow0, double* arow1, std::int64_t tw, const double* base,
                           std::int64_t seg_w, const float* ws0, const float* ws1) {
    __m512d w0[KH * KW], w1[KH * KW];
    for (int i = 0; i < KH * KW; ++i) {
        w0[i] = _mm512_set1_pd(static_cast<double>(ws0[i]));
        w1[i] = _mm512_set1_pd(static_cast<double>(ws1[i]));
    }
    std::int64_t ox = 0;
    for (; ox + 16 <= tw; ox += 16) {
        __m512d a00 = _mm512_loadu_pd(arow0 + ox);
        __m512d a01 = _mm512_loadu_pd(arow0 + ox + 8);
        __m512d a10 = _mm512_loadu_pd(arow1 + ox);
        __m512d a11 = _mm512_loadu_pd(arow1 + ox + 8);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                const __m512d v0 = _mm512_loadu_pd(r + kw);
                const __m512d v1 = _mm512_loadu_pd(r + kw + 8);
                a00 = _mm512_fmadd_pd(w0[kh * KW + kw], v0, a00);
                a01 = _mm512_fmadd_pd(w0[kh * KW + kw], v1, a01);
                a10 = _mm512_fmadd_pd(w1[kh * KW + kw], v0, a10);
                a11 = _mm512_fmadd_pd(w1[kh * KW + kw], v1, a11);
            }
        }
        _mm512_storeu_pd(arow0 + ox, a00);
        _mm512_storeu_pd(arow0 + ox + 8, a01);
        _mm512_storeu_pd(arow1 + ox, a10);
        _mm512_storeu_pd(arow1 + ox + 8, a11);
    }
    for (; ox + 8 <= tw; ox += 8) {
        __m512d a00 = _mm512_loadu_pd(arow0 + ox);
        __m512d a10 = _mm512_loadu_pd(arow1 + ox);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                const __m512d v0 = _mm512_loadu_pd(r + kw);
                a00 = _mm512_fmadd_pd(w0[kh * KW + kw], v0, a00);
                a10 = _mm512_fmadd_pd(w1[kh * KW + kw], v0, a10);
            }
        }
        _mm512_storeu_pd(arow0 + ox, a00);
        _mm512_storeu_pd(arow1 + ox, a10);
    }
    for (; ox < tw; ++ox) {
        double a0 = arow0[ox];
        double a1 = arow1[ox];
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                a0 += static_cast<double>(ws0[kh * KW + kw]) * r[kw];
                a1 += static_cast<double>(ws1[kh * KW + kw]) * r[kw];
            }
        }
        arow0[ox] = a0;
        arow1[ox] = a1;
    }
}

void accumulate_row_generic_z(double* arow, std::int64_t tw, const double* base,
                              std::int64_t seg_w, const float* ws, int k_h, int k_w) {
    for (std::int64_t ox = 0; ox < tw; ++ox) {
        double a = arow[ox];
        for (int kh = 0; kh < k_h; ++kh) {
            const double* r = base + kh * seg_w + ox;
            const float* wk = ws + kh * k_w;
            for (int kw = 0; kw < k_w; ++kw) a += static_cast<double>(wk[kw]) * r[kw];
        }
        arow[ox] = a;
    }
}

using RowFn = void (*)(double*, std::int64_t, const double*, std::int64_t, const float*);
using RowPairFn = void (*)(double*, double*, std::int64_t, const double*, std::int64_t,
                           const float*, const float*);

void conv2d_forward_avx512(const float* x, const float* w, const float* bias, float* y,
                           const ConvGeom& g) {
    const std::int64_t ytiles = (g.out_h + kTileRows - 1) / kTileRows;
    const std::int64_t xtiles = (g.out_w + kTileCols - 1) / kTileCols;
    const std::int64_t ktaps = static_cast<std::int64_t>(g.k_h) * g.k_w;

    RowFn row_fn = nullptr;
    RowPairFn pair_fn = nullptr;
    if (g.k_h == 3 && g.k_w == 3) {
        row_fn = accumulate_row_z<3, 3>;
        pair_fn = accumulate_row_pair_z<3, 3>;
    }
    if (g.k_h == 1 && g.k_w == 1) {
        row_fn = accumulate_row_z<1, 1>;
        pair_fn = accumulate_row_pair_z<1, 1>;
    }

    parallel_for(0, g.batch * ytiles * xtiles, [&](std::int64_t task) {
        const std::int64_t n = task / (ytiles * xtiles);
        const std::int64_t rem = task % (ytiles * xtiles);
        const std::int64_t oy0 = (rem / xtiles) * kTileRows;
        const std::int64_t ox0 = (rem % xtiles) * kTileCols;
        const std::int64_t rows = std::min<std::int64_t>(kTileRows, g.out_h - oy0);
        const std::int64_t tw = std::min<std::int64_t>(kTileCols, g.out_w - ox0);
        const std::int64_t nrows = (rows - 1) * g.stride_h + g.k_h;
        const std::int64_t seg_w = tw + g.k_w - 1;

        std::vector<double> staged(static_cast<std::size_t>(g.in_c * nrows * seg_w));
        for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
            const float* plane = x + (n * g.in_c + ic) * g.in_h * g.in_w;
            for (std::int64_t r = 0; r < nrows; ++r) {
                build_padded_row_segment(plane, g, oy0 * g.stride_h + r - g.pad_top, ox0, seg_w,
                                         staged.data() + (ic * nrows + r) * seg_w);
            }
        }

        std::vector<double> acc(static_cast<std::size_t>(2 * rows * tw));
        auto write_out = [&](std::int64_t oc, const double* asrc) {
            for (std::int64_t ty = 0; ty < rows; ++ty) {
                float* yrow = y + ((n * g.out_c + oc) * g.out_h + (oy0 + ty)) * g.out_w + ox0;
                const double* arow = asrc + ty * tw;
                std::int64_t ox = 0;
                for (; ox + 8 <= tw; ox += 8) {
                    _mm256_storeu_ps(yrow + ox, _mm512_cvtpd_ps(_mm512_loadu_pd(arow + ox)));
                }
                for (; ox < tw; ++ox) yrow[ox] = static_cast<float>(arow[ox]);
            }
        };

        std::int64_t oc = 0;
        for (; pair_fn != nullptr && oc + 2 <= g.out_c; oc += 2) {
            double* acc0 = acc.data();
            double* acc1 = acc.data() + rows * tw;
            std::fill(acc0, acc0 + rows * tw, static_cast<double>(bias[oc]));
            std::fill(acc1, acc1 + rows * tw, static_cast<double>(bias[oc + 1]));
            for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
                const float* ws0 = w + (oc * g.in_c + ic) * ktaps;
                const float* ws1 = w + ((oc + 1) * g.in_c + ic) * ktaps;
                const double* chan = staged.data() + ic * nrows * seg_w;
                for (std::int64_t ty = 0; ty < rows; ++ty) {
                    pair_fn(acc0 + ty * tw, acc1 + ty * tw, tw, chan + ty * g.stride_h * seg_w,
                            seg_w, ws0, ws1);
                }
            }
            write_out(oc, acc0);
            write_out(oc + 1, acc1);
        }
        for (; oc < g.out_c; ++oc) {
            double* acc0 = acc.data();
            std::fill(acc0, acc0 + rows * tw, static_cast<double>(bias[oc]));
            for (std::int64_t ic = 0; ic < g.in_c; ++ic) {
                const float* ws = w + (oc * g.in_c + ic) * ktaps;
                const double* chan = staged.data() + ic * nrows * seg_w;
                for (std::int64_t ty = 0; ty < rows; ++ty) {
                    double* arow = acc0 + ty * tw;
                    const double* base = chan + ty * g.stride_h * seg_w;
                    if (row_fn != nullptr) {
                        row_fn(arow, tw, base, seg_w, ws);
                    } else {
                        accumulate_row_generic_z(arow, tw, base, seg_w, ws, g.k_h, g.k_w);
                    }
                }
            }
            write_out(oc, acc0);
        }
    });
}

void conv2d_backward_input_avx512(const float* dy, const float* w, float* dx, const ConvGeom& g);

const KernelTable& make_avx512_table() {
    static const KernelTable t = [] {
        KernelTable base = *avx2_table_or_null();
        base.conv2d_forward = conv2d_forward_avx512;
        base.conv2d_backward_input = conv2d_backward_input_avx512;
        return base;
    }();
    return t;
}

void conv2d_backward_input_avx512(const float* dy, const float* w, float* dx, const ConvGeom& g) {
    detail::conv2d_backward_input_via_forward(make_avx512_table(), dy, w, dx, g);
}

}  // namespace

const KernelTable* avx512_table_or_null() {
    if (avx2_table_or_null() == nullptr) return nullptr;
    return &make_avx512_table();
}

#else  // !DINW_AVX512_BUILD

const KernelTable* avx512_table_or_null() { return nullptr; }

#endif

}  // namespace dinw::kernels
