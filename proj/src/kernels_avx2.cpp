// AVX2 variants of the conv/reduction kernels. Compiled with -mavx2 -mfma on
// x86-64; only reached after the dispatcher's runtime CPU check. Term order
// per output element matches the scalar backend exactly (see kernels.hpp), so
// these produce identical bits, just wider.

#include <algorithm>
#include <vector>

#include "dinw/parallel.hpp"
#include "kernels_detail.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define DINW_AVX2_BUILD 1
#include <immintrin.h>
#else
#define DINW_AVX2_BUILD 0
#endif

namespace dinw::kernels {

const KernelTable* avx2_table_or_null();

#if DINW_AVX2_BUILD

namespace {

using detail::build_padded_plane;
using detail::build_padded_row_segment;
using detail::combine_lanes;
using detail::fold_padded_grad;
using detail::kTileCols;
using detail::kTileRows;

// One output-row accumulation with compile-time tap bounds so the tap loops
// fully unroll and the nine broadcast weights stay in registers.
template <int KH, int KW>
void accumulate_row(double* arow, std::int64_t tw, const double* base, std::int64_t seg_w,
                    const float* ws) {
    __m256d w[KH * KW];
    for (int i = 0; i < KH * KW; ++i) w[i] = _mm256_set1_pd(static_cast<double>(ws[i]));
    std::int64_t ox = 0;
    for (; ox + 8 <= tw; ox += 8) {
        __m256d a0 = _mm256_loadu_pd(arow + ox);
        __m256d a1 = _mm256_loadu_pd(arow + ox + 4);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                a0 = _mm256_fmadd_pd(w[kh * KW + kw], _mm256_loadu_pd(r + kw), a0);
                a1 = _mm256_fmadd_pd(w[kh * KW + kw], _mm256_loadu_pd(r + kw + 4), a1);
            }
        }
        _mm256_storeu_pd(arow + ox, a0);
        _mm256_storeu_pd(arow + ox + 4, a1);
    }
    for (; ox + 4 <= tw; ox += 4) {
        __m256d a0 = _mm256_loadu_pd(arow + ox);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                a0 = _mm256_fmadd_pd(w[kh * KW + kw], _mm256_loadu_pd(r + kw), a0);
            }
        }
        _mm256_storeu_pd(arow + ox, a0);
    }
    for (; ox < tw; ++ox) {
        double a = arow[ox];
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            const float* wk = ws + kh * KW;
            for (int kw = 0; kw < KW; ++kw) {
                a += static_cast<double>(wk[kw]) * r[kw];
            }
        }
        arow[ox] = a;
    }
}

// Two output channels share every staged-row load; their weight vectors sit
// in a small stack array the FMAs read as memory operands.
template <int KH, int KW>
void accumulate_row_pair(double* arow0, double* arow1, std::int64_t tw, const double* base,
                         std::int64_t seg_w, const float* ws0, const float* ws1) {
    __m256d w0[KH * KW], w1[KH * KW];
    for (int i = 0; i < KH * KW; ++i) {
        w0[i] = _mm256_set1_pd(static_cast<double>(ws0[i]));
        w1[i] = _mm256_set1_pd(static_cast<double>(ws1[i]));
    }
    std::int64_t ox = 0;
    for (; ox + 8 <= tw; ox += 8) {
        __m256d a00 = _mm256_loadu_pd(arow0 + ox);
        __m256d a01 = _mm256_loadu_pd(arow0 + ox + 4);
        __m256d a10 = _mm256_loadu_pd(arow1 + ox);
        __m256d a11 = _mm256_loadu_pd(arow1 + ox + 4);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                const __m256d v0 = _mm256_loadu_pd(r + kw);
                const __m256d v1 = _mm256_loadu_pd(r + kw + 4);
                a00 = _mm256_fmadd_pd(w0[kh * KW + kw], v0, a00);
                a01 = _mm256_fmadd_pd(w0[kh * KW + kw], v1, a01);
                a10 = _mm256_fmadd_pd(w1[kh * KW + kw], v0, a10);
                a11 = _mm256_fmadd_pd(w1[kh * KW + kw], v1, a11);
            }
        }
        _mm256_storeu_pd(arow0 + ox, a00);
        _mm256_storeu_pd(arow0 + ox + 4, a01);
        _mm256_storeu_pd(arow1 + ox, a10);
        _mm256_storeu_pd(arow1 + ox + 4, a11);
    }
    for (; ox + 4 <= tw; ox += 4) {
        __m256d a00 = _mm256_loadu_pd(arow0 + ox);
        __m256d a10 = _mm256_loadu_pd(arow1 + ox);
        for (int kh = 0; kh < KH; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < KW; ++kw) {
                const __m256d v0 = _mm256_loadu_pd(r + kw);
                a00 = _mm256_fmadd_pd(w0[kh * KW + kw], v0, a00);
                a10 = _mm256_fmadd_pd(w1[kh * KW + kw], v0, a10);
            }
        }
        _mm256_storeu_pd(arow0 + ox, a00);
        _mm256_storeu_pd(arow1 + ox, a10);
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

void accumulate_row_generic(double* arow, std::int64_t tw, const double* base, std::int64_t seg_w,
                            const float* ws, int k_h, int k_w) {
    __m256d w[16];
    for (int i = 0; i < k_h * k_w; ++i) w[i] = _mm256_set1_pd(static_cast<double>(ws[i]));
    std::int64_t ox = 0;
    for (; ox + 4 <= tw; ox += 4) {
        __m256d a0 = _mm256_loadu_pd(arow + ox);
        for (int kh = 0; kh < k_h; ++kh) {
            const double* r = base + kh * seg_w + ox;
            for (int kw = 0; kw < k_w; ++kw) {
                a0 = _mm256_fmadd_pd(w[kh * k_w + kw], _mm256_loadu_pd(r + kw), a0);
            }
        }
        _mm256_storeu_pd(arow + ox, a0);
    }
    for (; ox < tw; ++ox) {
        double a = arow[ox];
        for (int kh = 0; kh < k_h; ++kh) {
            const double* r = base + kh * seg_w + ox;
            const float* wk = ws + kh * k_w;
            for (int kw = 0; kw < k_w; ++kw) {
                a += static_cast<double>(wk[kw]) * r[kw];
            }
        }
        arow[ox] = a;
    }
}

using RowFn = void (*)(double*, std::int64_t, const double*, std::int64_t, const float*);
using RowPairFn = void (*)(double*, double*, std::int64_t, const double*, std::int64_t,
                           const float*, const float*);

void conv2d_forward_avx2(const float* x, const float* w, const float* bias, float* y,
                         const ConvGeom& g) {
    const std::int64_t ytiles = (g.out_h + kTileRows - 1) / kTileRows;
    const std::int64_t xtiles = (g.out_w + kTileCols - 1) / kTileCols;
    const std::int64_t ktaps = static_cast<std::int64_t>(g.k_h) * g.k_w;

    RowFn row_fn = nullptr;
    RowPairFn pair_fn = nullptr;
    if (g.k_h == 3 && g.k_w == 3) {
        row_fn = accumulate_row<3, 3>;
        pair_fn = accumulate_row_pair<3, 3>;
    }
    if (g.k_h == 1 && g.k_w == 1) {
        row_fn = accumulate_row<1, 1>;
        pair_fn = accumulate_row_pair<1, 1>;
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
                for (; ox + 4 <= tw; ox += 4) {
                    _mm_storeu_ps(yrow + ox, _mm256_cvtpd_ps(_mm256_loadu_pd(arow + ox)));
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
                        accumulate_row_generic(arow, tw, base, seg_w, ws, g.k_h, g.k_w);
                    }
                }
            }
            write_out(oc, acc0);
        }
    });
}

void conv2d_backward_input_avx2(const float* dy, const float* w, float* dx,
                                const ConvGeom& g) {
    detail::conv2d_backward_input_via_forward(*avx2_table_or_null(), dy, w, dx, g);
}

// Per-row accumulation into four double lanes keyed by column mod 4; tails
// spill so the lane assignment matches the scalar backend.
inline void sum_row_into_lanes(const double* a, std::int64_t n, double* l4) {
    __m256d acc = _mm256_loadu_pd(l4);
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    }
    _mm256_storeu_pd(l4, acc);
    for (; i < n; ++i) l4[i & 3] += a[i];
}

// Single sweep over (oy, ox) accumulating every tap at once; the tap count is
// a compile-time bound so all KH*KW lane accumulators live in registers.
template <int KH, int KW>
void wgrad_sweep(const double* dyd, const double* xpad, std::int64_t out_h, std::int64_t out_w,
                 std::int64_t wp, int stride_h, double* lanes) {
    __m256d acc[KH * KW];
    for (int t = 0; t < KH * KW; ++t) acc[t] = _mm256_loadu_pd(lanes + t * 4);
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
        const double* dyr = dyd + oy * out_w;
        const double* xr[KH];
        for (int kh = 0; kh < KH; ++kh) xr[kh] = xpad + (oy * stride_h + kh) * wp;
        std::int64_t ox = 0;
        for (; ox + 4 <= out_w; ox += 4) {
            const __m256d d = _mm256_loadu_pd(dyr + ox);
            for (int kh = 0; kh < KH; ++kh) {
                for (int kw = 0; kw < KW; ++kw) {
                    acc[kh * KW + kw] =
                        _mm256_fmadd_pd(d, _mm256_loadu_pd(xr[kh] + ox + kw), acc[kh * KW + kw]);
                }
            }
        }
        if (ox < out_w) {
            for (int t = 0; t < KH * KW; ++t) _mm256_storeu_pd(lanes + t * 4, acc[t]);
            for (; ox < out_w; ++ox) {
                const double d = dyr[ox];
                for (int kh = 0; kh < KH; ++kh) {
                    for (int kw = 0; kw < KW; ++kw) {
                        lanes[(kh * KW + kw) * 4 + (ox & 3)] += d * xr[kh][ox + kw];
                    }
                }
            }
            for (int t = 0; t < KH * KW; ++t) acc[t] = _mm256_loadu_pd(lanes + t * 4);
        }
    }
    for (int t = 0; t < KH * KW; ++t) _mm256_storeu_pd(lanes + t * 4, acc[t]);
}

void wgrad_sweep_generic(const double* dyd, const double* xpad, std::int64_t out_h,
                         std::int64_t out_w, std::int64_t wp, int stride_h, int k_h, int k_w,
                         double* lanes) {
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
        const double* dyr = dyd + oy * out_w;
        for (std::int64_t ox = 0; ox < out_w; ++ox) {
            const double d = dyr[ox];
            for (int kh = 0; kh < k_h; ++kh) {
                const double* xr = xpad + (oy * stride_h + kh) * wp;
                for (int kw = 0; kw < k_w; ++kw) {
                    lanes[(kh * k_w + kw) * 4 + (ox & 3)] += d * xr[ox + kw];
                }
            }
        }
    }
}

void conv2d_backward_weights_avx2(const float* x, const float* dy, float* dw, float* db,
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
                std::int64_t i = 0;
                for (; i + 4 <= oplane; i += 4) {
                    _mm256_storeu_pd(dyd.data() + i, _mm256_cvtps_pd(_mm_loadu_ps(dyp + i)));
                }
                for (; i < oplane; ++i) dyd[static_cast<std::size_t>(i)] = static_cast<double>(dyp[i]);

                double* l4 = lanes.data() + oc * ktaps * 4;
                if (g.k_h == 3 && g.k_w == 3) {
                    wgrad_sweep<3, 3>(dyd.data(), xpad.data(), g.out_h, g.out_w, wp, g.stride_h,
                                      l4);
                } else if (g.k_h == 1 && g.k_w == 1) {
                    wgrad_sweep<1, 1>(dyd.data(), xpad.data(), g.out_h, g.out_w, wp, g.stride_h,
                                      l4);
                } else {
                    wgrad_sweep_generic(dyd.data(), xpad.data(), g.out_h, g.out_w, wp, g.stride_h,
                                        g.k_h, g.k_w, l4);
                }
                if (ic == 0) {
                    double* b4 = blanes.data() + oc * 4;
                    for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
                        sum_row_into_lanes(dyd.data() + oy * g.out_w, g.out_w, b4);
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

void relu_forward_avx2(const float* x, float* y, std::int64_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_avx2(const float* x, const float* dy, float* dx, std::int64_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::int64_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

double sum_avx2(const float* x, std::int64_t n) {
    alignas(32) double l4[4] = {0.0, 0.0, 0.0, 0.0};
    __m256d acc = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(x + i)));
    }
    _mm256_storeu_pd(l4, acc);
    for (; i < n; ++i) l4[i & 3] += static_cast<double>(x[i]);
    return combine_lanes(l4);
}

double sum_squares_avx2(const float* x, std::int64_t n) {
    alignas(32) double l4[4] = {0.0, 0.0, 0.0, 0.0};
    __m256d acc = _mm256_setzero_pd();
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    _mm256_storeu_pd(l4, acc);
    for (; i < n; ++i) l4[i & 3] += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    return combine_lanes(l4);
}

}  // namespace

const KernelTable* avx2_table_or_null() {
    static const KernelTable t = {
        conv2d_forward_avx2,       conv2d_backward_input_avx2,
        conv2d_backward_weights_avx2, relu_forward_avx2,
        relu_backward_avx2,        sum_avx2,
        sum_squares_avx2,
    };
    return &t;
}

#else  // !DINW_AVX2_BUILD

const KernelTable* avx2_table_or_null() { return nullptr; }

#endif

}  // namespace dinw::kernels
