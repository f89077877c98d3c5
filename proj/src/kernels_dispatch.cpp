#include <atomic>
#include <cstdlib>
#include <cstring>

#include "dinw/kernels.hpp"

namespace dinw::kernels {

const KernelTable& scalar_table();          // kernels_scalar.cpp
const KernelTable* avx2_table_or_null();    // kernels_avx2.cpp
const KernelTable* avx512_table_or_null();  // kernels_avx512.cpp

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool cpu_has_avx512() {
#if defined(__x86_64__) || defined(_M_X64)
    return cpu_has_avx2() && __builtin_cpu_supports("avx512f");
#else
    return false;
#endif
}

Backend detect_backend() {
    if (const char* env = std::getenv("DINW_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::Avx2)) {
            return Backend::Avx2;
        }
        if (std::strcmp(env, "avx512") == 0 && backend_available(Backend::Avx512)) {
            return Backend::Avx512;
        }
        // anything else (including "auto") falls through to detection
    }
    if (backend_available(Backend::Avx512)) return Backend::Avx512;
    return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<int> g_backend{-1};  // -1 = not selected yet

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Avx512: return "avx512";
        case Backend::Avx2: return "avx2";
        default: return "scalar";
    }
}

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar: return true;
        case Backend::Avx2: return avx2_table_or_null() != nullptr && cpu_has_avx2();
        case Backend::Avx512: return avx512_table_or_null() != nullptr && cpu_has_avx512();
    }
    return false;
}

Backend active_backend() {
    int v = g_backend.load(std::memory_order_relaxed);
    if (v < 0) {
        v = static_cast<int>(detect_backend());
        g_backend.store(v, std::memory_order_relaxed);
    }
    return static_cast<Backend>(v);
}

void set_backend(Backend b) {
    if (!backend_available(b)) {
        throw Error(std::string("kernel backend not available: ") + backend_name(b));
    }
    g_backend.store(static_cast<int>(b), std::memory_order_relaxed);
}

const KernelTable& table(Backend b) {
    if (b != Backend::Scalar) {
        if (!backend_available(b)) {
            throw Error(std::string("kernel backend not available: ") + backend_name(b));
        }
        return b == Backend::Avx512 ? *avx512_table_or_null() : *avx2_table_or_null();
    }
    return scalar_table();
}

const KernelTable& table() {
    return table(active_backend());
}

ConvGeom conv_geometry(const ConvSpec& spec, std::int64_t batch, std::int64_t in_h,
                       std::int64_t in_w) {
    spec.validate();
    ConvGeom g;
    g.batch = batch;
    g.in_c = spec.in_channels;
    g.in_h = in_h;
    g.in_w = in_w;
    g.out_c = spec.out_channels;
    g.out_h = spec.out_height(in_h);
    g.out_w = spec.out_width(in_w);
    g.k_h = spec.kernel_h;
    g.k_w = spec.kernel_w;
    g.stride_h = spec.stride_h;
    g.stride_w = spec.stride_w;
    const std::int64_t pad_h = (g.out_h - 1) * g.stride_h + g.k_h - in_h;
    const std::int64_t pad_w = (g.out_w - 1) * g.stride_w + g.k_w - in_w;
    g.pad_h = static_cast<int>(pad_h > 0 ? pad_h : 0);
    g.pad_w = static_cast<int>(pad_w > 0 ? pad_w : 0);
    // Floor split: the extra row/column of padding goes to the bottom/right,
    // anchoring stride-2 output rows at even padded rows (phase 0).
    g.pad_top = g.pad_h / 2;
    g.pad_left = g.pad_w / 2;
    g.replicate = spec.padding == PaddingMode::ReplicateSame;
    return g;
}

}  // namespace dinw::kernels
