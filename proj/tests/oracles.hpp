#pragma once

// Independent brute-force references for the oracle tests. Everything here is
// written straight from the operation definitions with plain nested loops and
// stays deliberately ignorant of the library's kernels, padding helpers and
// separable filters.

#include <cstdint>
#include <functional>
#include <vector>

#include "dinw/frame.hpp"
#include "dinw/tensor.hpp"

namespace oracle {

// Direct convolution: out(n,oc,oy,ox) = bias(oc) +
//   sum_{ic,kh,kw} w(oc,ic,kh,kw) * pad(x)(n,ic, oy*sh - pt + kh, ox - pl + kw)
// with same-padding resolved from the output shape law out_h = ceil(h/s).
dinw::Tensor conv2d(const dinw::Tensor& x, const dinw::Tensor& w, const std::vector<float>& bias,
                    int stride_h, bool replicate_pad);

double total_variation(const dinw::Tensor& image);

double psnr(const dinw::Frame& a, const dinw::Frame& b);

// Non-separable SSIM: per-pixel 11x11 Gaussian-weighted window statistics.
double ssim(const dinw::Frame& a, const dinw::Frame& b);

// Lab L from sRGB using the classic ITU-derived constants (0.412453 ...), a
// separate source from the implementation's IEC matrix.
double lab_L(double r, double g, double b);

// Catmull-Rom interpolation weights evaluated from the kernel polynomial at
// the midpoint, not from the closed-form tap values.
dinw::Frame bob_bicubic(const dinw::Field& field);

// ELA selection by explicit argmin over the three direction pairs; returns
// the chosen direction (0 = NW/SE, 1 = vertical, 2 = NE/SW) for one missing
// pixel given its neighbors.
int ela_direction(const float* up, const float* down, int x, int width);

// Central finite difference of f over every coordinate of a parameter vector.
struct GradCheck {
    double max_abs_diff = 0.0;
    double max_rel = 0.0;  // |a-fd| / max(|a|, |fd|), for the worst coordinate
    bool pass = true;
};
GradCheck grad_check(const std::function<double()>& f, float* params, std::int64_t count,
                     const float* analytic, double h, double rtol, double atol);

// Random values on the 1/64 grid keep small conv/loss arithmetic exact in
// float, so finite differences measure the gradient, not rounding noise.
float grid_uniform(std::uint64_t& state, float lo, float hi);
std::uint64_t next_rand(std::uint64_t& state);

}  // namespace oracle
