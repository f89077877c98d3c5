#pragma once

#include "dinw/tensor.hpp"

// Pure tensor operations. Each call validates its contract, runs the active
// kernel backend, and verifies the output is finite. No gradient tracking
// here; autograd.hpp wraps these when a tape is needed. All functions are
// safe to call concurrently on distinct or shared read-only inputs.

namespace dinw::ops {

// input (n, in_c, h, w) * weights (out_c, in_c, k_h, k_w) + bias (1, out_c, 1, 1).
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);

Tensor relu(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

double sum(const Tensor& x);
double sum_squares(const Tensor& x);

// Anisotropic squared-difference total variation of single-channel images:
// sum over pixels of (horizontal forward difference)^2 plus (vertical forward
// difference)^2. Batched inputs contribute one term per image, summed.
double total_variation(const Tensor& image);

// Every other row starting at first_row (0 or 1); height halves.
Tensor take_rows(const Tensor& x, int first_row);

// Inverse of take_rows pairs: top supplies output rows 0,2,4,..., bottom rows
// 1,3,5,...; both inputs share (n, c, w) and height.
Tensor weave_rows(const Tensor& top, const Tensor& bottom);

}  // namespace dinw::ops
