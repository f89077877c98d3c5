#include "dinw/ops.hpp"

#include <cmath>

#include "dinw/kernels.hpp"

namespace dinw::ops {

namespace {

void require_channels(const Tensor& t, std::int64_t c, const char* op) {
    if (t.channels() != c) {
        throw ShapeError(std::string(op) + ": expected " + std::to_string(c) +
                         " channels, got shape " + shape_str(t.shape()));
    }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
    spec.validate();
    if (input.channels() != spec.in_channels) {
        throw ShapeError("conv2d: input " + shape_str(input.shape()) + " does not provide " +
                         std::to_string(spec.in_channels) + " channels");
    }
    const Tensor::Shape want_w = {spec.out_channels, spec.in_channels, spec.kernel_h,
                                  spec.kernel_w};
    if (weights.shape() != want_w) {
        throw ShapeError("conv2d: weights " + shape_str(weights.shape()) + " vs spec " +
                         shape_str(want_w));
    }
    const Tensor::Shape want_b = {1, spec.out_channels, 1, 1};
    if (bias.shape() != want_b) {
        throw ShapeError("conv2d: bias " + shape_str(bias.shape()) + " vs spec " +
                         shape_str(want_b));
    }

    const auto g = kernels::conv_geometry(spec, input.batch(), input.height(), input.width());
    Tensor out({g.batch, g.out_c, g.out_h, g.out_w});
    kernels::table().conv2d_forward(input.data(), weights.data(), bias.data(), out.data(), g);
    require_finite(out, "conv2d");
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape());
    kernels::table().relu_forward(x.data(), out.data(), x.size());
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    const float* pa = a.data();
    const float* pb = b.data();
    float* po = out.data();
    for (std::int64_t i = 0; i < a.size(); ++i) po[i] = pa[i] + pb[i];
    require_finite(out, "add");
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape());
    const float* pa = a.data();
    const float* pb = b.data();
    float* po = out.data();
    for (std::int64_t i = 0; i < a.size(); ++i) po[i] = pa[i] - pb[i];
    require_finite(out, "sub");
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    const float* pa = a.data();
    const float* pb = b.data();
    float* po = out.data();
    for (std::int64_t i = 0; i < a.size(); ++i) po[i] = pa[i] * pb[i];
    require_finite(out, "mul");
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out(a.shape());
    const float* pa = a.data();
    float* po = out.data();
    for (std::int64_t i = 0; i < a.size(); ++i) {
        po[i] = static_cast<float>(static_cast<double>(pa[i]) * s);
    }
    require_finite(out, "scale");
    return out;
}

double sum(const Tensor& x) {
    const double v = kernels::table().sum(x.data(), x.size());
    if (!std::isfinite(v)) throw NonFiniteError("sum produced a non-finite value");
    return v;
}

double sum_squares(const Tensor& x) {
    const double v = kernels::table().sum_squares(x.data(), x.size());
    if (!std::isfinite(v)) throw NonFiniteError("sum_squares produced a non-finite value");
    return v;
}

double total_variation(const Tensor& image) {
    require_channels(image, 1, "total_variation");
    const std::int64_t h = image.height();
    const std::int64_t w = image.width();
    double total = 0.0;
    for (std::int64_t n = 0; n < image.batch(); ++n) {
        const float* p = image.plane(n, 0);
        for (std::int64_t y = 0; y < h; ++y) {
            const float* row = p + y * w;
            for (std::int64_t x = 0; x + 1 < w; ++x) {
                const double d = static_cast<double>(row[x + 1]) - static_cast<double>(row[x]);
                total += d * d;
            }
        }
        for (std::int64_t y = 0; y + 1 < h; ++y) {
            const float* row = p + y * w;
            for (std::int64_t x = 0; x < w; ++x) {
                const double d = static_cast<double>(row[x + w]) - static_cast<double>(row[x]);
                total += d * d;
            }
        }
    }
    if (!std::isfinite(total)) throw NonFiniteError("total_variation produced a non-finite value");
    return total;
}

Tensor take_rows(const Tensor& x, int first_row) {
    if (first_row != 0 && first_row != 1) throw ShapeError("take_rows: first_row must be 0 or 1");
    const std::int64_t out_h = (x.height() - first_row + 1) / 2;
    if (out_h < 1) throw ShapeError("take_rows: no rows to take from " + shape_str(x.shape()));
    Tensor out({x.batch(), x.channels(), out_h, x.width()});
    const std::int64_t w = x.width();
    for (std::int64_t n = 0; n < x.batch(); ++n) {
        for (std::int64_t c = 0; c < x.channels(); ++c) {
            const float* src = x.plane(n, c);
            float* dst = out.plane(n, c);
            for (std::int64_t r = 0; r < out_h; ++r) {
                const float* srow = src + (first_row + 2 * r) * w;
                std::copy(srow, srow + w, dst + r * w);
            }
        }
    }
    return out;
}

Tensor weave_rows(const Tensor& top, const Tensor& bottom) {
    if (top.batch() != bottom.batch() || top.channels() != bottom.channels() ||
        top.height() != bottom.height() || top.width() != bottom.width()) {
        throw ShapeError("weave_rows: halves " + shape_str(top.shape()) + " vs " +
                         shape_str(bottom.shape()));
    }
    Tensor out({top.batch(), top.channels(), top.height() * 2, top.width()});
    const std::int64_t w = top.width();
    for (std::int64_t n = 0; n < top.batch(); ++n) {
        for (std::int64_t c = 0; c < top.channels(); ++c) {
            const float* ts = top.plane(n, c);
            const float* bs = bottom.plane(n, c);
            float* dst = out.plane(n, c);
            for (std::int64_t r = 0; r < top.height(); ++r) {
                std::copy(ts + r * w, ts + (r + 1) * w, dst + (2 * r) * w);
                std::copy(bs + r * w, bs + (r + 1) * w, dst + (2 * r + 1) * w);
            }
        }
    }
    return out;
}

}  // namespace dinw::ops
