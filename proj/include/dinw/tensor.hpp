#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dinw/errors.hpp"

namespace dinw {

// Dense 4-D float tensor, laid out (batch, channels, height, width),
// row-major within each channel plane. All extents are >= 1.
class Tensor {
public:
    using Shape = std::array<std::int64_t, 4>;

    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<float> data);

    static Tensor zeros(Shape shape) { return Tensor(shape); }
    static Tensor full(Shape shape, float value);

    std::int64_t batch() const { return shape_[0]; }
    std::int64_t channels() const { return shape_[1]; }
    std::int64_t height() const { return shape_[2]; }
    std::int64_t width() const { return shape_[3]; }
    const Shape& shape() const { return shape_; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }

    float& at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) {
        return data_[index(n, c, y, x)];
    }
    float at(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
        return data_[index(n, c, y, x)];
    }

    float* plane(std::int64_t n, std::int64_t c) {
        return data_.data() + (n * shape_[1] + c) * shape_[2] * shape_[3];
    }
    const float* plane(std::int64_t n, std::int64_t c) const {
        return data_.data() + (n * shape_[1] + c) * shape_[2] * shape_[3];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool is_scalar() const { return size() == 1; }

    bool all_finite() const;

private:
    std::int64_t index(std::int64_t n, std::int64_t c, std::int64_t y, std::int64_t x) const {
        return ((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
    }

    Shape shape_{1, 1, 1, 1};
    std::vector<float> data_ = std::vector<float>(1, 0.0f);
};

std::string shape_str(const Tensor::Shape& s);

// Throws ShapeError naming both shapes unless they match.
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Throws NonFiniteError naming the producing operation if t holds NaN/Inf.
void require_finite(const Tensor& t, const char* op);

enum class PaddingMode { ZeroSame, ReplicateSame };

enum class Activation { Identity, Relu };

// 2-D convolution geometry. Same-padding only: with vertical stride s the
// output is ceil(in_h / s) x in_w. stride_h is 1 or 2, stride_w is fixed at 1.
struct ConvSpec {
    int in_channels = 1;
    int out_channels = 1;
    int kernel_h = 3;
    int kernel_w = 3;
    int stride_h = 1;
    int stride_w = 1;
    PaddingMode padding = PaddingMode::ReplicateSame;

    void validate() const;
    std::int64_t out_height(std::int64_t in_h) const;
    std::int64_t out_width(std::int64_t in_w) const;

    bool operator==(const ConvSpec&) const = default;
};

}  // namespace dinw
