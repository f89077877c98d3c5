#include "dinw/tensor.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

namespace dinw {

namespace {

std::int64_t checked_size(const Tensor::Shape& shape) {
    std::int64_t total = 1;
    for (auto e : shape) {
        if (e < 1) throw ShapeError("tensor extent must be >= 1, got shape " + shape_str(shape));
        total *= e;
    }
    return total;
}

}  // namespace

Tensor::Tensor(Shape shape)
    : shape_(shape), data_(static_cast<std::size_t>(checked_size(shape)), 0.0f) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (checked_size(shape_) != static_cast<std::int64_t>(data_.size())) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::full(Shape shape, float value) {
    Tensor t(shape);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

bool Tensor::all_finite() const {
    // Exponent bits all set marks Inf/NaN; the integer form vectorizes.
    std::uint32_t bad = 0;
    for (float v : data_) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        bad |= static_cast<std::uint32_t>((bits & 0x7f800000u) == 0x7f800000u);
    }
    return bad == 0;
}

std::string shape_str(const Tensor::Shape& s) {
    std::ostringstream os;
    os << s[0] << "x" << s[1] << "x" << s[2] << "x" << s[3];
    return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
}

void require_finite(const Tensor& t, const char* op) {
    if (!t.all_finite()) {
        throw NonFiniteError(std::string(op) + " produced a non-finite value");
    }
}

void ConvSpec::validate() const {
    if (in_channels < 1 || out_channels < 1 || kernel_h < 1 || kernel_w < 1) {
        throw ShapeError("conv spec extents must be >= 1");
    }
    if (stride_h != 1 && stride_h != 2) {
        throw ShapeError("conv stride_h must be 1 or 2, got " + std::to_string(stride_h));
    }
    if (stride_w != 1) {
        throw ShapeError("conv stride_w must be 1, got " + std::to_string(stride_w));
    }
}

std::int64_t ConvSpec::out_height(std::int64_t in_h) const {
    return (in_h + stride_h - 1) / stride_h;
}

std::int64_t ConvSpec::out_width(std::int64_t in_w) const {
    return in_w;
}

}  // namespace dinw
