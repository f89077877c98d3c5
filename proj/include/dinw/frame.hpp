#pragma once

#include <cstdint>
#include <vector>

#include "dinw/tensor.hpp"

namespace dinw {

// Scanline parity follows the broadcast (1-indexed) wording: "odd" scanlines
// are rows 1,3,5,... of a 1-indexed frame, i.e. 0-indexed rows 0,2,4,....
// The odd field therefore sits at row offset 0 and the even field at row
// offset 1. An interlaced frame carries frame t in its odd field and frame
// t+1 in its even field.
enum class Parity { Odd, Even };

constexpr int row_offset(Parity p) { return p == Parity::Odd ? 0 : 1; }
constexpr Parity opposite(Parity p) { return p == Parity::Odd ? Parity::Even : Parity::Odd; }
const char* parity_name(Parity p);

// Full-height raster, planar channel layout, values in [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<float> data;

    Frame() = default;
    Frame(int w, int h, int c) : width(w), height(h), channels(c) {
        data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
    }

    float* row(int c, int y) { return data.data() + (static_cast<std::size_t>(c) * height + y) * width; }
    const float* row(int c, int y) const {
        return data.data() + (static_cast<std::size_t>(c) * height + y) * width;
    }
    float& at(int c, int y, int x) { return row(c, y)[x]; }
    float at(int c, int y, int x) const { return row(c, y)[x]; }

    bool same_dims(const Frame& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Half-height raster tagged with the parity of the frame rows it came from.
struct Field {
    Parity parity = Parity::Odd;
    int width = 0;
    int height = 0;  // half the parent frame height
    int channels = 1;
    std::vector<float> data;

    Field() = default;
    Field(Parity p, int w, int h, int c) : parity(p), width(w), height(h), channels(c) {
        data.assign(static_cast<std::size_t>(w) * h * c, 0.0f);
    }

    float* row(int c, int y) { return data.data() + (static_cast<std::size_t>(c) * height + y) * width; }
    const float* row(int c, int y) const {
        return data.data() + (static_cast<std::size_t>(c) * height + y) * width;
    }
};

struct FieldPair {
    Field odd;
    Field even;
};

// Lossless field decomposition; requires even height.
FieldPair split(const Frame& frame);

// Interleaves two opposite-parity fields back into a full frame. Rows are
// copied bit-exact from their source field.
Frame weave(const Field& a, const Field& b);

// Row r of the result comes from frame_t when r has odd parity (0-indexed
// even) and from frame_t1 otherwise. interlace(f, f) == f.
Frame interlace(const Frame& frame_t, const Frame& frame_t1);

// Single-channel frame <-> 1x1xHxW tensor bridges.
Tensor frame_to_tensor(const Frame& f, int channel = 0);
Frame tensor_to_frame(const Tensor& t, std::int64_t batch_index = 0);

float clamp01(float v);

}  // namespace dinw
