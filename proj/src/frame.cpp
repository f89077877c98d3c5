#include "dinw/frame.hpp"

#include <algorithm>
#include <cstring>
#include <string>

namespace dinw {

const char* parity_name(Parity p) { return p == Parity::Odd ? "odd" : "even"; }

FieldPair split(const Frame& frame) {
    if (frame.height % 2 != 0) {
        throw ParityError("split: frame height " + std::to_string(frame.height) + " is odd");
    }
    const int fh = frame.height / 2;
    FieldPair out{Field(Parity::Odd, frame.width, fh, frame.channels),
                  Field(Parity::Even, frame.width, fh, frame.channels)};
    const std::size_t stride = static_cast<std::size_t>(frame.width) * sizeof(float);
    for (int c = 0; c < frame.channels; ++c) {
        for (int y = 0; y < fh; ++y) {
            std::memcpy(out.odd.row(c, y), frame.row(c, 2 * y), stride);
            std::memcpy(out.even.row(c, y), frame.row(c, 2 * y + 1), stride);
        }
    }
    return out;
}

Frame weave(const Field& a, const Field& b) {
    if (a.parity == b.parity) {
        throw ParityError(std::string("weave: both fields have ") + parity_name(a.parity) +
                          " parity");
    }
    if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
        throw ShapeError("weave: field dimensions differ, " + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height));
    }
    const Field& odd = a.parity == Parity::Odd ? a : b;
    const Field& even = a.parity == Parity::Odd ? b : a;
    Frame out(a.width, a.height * 2, a.channels);
    const std::size_t stride = static_cast<std::size_t>(a.width) * sizeof(float);
    for (int c = 0; c < a.channels; ++c) {
        for (int y = 0; y < a.height; ++y) {
            std::memcpy(out.row(c, 2 * y), odd.row(c, y), stride);
            std::memcpy(out.row(c, 2 * y + 1), even.row(c, y), stride);
        }
    }
    return out;
}

Frame interlace(const Frame& frame_t, const Frame& frame_t1) {
    if (!frame_t.same_dims(frame_t1)) {
        throw ShapeError("interlace: frame dimensions differ, " + std::to_string(frame_t.width) +
                         "x" + std::to_string(frame_t.height) + "x" +
                         std::to_string(frame_t.channels) + " vs " +
                         std::to_string(frame_t1.width) + "x" + std::to_string(frame_t1.height) +
                         "x" + std::to_string(frame_t1.channels));
    }
    if (frame_t.height % 2 != 0) {
        throw ParityError("interlace: frame height " + std::to_string(frame_t.height) +
                          " is odd");
    }
    Frame out(frame_t.width, frame_t.height, frame_t.channels);
    const std::size_t stride = static_cast<std::size_t>(frame_t.width) * sizeof(float);
    for (int c = 0; c < out.channels; ++c) {
        for (int y = 0; y < out.height; ++y) {
            const Frame& src = (y % 2 == 0) ? frame_t : frame_t1;
            std::memcpy(out.row(c, y), src.row(c, y), stride);
        }
    }
    return out;
}

Tensor frame_to_tensor(const Frame& f, int channel) {
    Tensor t({1, 1, f.height, f.width});
    std::memcpy(t.data(), f.row(channel, 0),
                static_cast<std::size_t>(f.height) * f.width * sizeof(float));
    return t;
}

Frame tensor_to_frame(const Tensor& t, std::int64_t batch_index) {
    if (t.channels() != 1) {
        throw ShapeError("tensor_to_frame: expected single channel, got " + shape_str(t.shape()));
    }
    Frame f(static_cast<int>(t.width()), static_cast<int>(t.height()), 1);
    std::memcpy(f.data.data(), t.plane(batch_index, 0),
                static_cast<std::size_t>(t.height()) * t.width() * sizeof(float));
    return f;
}

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

}  // namespace dinw
