#include "dinw/pipeline.hpp"

#include <cstring>

#include "dinw/color.hpp"

namespace dinw {

namespace {

Field field_from_tensor(const Tensor& t, Parity parity, bool clamp) {
    Field f(parity, static_cast<int>(t.width()), static_cast<int>(t.height()), 1);
    const float* src = t.plane(0, 0);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        f.data[i] = clamp ? clamp01(src[i]) : src[i];
    }
    return f;
}

Frame plane_frame(const std::vector<float>& plane, int w, int h) {
    Frame f(w, h, 1);
    f.data = plane;
    return f;
}

// Frame t keeps the odd field (rows 0,2,...), frame t+1 the even field; the
// missing chroma rows come from bob_bicubic on the known chroma field.
void chroma_planes(const Frame& plane, Frame& out_t, Frame& out_t1) {
    const FieldPair fields = split(plane);
    out_t = bob_bicubic(fields.odd);
    out_t1 = bob_bicubic(fields.even);
}

void copy_known_rows(const Frame& interlaced, Frame& frame_t, Frame& frame_t1) {
    const std::size_t stride = static_cast<std::size_t>(interlaced.width) * sizeof(float);
    for (int c = 0; c < interlaced.channels; ++c) {
        for (int y = 0; y < interlaced.height; ++y) {
            Frame& dst = (y % 2 == 0) ? frame_t : frame_t1;
            std::memcpy(dst.row(c, y), interlaced.row(c, y), stride);
        }
    }
}

}  // namespace

const char* method_name(Method m) {
    switch (m) {
        case Method::Net: return "net";
        case Method::Weave: return "weave";
        case Method::BobLinear: return "bob_linear";
        case Method::BobBicubic: return "bob_bicubic";
        case Method::Ela: return "ela";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "net") return Method::Net;
    if (name == "weave") return Method::Weave;
    if (name == "bob_linear") return Method::BobLinear;
    if (name == "bob_bicubic") return Method::BobBicubic;
    if (name == "ela") return Method::Ela;
    throw Error("unknown method: " + name);
}

std::pair<Frame, Frame> deinterlace_plane(const Frame& interlaced, Method method,
                                          const DeinterlaceNet* net) {
    if (interlaced.channels != 1) {
        throw ShapeError("deinterlace_plane: expected a single-channel frame");
    }
    switch (method) {
        case Method::Weave:
            return deinterlace_classic(interlaced, BaselineKind::Weave);
        case Method::BobLinear:
            return deinterlace_classic(interlaced, BaselineKind::BobLinear);
        case Method::BobBicubic:
            return deinterlace_classic(interlaced, BaselineKind::BobBicubic);
        case Method::Ela:
            return deinterlace_classic(interlaced, BaselineKind::Ela);
        case Method::Net:
            break;
    }
    if (net == nullptr) throw Error("method net requires loaded weights");

    const auto halves = net->forward(frame_to_tensor(interlaced));
    const FieldPair known = split(interlaced);
    // Predicted rows are clamped to the valid range; known rows pass through
    // the weave untouched.
    const Field pred_even_t = field_from_tensor(halves.even_t, Parity::Even, true);
    const Field pred_odd_t1 = field_from_tensor(halves.odd_t1, Parity::Odd, true);
    return {weave(known.odd, pred_even_t), weave(pred_odd_t1, known.even)};
}

std::pair<Frame, Frame> deinterlace_frame(const Frame& interlaced, Method method,
                                          const DeinterlaceNet* net) {
    if (interlaced.height % 2 != 0) {
        throw ParityError("deinterlace: frame height " + std::to_string(interlaced.height) +
                          " is odd");
    }
    if (interlaced.channels == 1) {
        return deinterlace_plane(interlaced, method, net);
    }
    if (interlaced.channels != 3) {
        throw ShapeError("deinterlace: expected 1 or 3 channels, got " +
                         std::to_string(interlaced.channels));
    }

    const LabImage lab = rgb_to_lab(interlaced);
    const Frame lum = plane_frame(lab.L, lab.width, lab.height);
    auto [lum_t, lum_t1] = deinterlace_plane(lum, method, net);

    Frame a_t, a_t1, b_t, b_t1;
    chroma_planes(plane_frame(lab.a, lab.width, lab.height), a_t, a_t1);
    chroma_planes(plane_frame(lab.b, lab.width, lab.height), b_t, b_t1);

    LabImage lab_t{lab.width, lab.height, lum_t.data, a_t.data, b_t.data};
    LabImage lab_t1{lab.width, lab.height, lum_t1.data, a_t1.data, b_t1.data};
    Frame out_t = lab_to_rgb(lab_t);
    Frame out_t1 = lab_to_rgb(lab_t1);

    // The color-space round trip is lossy; restore the retained fields
    // bit-exact from the source.
    copy_known_rows(interlaced, out_t, out_t1);
    return {std::move(out_t), std::move(out_t1)};
}

}  // namespace dinw
