#pragma once

#include <optional>
#include <string>
#include <utility>

#include "dinw/classic.hpp"
#include "dinw/frame.hpp"
#include "dinw/model.hpp"

namespace dinw {

// End-to-end deinterlacing of one frame, wiring the method dispatch and the
// chroma rule in one place.
enum class Method { Net, Weave, BobLinear, BobBicubic, Ela };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Reconstructs (frame t, frame t+1) from an interlaced frame. Grayscale
// inputs run the method directly. RGB inputs are converted to Lab: the
// method runs on L, the missing chroma rows are filled by bob_bicubic on the
// a/b planes, and the result converts back to RGB. Known-parity rows of the
// source frame are copied bit-exact in both outputs.
std::pair<Frame, Frame> deinterlace_frame(const Frame& interlaced, Method method,
                                          const DeinterlaceNet* net);

// L-channel (single plane) reconstruction used by evaluation; input must be
// single-channel.
std::pair<Frame, Frame> deinterlace_plane(const Frame& interlaced, Method method,
                                          const DeinterlaceNet* net);

}  // namespace dinw
