#pragma once

#include <string>
#include <utility>

#include "dinw/frame.hpp"

namespace dinw {

enum class BaselineKind { Weave, BobLinear, BobBicubic, Ela };

const char* baseline_name(BaselineKind k);
BaselineKind baseline_from_name(const std::string& name);

// Intra-field reconstructions: known-parity rows are copied bit-exact, the
// missing rows are interpolated from the field alone.
Frame bob_linear(const Field& field);

// Catmull-Rom over the four nearest known rows ((-1, 9, 9, -1)/16 at the
// midpoint), rows replicated past the field boundary.
Frame bob_bicubic(const Field& field);

// Edge-based line averaging: per missing pixel, pick the direction pair
// (upper-left/lower-right, above/below, upper-right/lower-left) with the
// smallest absolute difference and output its average. Ties prefer vertical;
// a diagonal-vs-diagonal tie picks upper-left/lower-right. Columns replicate
// at the sides.
Frame ela(const Field& field);

// Splits the interlaced frame and reconstructs frame t from its odd field
// and frame t+1 from its even field with the chosen method. Weave returns
// (I, I).
std::pair<Frame, Frame> deinterlace_classic(const Frame& interlaced, BaselineKind kind);

}  // namespace dinw
