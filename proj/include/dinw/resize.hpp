#pragma once

#include "dinw/frame.hpp"

namespace dinw {

// Bilinear resampling with half-pixel centers, edges clamped.
Frame resize_bilinear(const Frame& src, int out_width, int out_height);

}  // namespace dinw
