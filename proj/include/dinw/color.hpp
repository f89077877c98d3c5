#pragma once

#include "dinw/frame.hpp"

namespace dinw {

// CIE Lab planes of an image, D65 white point. L is rescaled to [0, 1]
// (L* / 100); a and b stay in their natural ranges.
struct LabImage {
    int width = 0;
    int height = 0;
    std::vector<float> L, a, b;
};

// 3-channel sRGB [0,1] -> Lab planes.
LabImage rgb_to_lab(const Frame& rgb);

// Lab planes -> 3-channel sRGB, clamped to [0,1].
Frame lab_to_rgb(const LabImage& lab);

// The training-domain conversion: L channel only, in [0, 1]. Single-channel
// input passes through unchanged.
Frame rgb_to_L(const Frame& frame);

}  // namespace dinw
