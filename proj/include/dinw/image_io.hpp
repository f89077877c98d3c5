#pragma once

#include <string>
#include <vector>

#include "dinw/frame.hpp"

namespace dinw {

// PNG (8- and 16-bit, gray or RGB) and binary PPM/PGM. Loaded values are
// scaled to [0, 1]; palette and alpha inputs are converted/stripped.
Frame load_image(const std::string& path);

// Format from the extension (.png/.ppm/.pgm). bit_depth 8 or 16 applies to
// PNG; PPM/PGM always write 8-bit.
void save_image(const std::string& path, const Frame& frame, int bit_depth = 8);

// Image files directly inside dir, lexicographically sorted.
std::vector<std::string> list_frames(const std::string& dir);

}  // namespace dinw
