#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dinw/frame.hpp"

namespace dinw {

// Procedurally generated progressive clips so the whole pipeline can be
// exercised without any external video data. Content mixes band-limited
// textures with hard rectangle edges; motion clips translate by an integral
// number of pixels per frame.
enum class ClipKind { Static, Scroll, MovingRect };

struct ClipSpec {
    std::string name;
    ClipKind kind = ClipKind::Static;
    int width = 128;
    int height = 128;
    int frame_count = 6;
    int velocity = 0;  // pixels per frame for Scroll / MovingRect
    std::uint64_t seed = 1;
};

// RGB frame `index` of the clip, values in [0, 1], deterministic in
// (spec, index).
Frame render_clip_frame(const ClipSpec& spec, int index);

// The built-in test corpus: four static and four moving clips, 96x96 up to
// 256x192.
std::vector<ClipSpec> hermetic_corpus();

bool is_static_clip(const ClipSpec& spec);

}  // namespace dinw
