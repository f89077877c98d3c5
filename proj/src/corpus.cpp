#include "dinw/corpus.hpp"

#include <cmath>

namespace dinw {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit(std::uint64_t r) { return static_cast<double>(r >> 11) * 0x1.0p-53; }

struct TextureParams {
    // Three plane waves per channel; includes a high vertical frequency so
    // single-field interpolation visibly struggles.
    double fx[3][3], fy[3][3], phase[3][3], amp[3][3];
    // Two rectangles with solid colors.
    int rx[2], ry[2], rw[2], rh[2];
    float rcol[2][3];
};

TextureParams make_params(std::uint64_t seed, int w, int h) {
    TextureParams p{};
    std::uint64_t s = seed;
    for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 3; ++k) {
            p.fx[c][k] = 0.02 + 0.10 * unit(splitmix(s));
            p.fy[c][k] = k == 2 ? 0.18 + 0.10 * unit(splitmix(s))  // near field Nyquist
                                : 0.02 + 0.08 * unit(splitmix(s));
            p.phase[c][k] = 6.28318530717958647 * unit(splitmix(s));
            p.amp[c][k] = k == 0 ? 0.16 : (k == 1 ? 0.12 : 0.10);
        }
    }
    for (int r = 0; r < 2; ++r) {
        p.rw[r] = w / 6 + static_cast<int>(unit(splitmix(s)) * w / 6);
        p.rh[r] = h / 6 + static_cast<int>(unit(splitmix(s)) * h / 6);
        p.rx[r] = static_cast<int>(unit(splitmix(s)) * (w - p.rw[r]));
        p.ry[r] = static_cast<int>(unit(splitmix(s)) * (h - p.rh[r]));
        for (int c = 0; c < 3; ++c) {
            p.rcol[r][c] = static_cast<float>(0.1 + 0.8 * unit(splitmix(s)));
        }
    }
    return p;
}

}  // namespace

Frame render_clip_frame(const ClipSpec& spec, int index) {
    const TextureParams p = make_params(spec.seed, spec.width, spec.height);
    const int shift = spec.kind == ClipKind::Static ? 0 : spec.velocity * index;
    const int tex_shift = spec.kind == ClipKind::Scroll ? shift : 0;
    const int rect_shift = spec.kind == ClipKind::MovingRect ? shift : 0;

    Frame f(spec.width, spec.height, 3);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < spec.height; ++y) {
            float* row = f.row(c, y);
            for (int x = 0; x < spec.width; ++x) {
                const double xs = x + tex_shift;
                double v = 0.5;
                for (int k = 0; k < 3; ++k) {
                    v += p.amp[c][k] *
                         std::sin(6.28318530717958647 * (p.fx[c][k] * xs + p.fy[c][k] * y) +
                                  p.phase[c][k]);
                }
                row[x] = clamp01(static_cast<float>(v));
            }
        }
    }
    for (int r = 0; r < 2; ++r) {
        const int x0 = (p.rx[r] + rect_shift) % spec.width;
        for (int c = 0; c < 3; ++c) {
            for (int y = p.ry[r]; y < p.ry[r] + p.rh[r] && y < spec.height; ++y) {
                float* row = f.row(c, y);
                for (int dx = 0; dx < p.rw[r]; ++dx) {
                    row[(x0 + dx) % spec.width] = p.rcol[r][c];
                }
            }
        }
    }
    return f;
}

std::vector<ClipSpec> hermetic_corpus() {
    return {
        {"static_waves", ClipKind::Static, 128, 128, 6, 0, 11},
        {"static_blocks", ClipKind::Static, 192, 128, 6, 0, 22},
        {"static_fine", ClipKind::Static, 96, 96, 6, 0, 33},
        {"static_wide", ClipKind::Static, 256, 128, 6, 0, 44},
        {"scroll_slow", ClipKind::Scroll, 128, 128, 6, 1, 55},
        {"scroll_fast", ClipKind::Scroll, 192, 128, 6, 4, 66},
        {"rect_slow", ClipKind::MovingRect, 128, 192, 6, 2, 77},
        {"rect_fast", ClipKind::MovingRect, 256, 192, 6, 5, 88},
    };
}

bool is_static_clip(const ClipSpec& spec) { return spec.kind == ClipKind::Static; }

}  // namespace dinw
