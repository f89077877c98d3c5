#include "dinw/classic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace dinw {

namespace {

// Copies the known rows into the full frame and returns the frame plus the
// parity offset of the missing rows.
Frame seed_known_rows(const Field& field, int& missing_offset) {
    Frame out(field.width, field.height * 2, field.channels);
    const int off = row_offset(field.parity);
    missing_offset = 1 - off;
    const std::size_t stride = static_cast<std::size_t>(field.width) * sizeof(float);
    for (int c = 0; c < field.channels; ++c) {
        for (int y = 0; y < field.height; ++y) {
            std::memcpy(out.row(c, off + 2 * y), field.row(c, y), stride);
        }
    }
    return out;
}

int clamp_idx(int v, int lo, int hi) { return std::clamp(v, lo, hi); }

}  // namespace

const char* baseline_name(BaselineKind k) {
    switch (k) {
        case BaselineKind::Weave: return "weave";
        case BaselineKind::BobLinear: return "bob_linear";
        case BaselineKind::BobBicubic: return "bob_bicubic";
        case BaselineKind::Ela: return "ela";
    }
    return "?";
}

BaselineKind baseline_from_name(const std::string& name) {
    if (name == "weave") return BaselineKind::Weave;
    if (name == "bob_linear") return BaselineKind::BobLinear;
    if (name == "bob_bicubic") return BaselineKind::BobBicubic;
    if (name == "ela") return BaselineKind::Ela;
    throw Error("unknown baseline: " + name);
}

Frame bob_linear(const Field& field) {
    int miss = 0;
    Frame out = seed_known_rows(field, miss);
    const int off = row_offset(field.parity);
    for (int c = 0; c < field.channels; ++c) {
        for (int r = miss; r < out.height; r += 2) {
            const int j_up = (r - off - 1) >= 0 ? (r - off - 1) / 2 : 0;
            const int j_dn = clamp_idx(j_up + ((r - off - 1) >= 0 ? 1 : 0), 0, field.height - 1);
            const float* up = field.row(c, clamp_idx(j_up, 0, field.height - 1));
            const float* dn = field.row(c, j_dn);
            float* dst = out.row(c, r);
            for (int x = 0; x < field.width; ++x) dst[x] = 0.5f * (up[x] + dn[x]);
        }
    }
    return out;
}

Frame bob_bicubic(const Field& field) {
    int miss = 0;
    Frame out = seed_known_rows(field, miss);
    const int off = row_offset(field.parity);
    const int fh = field.height;
    for (int c = 0; c < field.channels; ++c) {
        for (int r = miss; r < out.height; r += 2) {
            // Known rows bracket the missing one at field indices j and j+1.
            const int j = (r - off - 1) >= 0 ? (r - off - 1) / 2 : -1;
            const float* p0 = field.row(c, clamp_idx(j - 1, 0, fh - 1));
            const float* p1 = field.row(c, clamp_idx(j, 0, fh - 1));
            const float* p2 = field.row(c, clamp_idx(j + 1, 0, fh - 1));
            const float* p3 = field.row(c, clamp_idx(j + 2, 0, fh - 1));
            float* dst = out.row(c, r);
            for (int x = 0; x < field.width; ++x) {
                dst[x] = static_cast<float>(
                    (-static_cast<double>(p0[x]) + 9.0 * p1[x] + 9.0 * p2[x] - p3[x]) / 16.0);
            }
        }
    }
    return out;
}

Frame ela(const Field& field) {
    int miss = 0;
    Frame out = seed_known_rows(field, miss);
    const int w = field.width;
    for (int c = 0; c < field.channels; ++c) {
        for (int r = miss; r < out.height; r += 2) {
            const int up_row = r - 1 >= 0 ? r - 1 : r + 1;
            const int dn_row = r + 1 < out.height ? r + 1 : r - 1;
            const float* up = out.row(c, up_row);
            const float* dn = out.row(c, dn_row);
            float* dst = out.row(c, r);
            for (int x = 0; x < w; ++x) {
                const int xl = clamp_idx(x - 1, 0, w - 1);
                const int xr = clamp_idx(x + 1, 0, w - 1);
                const float d_nw = std::fabs(up[xl] - dn[xr]);
                const float d_v = std::fabs(up[x] - dn[x]);
                const float d_ne = std::fabs(up[xr] - dn[xl]);
                if (d_v <= d_nw && d_v <= d_ne) {
                    dst[x] = 0.5f * (up[x] + dn[x]);
                } else if (d_nw <= d_ne) {
                    dst[x] = 0.5f * (up[xl] + dn[xr]);
                } else {
                    dst[x] = 0.5f * (up[xr] + dn[xl]);
                }
            }
        }
    }
    return out;
}

std::pair<Frame, Frame> deinterlace_classic(const Frame& interlaced, BaselineKind kind) {
    if (kind == BaselineKind::Weave) return {interlaced, interlaced};
    const FieldPair fields = split(interlaced);
    switch (kind) {
        case BaselineKind::BobLinear:
            return {bob_linear(fields.odd), bob_linear(fields.even)};
        case BaselineKind::BobBicubic:
            return {bob_bicubic(fields.odd), bob_bicubic(fields.even)};
        case BaselineKind::Ela:
            return {ela(fields.odd), ela(fields.even)};
        default:
            return {interlaced, interlaced};
    }
}

}  // namespace dinw
