#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dinw/frame.hpp"

namespace dinw {

// One training sample: a 64x64 L-channel interlaced patch plus the two
// 32x64 half-patches the network should predict. target_even_t holds the
// even field of the frame-t patch (0-indexed rows 1,3,5,...), target_odd_t1
// the odd field of the frame-t+1 patch (0-indexed rows 0,2,4,...).
struct PatchTriplet {
    static constexpr int kSize = 64;
    static constexpr int kHalf = 32;

    std::vector<float> input;          // kSize * kSize
    std::vector<float> target_even_t;  // kHalf * kSize
    std::vector<float> target_odd_t1;  // kHalf * kSize
    std::uint32_t source_id = 0;
    std::uint32_t origin_row = 0;
    std::uint32_t origin_col = 0;
};

// Tiles the triplet into patch triplets on a stride-aligned grid. Stride must
// be even so every patch keeps the parity of its source rows. Frames must be
// single-channel and at least patch_size wide/tall.
std::vector<PatchTriplet> extract_patches(const Frame& interlaced, const Frame& frame_t,
                                          const Frame& frame_t1, std::uint32_t source_id,
                                          int patch_size = PatchTriplet::kSize,
                                          int stride = PatchTriplet::kSize);

// Deterministic shuffled split; validation takes ceil((1-train_fraction)*n),
// training the rest.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};
SplitIndices split_dataset(std::size_t count, double train_fraction, std::uint64_t seed);

std::pair<std::vector<PatchTriplet>, std::vector<PatchTriplet>> split_dataset(
    const std::vector<PatchTriplet>& triplets, double train_fraction, std::uint64_t seed);

// Packed patch archive, magic "DIPT": little-endian header (u16 version,
// u16 patch size, u64 count) followed by fixed-size records (u32 source_id,
// u32 origin_row, u32 origin_col, then the three float planes).
class PatchArchiveWriter {
public:
    explicit PatchArchiveWriter(const std::string& path);
    ~PatchArchiveWriter();
    PatchArchiveWriter(const PatchArchiveWriter&) = delete;
    PatchArchiveWriter& operator=(const PatchArchiveWriter&) = delete;

    void add(const PatchTriplet& t);
    std::uint64_t count() const { return count_; }
    void close();  // patches the header count; called by the destructor too

private:
    std::FILE* f_ = nullptr;
    std::uint64_t count_ = 0;
};

std::vector<PatchTriplet> load_patch_archive(const std::string& path);
std::uint64_t patch_archive_count(const std::string& path);

void save_patch_archive(const std::string& path, const std::vector<PatchTriplet>& triplets);

// Deterministic seed derivation for per-epoch shuffles and similar streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Fisher-Yates with an explicit draw so the order is identical on every
// platform.
void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace dinw
