#include "dinw/patches.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "dinw/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "patch archive I/O assumes a little-endian host");

namespace dinw {

namespace {

constexpr char kMagic[4] = {'D', 'I', 'P', 'T'};
constexpr std::uint16_t kVersion = 1;

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void write_u16(std::FILE* f, std::uint16_t v) { std::fwrite(&v, sizeof v, 1, f); }
void write_u32(std::FILE* f, std::uint32_t v) { std::fwrite(&v, sizeof v, 1, f); }
void write_u64(std::FILE* f, std::uint64_t v) { std::fwrite(&v, sizeof v, 1, f); }

template <typename T>
bool read_pod(std::FILE* f, T& v) {
    return std::fread(&v, sizeof v, 1, f) == 1;
}

struct FileCloser {
    std::FILE* f;
    ~FileCloser() {
        if (f != nullptr) std::fclose(f);
    }
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    return splitmix64(state);
}

void deterministic_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
    std::uint64_t state = seed;
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(splitmix64(state) % i);
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<PatchTriplet> extract_patches(const Frame& interlaced, const Frame& frame_t,
                                          const Frame& frame_t1, std::uint32_t source_id,
                                          int patch_size, int stride) {
    if (interlaced.channels != 1 || frame_t.channels != 1 || frame_t1.channels != 1) {
        throw ShapeError("extract_patches: frames must be single-channel (L)");
    }
    if (!interlaced.same_dims(frame_t) || !interlaced.same_dims(frame_t1)) {
        throw ShapeError("extract_patches: frame dimensions differ");
    }
    if (interlaced.width < patch_size || interlaced.height < patch_size) {
        throw ShapeError("extract_patches: frame " + std::to_string(interlaced.width) + "x" +
                         std::to_string(interlaced.height) + " smaller than patch size " +
                         std::to_string(patch_size));
    }
    if (patch_size % 2 != 0 || stride % 2 != 0) {
        throw ParityError("extract_patches: patch size and stride must be even");
    }

    const int ny = (interlaced.height - patch_size) / stride + 1;
    const int nx = (interlaced.width - patch_size) / stride + 1;
    std::vector<PatchTriplet> out;
    out.reserve(static_cast<std::size_t>(ny) * nx);

    for (int by = 0; by < ny; ++by) {
        for (int bx = 0; bx < nx; ++bx) {
            PatchTriplet t;
            t.source_id = source_id;
            t.origin_row = static_cast<std::uint32_t>(by * stride);
            t.origin_col = static_cast<std::uint32_t>(bx * stride);
            t.input.resize(static_cast<std::size_t>(patch_size) * patch_size);
            t.target_even_t.resize(static_cast<std::size_t>(patch_size / 2) * patch_size);
            t.target_odd_t1.resize(static_cast<std::size_t>(patch_size / 2) * patch_size);

            for (int y = 0; y < patch_size; ++y) {
                const float* src = interlaced.row(0, by * stride + y) + bx * stride;
                std::memcpy(t.input.data() + static_cast<std::size_t>(y) * patch_size, src,
                            static_cast<std::size_t>(patch_size) * sizeof(float));
            }
            for (int y = 0; y < patch_size / 2; ++y) {
                const float* et = frame_t.row(0, by * stride + 2 * y + 1) + bx * stride;
                std::memcpy(t.target_even_t.data() + static_cast<std::size_t>(y) * patch_size, et,
                            static_cast<std::size_t>(patch_size) * sizeof(float));
                const float* ot = frame_t1.row(0, by * stride + 2 * y) + bx * stride;
                std::memcpy(t.target_odd_t1.data() + static_cast<std::size_t>(y) * patch_size, ot,
                            static_cast<std::size_t>(patch_size) * sizeof(float));
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

SplitIndices split_dataset(std::size_t count, double train_fraction, std::uint64_t seed) {
    if (count == 0) throw Error("split_dataset: empty input");
    if (train_fraction < 0.0 || train_fraction > 1.0) {
        throw Error("split_dataset: train fraction must be in [0, 1]");
    }
    std::vector<std::size_t> order(count);
    for (std::size_t i = 0; i < count; ++i) order[i] = i;
    deterministic_shuffle(order, seed);

    const auto val_count =
        static_cast<std::size_t>(std::ceil((1.0 - train_fraction) * static_cast<double>(count)));
    const std::size_t train_count = count - val_count;
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
    out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
    return out;
}

std::pair<std::vector<PatchTriplet>, std::vector<PatchTriplet>> split_dataset(
    const std::vector<PatchTriplet>& triplets, double train_fraction, std::uint64_t seed) {
    const SplitIndices idx = split_dataset(triplets.size(), train_fraction, seed);
    std::pair<std::vector<PatchTriplet>, std::vector<PatchTriplet>> out;
    out.first.reserve(idx.train.size());
    out.second.reserve(idx.validation.size());
    for (std::size_t i : idx.train) out.first.push_back(triplets[i]);
    for (std::size_t i : idx.validation) out.second.push_back(triplets[i]);
    return out;
}

PatchArchiveWriter::PatchArchiveWriter(const std::string& path) {
    f_ = std::fopen(path.c_str(), "wb");
    if (f_ == nullptr) throw IoError("cannot open patch archive for writing: " + path);
    std::fwrite(kMagic, 1, 4, f_);
    write_u16(f_, kVersion);
    write_u16(f_, static_cast<std::uint16_t>(PatchTriplet::kSize));
    write_u64(f_, 0);  // count, patched in close()
}

PatchArchiveWriter::~PatchArchiveWriter() {
    try {
        close();
    } catch (...) {
    }
}

void PatchArchiveWriter::add(const PatchTriplet& t) {
    if (f_ == nullptr) throw IoError("patch archive already closed");
    const std::size_t full = static_cast<std::size_t>(PatchTriplet::kSize) * PatchTriplet::kSize;
    const std::size_t half = full / 2;
    if (t.input.size() != full || t.target_even_t.size() != half ||
        t.target_odd_t1.size() != half) {
        throw ShapeError("patch archive: record plane sizes do not match patch size 64");
    }
    write_u32(f_, t.source_id);
    write_u32(f_, t.origin_row);
    write_u32(f_, t.origin_col);
    std::fwrite(t.input.data(), sizeof(float), full, f_);
    std::fwrite(t.target_even_t.data(), sizeof(float), half, f_);
    std::fwrite(t.target_odd_t1.data(), sizeof(float), half, f_);
    if (std::ferror(f_) != 0) throw IoError("patch archive: write failed");
    ++count_;
}

void PatchArchiveWriter::close() {
    if (f_ == nullptr) return;
    std::fseek(f_, 8, SEEK_SET);
    write_u64(f_, count_);
    const bool ok = std::ferror(f_) == 0;
    std::fclose(f_);
    f_ = nullptr;
    if (!ok) throw IoError("patch archive: finalize failed");
}

std::uint64_t patch_archive_count(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open patch archive: " + path);
    FileCloser closer{f};
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not a patch archive: " + path);
    }
    std::uint16_t version = 0, patch = 0;
    std::uint64_t count = 0;
    if (!read_pod(f, version) || !read_pod(f, patch) || !read_pod(f, count)) {
        throw IoError("truncated patch archive header: " + path);
    }
    if (version != kVersion) {
        throw IoError("unsupported patch archive version " + std::to_string(version));
    }
    if (patch != PatchTriplet::kSize) {
        throw IoError("unsupported patch size " + std::to_string(patch));
    }
    return count;
}

std::vector<PatchTriplet> load_patch_archive(const std::string& path) {
    const std::uint64_t count = patch_archive_count(path);
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open patch archive: " + path);
    FileCloser closer{f};
    std::fseek(f, 16, SEEK_SET);

    const std::size_t full = static_cast<std::size_t>(PatchTriplet::kSize) * PatchTriplet::kSize;
    const std::size_t half = full / 2;
    std::vector<PatchTriplet> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PatchTriplet t;
        t.input.resize(full);
        t.target_even_t.resize(half);
        t.target_odd_t1.resize(half);
        const bool ok = read_pod(f, t.source_id) && read_pod(f, t.origin_row) &&
                        read_pod(f, t.origin_col) &&
                        std::fread(t.input.data(), sizeof(float), full, f) == full &&
                        std::fread(t.target_even_t.data(), sizeof(float), half, f) == half &&
                        std::fread(t.target_odd_t1.data(), sizeof(float), half, f) == half;
        if (!ok) {
            throw IoError("truncated patch archive at record " + std::to_string(i) + ": " + path);
        }
        out.push_back(std::move(t));
    }
    return out;
}

void save_patch_archive(const std::string& path, const std::vector<PatchTriplet>& triplets) {
    PatchArchiveWriter w(path);
    for (const auto& t : triplets) w.add(t);
    w.close();
}

}  // namespace dinw
