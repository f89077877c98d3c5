// Weights file ("DINW") and checkpoint ("DINW" + "ADAM" extension) I/O.

#include <bit>
#include <cstdio>
#include <cstring>

#include "dinw/model.hpp"
#include "dinw/train.hpp"

static_assert(std::endian::native == std::endian::little,
              "weights I/O assumes a little-endian host");

namespace dinw {

namespace {

constexpr char kMagic[4] = {'D', 'I', 'N', 'W'};
constexpr char kAdamMagic[4] = {'A', 'D', 'A', 'M'};
constexpr std::uint16_t kVersion = 1;

struct ExpectedLayer {
    const char* name;
    int in_c, out_c, k, stride_h;
    Activation act;
};

constexpr ExpectedLayer kTopology[7] = {
    {"L1", 1, 64, 3, 1, Activation::Relu},     {"L2", 64, 64, 3, 1, Activation::Relu},
    {"L3", 64, 64, 1, 1, Activation::Identity}, {"L4a", 64, 32, 3, 1, Activation::Identity},
    {"L5a", 32, 1, 3, 2, Activation::Identity}, {"L4b", 64, 32, 3, 1, Activation::Identity},
    {"L5b", 32, 1, 3, 2, Activation::Identity},
};

struct File {
    std::FILE* f = nullptr;
    ~File() {
        if (f != nullptr) std::fclose(f);
    }
};

void put(std::FILE* f, const void* p, std::size_t bytes) {
    if (std::fwrite(p, 1, bytes, f) != bytes) throw IoError("weights write failed");
}

template <typename T>
void put_pod(std::FILE* f, T v) {
    put(f, &v, sizeof v);
}

void get(std::FILE* f, void* p, std::size_t bytes, const std::string& what) {
    if (std::fread(p, 1, bytes, f) != bytes) {
        throw WeightsError(WeightsError::Kind::Truncated, "weights file truncated in " + what);
    }
}

template <typename T>
T get_pod(std::FILE* f, const std::string& what) {
    T v;
    get(f, &v, sizeof v, what);
    return v;
}

void write_layer(std::FILE* f, const ConvLayer& l) {
    const std::uint32_t spec[8] = {
        static_cast<std::uint32_t>(l.spec.in_channels),
        static_cast<std::uint32_t>(l.spec.out_channels),
        static_cast<std::uint32_t>(l.spec.kernel_h),
        static_cast<std::uint32_t>(l.spec.kernel_w),
        static_cast<std::uint32_t>(l.spec.stride_h),
        static_cast<std::uint32_t>(l.spec.stride_w),
        l.spec.padding == PaddingMode::ReplicateSame ? 1u : 0u,
        l.activation == Activation::Relu ? 1u : 0u,
    };
    put(f, spec, sizeof spec);
    put(f, l.kernel.data(), static_cast<std::size_t>(l.kernel.size()) * sizeof(float));
    put(f, l.bias.data(), static_cast<std::size_t>(l.bias.size()) * sizeof(float));
}

void write_net(std::FILE* f, const DeinterlaceNet& net, const TrainMeta& meta) {
    if (!net.is_default_topology()) {
        throw Error("save_weights: only the published topology is serializable");
    }
    put(f, kMagic, 4);
    put_pod(f, kVersion);
    put_pod(f, meta.epochs_completed);
    put_pod(f, meta.final_loss);
    put_pod(f, static_cast<std::uint16_t>(7));
    for (const auto& l : net.layers()) write_layer(f, l);
}

LoadedWeights read_net(std::FILE* f, const std::string& path) {
    char magic[4];
    if (std::fread(magic, 1, 4, f) != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw WeightsError(WeightsError::Kind::NotAWeightsFile, "not a weights file: " + path);
    }
    const auto version = get_pod<std::uint16_t>(f, "header");
    if (version != kVersion) {
        throw WeightsError(WeightsError::Kind::VersionMismatch,
                           "unsupported weights version " + std::to_string(version));
    }
    TrainMeta meta;
    meta.epochs_completed = get_pod<std::uint32_t>(f, "header");
    meta.final_loss = get_pod<float>(f, "header");
    const auto layer_count = get_pod<std::uint16_t>(f, "header");
    if (layer_count != 7) {
        throw WeightsError(WeightsError::Kind::ShapeMismatch,
                           "expected 7 layers, file has " + std::to_string(layer_count));
    }

    LoadedWeights out{DeinterlaceNet::create(), meta};
    int padding_seen = -1;
    for (int i = 0; i < 7; ++i) {
        const ExpectedLayer& want = kTopology[i];
        ConvLayer& layer = out.net.layers()[static_cast<std::size_t>(i)];
        std::uint32_t spec[8];
        get(f, spec, sizeof spec, std::string("layer ") + want.name);
        if (spec[0] != static_cast<std::uint32_t>(want.in_c) ||
            spec[1] != static_cast<std::uint32_t>(want.out_c) ||
            spec[2] != static_cast<std::uint32_t>(want.k) ||
            spec[3] != static_cast<std::uint32_t>(want.k) || spec[4] != static_cast<std::uint32_t>(want.stride_h) ||
            spec[5] != 1u || spec[6] > 1u ||
            spec[7] != (want.act == Activation::Relu ? 1u : 0u)) {
            throw WeightsError(WeightsError::Kind::ShapeMismatch,
                               std::string("shape mismatch at layer ") + want.name + ": expected " +
                                   std::to_string(want.out_c) + " kernels of " +
                                   std::to_string(want.k) + "x" + std::to_string(want.k) + "x" +
                                   std::to_string(want.in_c) + ", stride " +
                                   std::to_string(want.stride_h));
        }
        if (padding_seen < 0) padding_seen = static_cast<int>(spec[6]);
        if (padding_seen != static_cast<int>(spec[6])) {
            throw WeightsError(WeightsError::Kind::ShapeMismatch,
                               std::string("layer ") + want.name +
                                   " padding mode differs from earlier layers");
        }
        layer.spec.padding =
            spec[6] == 1u ? PaddingMode::ReplicateSame : PaddingMode::ZeroSame;
        get(f, layer.kernel.data(), static_cast<std::size_t>(layer.kernel.size()) * sizeof(float),
            std::string("layer ") + want.name + " kernel");
        get(f, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()) * sizeof(float),
            std::string("layer ") + want.name + " bias");
    }
    return out;
}

}  // namespace

void save_weights(const DeinterlaceNet& net, const TrainMeta& meta, const std::string& path) {
    File file{std::fopen(path.c_str(), "wb")};
    if (file.f == nullptr) throw IoError("cannot open weights file for writing: " + path);
    write_net(file.f, net, meta);
    if (std::fflush(file.f) != 0) throw IoError("weights write failed: " + path);
}

LoadedWeights load_weights(const std::string& path) {
    File file{std::fopen(path.c_str(), "rb")};
    if (file.f == nullptr) throw IoError("cannot open weights file: " + path);
    return read_net(file.f, path);
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    if (ck.opt.size() != 14) {
        throw Error("checkpoint: expected 14 optimizer slots, got " + std::to_string(ck.opt.size()));
    }
    File file{std::fopen(path.c_str(), "wb")};
    if (file.f == nullptr) throw IoError("cannot open checkpoint for writing: " + path);
    write_net(file.f, ck.net, ck.meta);
    put(file.f, kAdamMagic, 4);
    put_pod(file.f, ck.step);
    put_pod(file.f, ck.next_epoch);
    put_pod(file.f, ck.seed);
    for (const auto& st : ck.opt) {
        put(file.f, st.m.data(), static_cast<std::size_t>(st.m.size()) * sizeof(float));
        put(file.f, st.v.data(), static_cast<std::size_t>(st.v.size()) * sizeof(float));
    }
    if (std::fflush(file.f) != 0) throw IoError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    File file{std::fopen(path.c_str(), "rb")};
    if (file.f == nullptr) throw IoError("cannot open checkpoint: " + path);
    LoadedWeights base = read_net(file.f, path);

    Checkpoint ck;
    ck.net = std::move(base.net);
    ck.meta = base.meta;

    char magic[4];
    if (std::fread(magic, 1, 4, file.f) != 4 || std::memcmp(magic, kAdamMagic, 4) != 0) {
        throw WeightsError(WeightsError::Kind::MissingOptimizerState,
                           "checkpoint lacks optimizer-state records: " + path);
    }
    ck.step = get_pod<std::uint64_t>(file.f, "optimizer state");
    ck.next_epoch = get_pod<std::uint32_t>(file.f, "optimizer state");
    ck.seed = get_pod<std::uint64_t>(file.f, "optimizer state");
    for (auto& layer : ck.net.layers()) {
        for (const Tensor* ref : {&layer.kernel, &layer.bias}) {
            AdamState st{Tensor(ref->shape()), Tensor(ref->shape())};
            get(file.f, st.m.data(), static_cast<std::size_t>(st.m.size()) * sizeof(float),
                "optimizer state");
            get(file.f, st.v.data(), static_cast<std::size_t>(st.v.size()) * sizeof(float),
                "optimizer state");
            ck.opt.push_back(std::move(st));
        }
    }
    return ck;
}

}  // namespace dinw
