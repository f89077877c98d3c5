#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "dinw/tensor.hpp"

namespace dinw {

struct ConvLayer {
    std::string name;
    ConvSpec spec;
    Activation activation = Activation::Identity;
    Tensor kernel;  // (out_c, in_c, k_h, k_w)
    Tensor bias;    // (1, out_c, 1, 1)
};

// Kernel counts are adjustable for ablation tests only; the defaults are the
// published topology and the only shape the weights file accepts.
struct NetConfig {
    int l1_kernels = 64;
    int l2_kernels = 64;
    int l3_kernels = 64;
    int l4_kernels = 32;  // per pathway
    PaddingMode padding = PaddingMode::ReplicateSame;

    bool operator==(const NetConfig&) const = default;
};

enum class Pathway { EvenT, OddT1 };

// Five conv layers: L1-L3 shared trunk (3x3, 3x3, 1x1; ReLU on the first
// two), then per pathway L4 (3x3) and L5 (3x3, vertical stride 2, identity).
// Pathway EvenT predicts the even field of frame t (0-indexed rows 1,3,...),
// pathway OddT1 the odd field of frame t+1 (rows 0,2,...).
class DeinterlaceNet {
public:
    DeinterlaceNet() = default;  // empty shell; build with create() or load_weights()

    struct Halves {
        Tensor even_t;
        Tensor odd_t1;
    };

    static DeinterlaceNet create(const NetConfig& config = {}, std::uint64_t seed = 1);

    // Inference on (n, 1, H, W), H even; each half is (n, 1, H/2, W).
    // Weights are read-only here, so concurrent calls over distinct inputs
    // are safe.
    Halves forward(const Tensor& interlaced) const;

    // Runs the trunk plus a single pathway. Calling this twice does the work
    // of two separate networks (the no-shared-layers baseline).
    Tensor forward_path(const Tensor& interlaced, Pathway which) const;

    // Serialization/training order: L1, L2, L3, L4a, L5a, L4b, L5b.
    std::array<ConvLayer, 7>& layers() { return layers_; }
    const std::array<ConvLayer, 7>& layers() const { return layers_; }

    const NetConfig& config() const { return config_; }
    bool is_default_topology() const {
        return config_.l1_kernels == 64 && config_.l2_kernels == 64 && config_.l3_kernels == 64 &&
               config_.l4_kernels == 32;
    }

private:
    NetConfig config_;
    std::array<ConvLayer, 7> layers_;
};

// Multiply-accumulate count of one forward pass at the given resolution.
// shared=false prices two disjoint networks, each with its own L1-L3 trunk.
std::uint64_t flop_count(const DeinterlaceNet& net, std::int64_t height, std::int64_t width,
                         bool shared);

struct TrainMeta {
    std::uint32_t epochs_completed = 0;
    float final_loss = 0.0f;
};

// Weights file, magic "DINW": u16 version, TrainMeta, u16 layer count, then
// per layer the ConvSpec integers and raw little-endian float32 kernel/bias.
// Round-trips are bit-exact. Only the published topology is accepted.
void save_weights(const DeinterlaceNet& net, const TrainMeta& meta, const std::string& path);
struct LoadedWeights {
    DeinterlaceNet net;
    TrainMeta meta;
};
LoadedWeights load_weights(const std::string& path);

}  // namespace dinw
