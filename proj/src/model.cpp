#include "dinw/model.hpp"

#include <cmath>

#include "dinw/ops.hpp"
#include "dinw/patches.hpp"

namespace dinw {

namespace {

double unit_double(std::uint64_t r) {
    return static_cast<double>(r >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

ConvLayer make_layer(const std::string& name, int in_c, int out_c, int k, int stride_h,
                     Activation act, PaddingMode padding, std::uint64_t seed) {
    ConvLayer layer;
    layer.name = name;
    layer.spec = ConvSpec{in_c, out_c, k, k, stride_h, 1, padding};
    layer.activation = act;
    layer.kernel = Tensor({out_c, in_c, k, k});
    layer.bias = Tensor({1, out_c, 1, 1});

    // Glorot-uniform bound; biases start at zero.
    const double fan_in = static_cast<double>(in_c) * k * k;
    const double fan_out = static_cast<double>(out_c) * k * k;
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uint64_t state = seed;
    float* kw = layer.kernel.data();
    for (std::int64_t i = 0; i < layer.kernel.size(); ++i) {
        kw[i] = static_cast<float>((2.0 * unit_double(splitmix_next(state)) - 1.0) * bound);
    }
    return layer;
}

Tensor apply_layer(const Tensor& x, const ConvLayer& layer) {
    Tensor y = ops::conv2d(x, layer.kernel, layer.bias, layer.spec);
    if (layer.activation == Activation::Relu) y = ops::relu(y);
    return y;
}

void validate_input(const Tensor& interlaced) {
    if (interlaced.channels() != 1) {
        throw ShapeError("forward: expected single-channel input, got " +
                         shape_str(interlaced.shape()));
    }
    if (interlaced.height() % 2 != 0) {
        throw ParityError("forward: input height " + std::to_string(interlaced.height()) +
                          " is odd; interlaced frames have even height");
    }
}

}  // namespace

DeinterlaceNet DeinterlaceNet::create(const NetConfig& config, std::uint64_t seed) {
    DeinterlaceNet net;
    net.config_ = config;
    const PaddingMode pad = config.padding;
    net.layers_ = {
        make_layer("L1", 1, config.l1_kernels, 3, 1, Activation::Relu, pad, mix_seed(seed, 0)),
        make_layer("L2", config.l1_kernels, config.l2_kernels, 3, 1, Activation::Relu, pad,
                   mix_seed(seed, 1)),
        make_layer("L3", config.l2_kernels, config.l3_kernels, 1, 1, Activation::Identity, pad,
                   mix_seed(seed, 2)),
        make_layer("L4a", config.l3_kernels, config.l4_kernels, 3, 1, Activation::Identity, pad,
                   mix_seed(seed, 3)),
        make_layer("L5a", config.l4_kernels, 1, 3, 2, Activation::Identity, pad, mix_seed(seed, 4)),
        make_layer("L4b", config.l3_kernels, config.l4_kernels, 3, 1, Activation::Identity, pad,
                   mix_seed(seed, 5)),
        make_layer("L5b", config.l4_kernels, 1, 3, 2, Activation::Identity, pad, mix_seed(seed, 6)),
    };
    return net;
}

DeinterlaceNet::Halves DeinterlaceNet::forward(const Tensor& interlaced) const {
    validate_input(interlaced);
    Tensor t = apply_layer(interlaced, layers_[0]);
    t = apply_layer(t, layers_[1]);
    t = apply_layer(t, layers_[2]);
    Tensor even_t = apply_layer(apply_layer(t, layers_[3]), layers_[4]);
    Tensor odd_t1 = apply_layer(apply_layer(t, layers_[5]), layers_[6]);
    return Halves{std::move(even_t), std::move(odd_t1)};
}

Tensor DeinterlaceNet::forward_path(const Tensor& interlaced, Pathway which) const {
    validate_input(interlaced);
    Tensor t = apply_layer(interlaced, layers_[0]);
    t = apply_layer(t, layers_[1]);
    t = apply_layer(t, layers_[2]);
    const int base = which == Pathway::EvenT ? 3 : 5;
    return apply_layer(apply_layer(t, layers_[base]), layers_[base + 1]);
}

std::uint64_t flop_count(const DeinterlaceNet& net, std::int64_t height, std::int64_t width,
                         bool shared) {
    const auto& layers = net.layers();
    auto layer_macs = [&](const ConvLayer& l) {
        const std::int64_t out_h = l.spec.out_height(height);
        return static_cast<std::uint64_t>(out_h) * static_cast<std::uint64_t>(width) *
               static_cast<std::uint64_t>(l.spec.kernel_h) * l.spec.kernel_w * l.spec.in_channels *
               l.spec.out_channels;
    };
    const std::uint64_t trunk = layer_macs(layers[0]) + layer_macs(layers[1]) + layer_macs(layers[2]);
    const std::uint64_t path_a = layer_macs(layers[3]) + layer_macs(layers[4]);
    const std::uint64_t path_b = layer_macs(layers[5]) + layer_macs(layers[6]);
    return shared ? trunk + path_a + path_b : 2 * trunk + path_a + path_b;
}

}  // namespace dinw
