#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "dinw/kernels.hpp"
#include "dinw/model.hpp"
#include "dinw/ops.hpp"
#include "oracles.hpp"

using namespace dinw;
namespace fs = std::filesystem;

namespace {

Tensor random_input(std::int64_t h, std::int64_t w, std::uint64_t seed) {
    Tensor t({1, 1, h, w});
    std::uint64_t s = seed;
    for (std::int64_t i = 0; i < t.size(); ++i) t.data()[i] = oracle::grid_uniform(s, 0.0f, 1.0f);
    return t;
}

// Small ablation topology keeps the shape/property tests fast.
NetConfig tiny_config() { return NetConfig{6, 6, 6, 4, PaddingMode::ReplicateSame}; }

bool tensors_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        if (a.data()[i] != b.data()[i]) return false;
    }
    return true;
}

fs::path temp_file(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "dinw_model_test";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("forward shape law and finiteness at 64x64") {
    DeinterlaceNet net = DeinterlaceNet::create(NetConfig{}, 7);
    const auto halves = net.forward(random_input(64, 64, 3));
    CHECK(halves.even_t.shape() == Tensor::Shape{1, 1, 32, 64});
    CHECK(halves.odd_t1.shape() == Tensor::Shape{1, 1, 32, 64});
    CHECK(halves.even_t.all_finite());
    CHECK(halves.odd_t1.all_finite());
}

TEST_CASE("forward at 1920x1080 yields two 540x1920 halves") {
    DeinterlaceNet net = DeinterlaceNet::create(NetConfig{}, 9);
    const auto halves = net.forward(random_input(1080, 1920, 5));
    CHECK(halves.even_t.shape() == Tensor::Shape{1, 1, 540, 1920});
    CHECK(halves.odd_t1.shape() == Tensor::Shape{1, 1, 540, 1920});
}

TEST_CASE("resolution independence for even heights and widths in [16,128]") {
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 21);
    for (std::int64_t h = 16; h <= 128; h += 26) {
        for (std::int64_t w = 17; w <= 128; w += 37) {
            const auto halves = net.forward(random_input(h, w, h * 1000 + w));
            CHECK(halves.even_t.height() == h / 2);
            CHECK(halves.even_t.width() == w);
            CHECK(halves.odd_t1.height() == h / 2);
        }
    }
}

TEST_CASE("odd input height is rejected with a parity error") {
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 2);
    CHECK_THROWS_AS(net.forward(random_input(17, 16, 1)), ParityError);
}

TEST_CASE("fixed seed and input give bit-identical runs") {
    DeinterlaceNet a = DeinterlaceNet::create(NetConfig{}, 1234);
    DeinterlaceNet b = DeinterlaceNet::create(NetConfig{}, 1234);
    const Tensor x = random_input(32, 48, 6);
    const auto ha = a.forward(x);
    const auto hb = b.forward(x);
    CHECK(tensors_equal(ha.even_t, hb.even_t));
    CHECK(tensors_equal(ha.odd_t1, hb.odd_t1));

    DeinterlaceNet c = DeinterlaceNet::create(NetConfig{}, 1235);
    CHECK_FALSE(tensors_equal(c.layers()[0].kernel, a.layers()[0].kernel));
}

TEST_CASE("pathway isolation and trunk sharing") {
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 42);
    const Tensor x = random_input(24, 24, 9);
    const auto base = net.forward(x);

    auto perturbed = [&](int layer_index) {
        DeinterlaceNet copy = net;
        copy.layers()[static_cast<std::size_t>(layer_index)].kernel.data()[0] += 0.25f;
        return copy.forward(x);
    };

    for (int idx : {3, 4}) {  // L4a, L5a
        const auto h = perturbed(idx);
        CHECK_FALSE(tensors_equal(h.even_t, base.even_t));
        CHECK(tensors_equal(h.odd_t1, base.odd_t1));
    }
    for (int idx : {5, 6}) {  // L4b, L5b
        const auto h = perturbed(idx);
        CHECK(tensors_equal(h.even_t, base.even_t));
        CHECK_FALSE(tensors_equal(h.odd_t1, base.odd_t1));
    }
    for (int idx : {0, 1, 2}) {  // shared trunk
        const auto h = perturbed(idx);
        CHECK_FALSE(tensors_equal(h.even_t, base.even_t));
        CHECK_FALSE(tensors_equal(h.odd_t1, base.odd_t1));
    }
}

TEST_CASE("forward_path equals the corresponding shared-forward half") {
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 11);
    const Tensor x = random_input(32, 20, 3);
    const auto halves = net.forward(x);
    CHECK(tensors_equal(net.forward_path(x, Pathway::EvenT), halves.even_t));
    CHECK(tensors_equal(net.forward_path(x, Pathway::OddT1), halves.odd_t1));
}

TEST_CASE("concurrent inference over shared read-only weights") {
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 77);
    std::vector<Tensor> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(random_input(32, 32, 100 + i));
    std::vector<DeinterlaceNet::Halves> expected;
    for (const auto& x : inputs) expected.push_back(net.forward(x));

    std::vector<DeinterlaceNet::Halves> got(4);
    std::vector<std::thread> workers;
    for (int i = 0; i < 4; ++i) {
        workers.emplace_back([&, i] { got[static_cast<std::size_t>(i)] = net.forward(inputs[static_cast<std::size_t>(i)]); });
    }
    for (auto& t : workers) t.join();
    for (int i = 0; i < 4; ++i) {
        CHECK(tensors_equal(got[static_cast<std::size_t>(i)].even_t, expected[static_cast<std::size_t>(i)].even_t));
        CHECK(tensors_equal(got[static_cast<std::size_t>(i)].odd_t1, expected[static_cast<std::size_t>(i)].odd_t1));
    }
}

TEST_CASE("flop_count: shared trunk beats two networks, closed form per pixel") {
    DeinterlaceNet net = DeinterlaceNet::create(NetConfig{}, 1);
    const std::pair<int, int> resolutions[] = {{720, 480}, {720, 576}, {1024, 768}, {1920, 1080}};
    for (const auto& [w, h] : resolutions) {
        const std::uint64_t shared = flop_count(net, h, w, true);
        const std::uint64_t unshared = flop_count(net, h, w, false);
        CHECK(shared < unshared);

        // Hand sum: L1 3*3*1*64 + L2 3*3*64*64 + L3 1*1*64*64 + two L4
        // 3*3*64*32 + two L5 3*3*32*1 at half height.
        const std::uint64_t px = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
        const std::uint64_t want_shared = px * (576 + 36864 + 4096 + 2 * 18432) + (px / 2) * 2 * 288;
        CHECK(shared == want_shared);
        const std::uint64_t want_unshared = want_shared + px * (576 + 36864 + 4096);
        CHECK(unshared == want_unshared);
    }

    // MACs scale linearly with pixel count: doubling each side quadruples.
    CHECK(flop_count(net, 128, 128, true) * 4 == flop_count(net, 256, 256, true));
}

TEST_CASE("weights round-trip is bit-exact") {
    DeinterlaceNet net = DeinterlaceNet::create(NetConfig{}, 33);
    const TrainMeta meta{17, 0.03125f};
    const auto path = temp_file("roundtrip.dinw");
    save_weights(net, meta, path.string());
    const LoadedWeights loaded = load_weights(path.string());
    CHECK(loaded.meta.epochs_completed == 17);
    CHECK(loaded.meta.final_loss == 0.03125f);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(tensors_equal(loaded.net.layers()[i].kernel, net.layers()[i].kernel));
        CHECK(tensors_equal(loaded.net.layers()[i].bias, net.layers()[i].bias));
        CHECK(loaded.net.layers()[i].spec == net.layers()[i].spec);
    }
}

TEST_CASE("weights loading failure modes are distinct") {
    DeinterlaceNet net = DeinterlaceNet::create(NetConfig{}, 3);
    const auto path = temp_file("weights.dinw");
    save_weights(net, TrainMeta{}, path.string());

    SUBCASE("corrupted magic") {
        auto bad = temp_file("bad_magic.dinw");
        fs::copy_file(path, bad, fs::copy_options::overwrite_existing);
        std::fstream f(bad, std::ios::in | std::ios::out | std::ios::binary);
        f.write("QQQQ", 4);
        f.close();
        try {
            load_weights(bad.string());
            FAIL("expected WeightsError");
        } catch (const WeightsError& e) {
            CHECK(e.kind() == WeightsError::Kind::NotAWeightsFile);
            CHECK(std::string(e.what()).find("not a weights file") != std::string::npos);
        }
    }

    SUBCASE("version mismatch") {
        auto bad = temp_file("bad_version.dinw");
        fs::copy_file(path, bad, fs::copy_options::overwrite_existing);
        std::fstream f(bad, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const std::uint16_t v = 9;
        f.write(reinterpret_cast<const char*>(&v), 2);
        f.close();
        try {
            load_weights(bad.string());
            FAIL("expected WeightsError");
        } catch (const WeightsError& e) {
            CHECK(e.kind() == WeightsError::Kind::VersionMismatch);
        }
    }

    SUBCASE("L2 kernel count of 63 names layer L2") {
        auto bad = temp_file("bad_l2.dinw");
        fs::copy_file(path, bad, fs::copy_options::overwrite_existing);
        // Header is 16 bytes; L1 block is 8 u32 + (64*1*3*3 + 64) floats.
        const long l2_spec_off = 16 + 32 + (64 * 9 + 64) * 4;
        std::fstream f(bad, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(l2_spec_off + 4);  // out_channels field of L2
        const std::uint32_t count = 63;
        f.write(reinterpret_cast<const char*>(&count), 4);
        f.close();
        try {
            load_weights(bad.string());
            FAIL("expected WeightsError");
        } catch (const WeightsError& e) {
            CHECK(e.kind() == WeightsError::Kind::ShapeMismatch);
            CHECK(std::string(e.what()).find("L2") != std::string::npos);
        }
    }

    SUBCASE("truncated file") {
        auto bad = temp_file("truncated.dinw");
        std::ifstream in(path, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)), {});
        in.close();
        bytes.resize(bytes.size() / 2);
        std::ofstream out(bad, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.close();
        try {
            load_weights(bad.string());
            FAIL("expected WeightsError");
        } catch (const WeightsError& e) {
            CHECK(e.kind() == WeightsError::Kind::Truncated);
        }
    }

    SUBCASE("ablation topologies are not serializable") {
        DeinterlaceNet tiny = DeinterlaceNet::create(NetConfig{4, 4, 4, 2}, 1);
        CHECK_THROWS_AS(save_weights(tiny, TrainMeta{}, temp_file("tiny.dinw").string()), Error);
    }
}

TEST_CASE("forward is identical across kernel backends") {
    if (!kernels::backend_available(kernels::Backend::Avx2)) return;
    DeinterlaceNet net = DeinterlaceNet::create(tiny_config(), 5);
    const Tensor x = random_input(48, 36, 8);

    kernels::set_backend(kernels::Backend::Scalar);
    const auto scalar = net.forward(x);
    kernels::set_backend(kernels::Backend::Avx2);
    const auto avx2 = net.forward(x);
    kernels::set_backend(kernels::Backend::Avx2);

    CHECK(tensors_equal(scalar.even_t, avx2.even_t));
    CHECK(tensors_equal(scalar.odd_t1, avx2.odd_t1));
}
