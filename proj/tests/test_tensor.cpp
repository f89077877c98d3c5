#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dinw/kernels.hpp"
#include "dinw/ops.hpp"
#include "oracles.hpp"

using namespace dinw;

namespace {

Tensor random_tensor(Tensor::Shape shape, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
    Tensor t(shape);
    std::uint64_t s = seed;
    for (std::int64_t i = 0; i < t.size(); ++i) {
        t.data()[i] = oracle::grid_uniform(s, lo, hi);
    }
    return t;
}

Tensor bias_tensor(const std::vector<float>& b) {
    return Tensor({1, static_cast<std::int64_t>(b.size()), 1, 1}, b);
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
    REQUIRE(a.shape() == b.shape());
    double worst = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::fabs(static_cast<double>(a.data()[i]) - b.data()[i]));
    }
    CHECK(worst <= tol);
}

}  // namespace

TEST_CASE("tensor invariants") {
    Tensor t({2, 3, 4, 5});
    CHECK(t.size() == 120);
    CHECK(t.batch() == 2);
    CHECK_THROWS_AS(Tensor({0, 1, 1, 1}), ShapeError);
    CHECK_THROWS_AS(Tensor({1, 1, 2, 2}, std::vector<float>(3, 0.0f)), ShapeError);
    CHECK(shape_str(t.shape()) == "2x3x4x5");
}

TEST_CASE("conv2d constant image averaging") {
    // 4x4 image of 5.0 under a 3x3 box kernel of 1/9.
    Tensor x = Tensor::full({1, 1, 4, 4}, 5.0f);
    Tensor w = Tensor::full({1, 1, 3, 3}, 1.0f / 9.0f);
    Tensor b = bias_tensor({0.0f});

    ConvSpec zero{1, 1, 3, 3, 1, 1, PaddingMode::ZeroSame};
    Tensor yz = ops::conv2d(x, w, b, zero);
    CHECK(yz.at(0, 0, 1, 1) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(yz.at(0, 0, 1, 2) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(yz.at(0, 0, 0, 0) < 5.0f);  // zero padding darkens the border
    CHECK(yz.at(0, 0, 3, 3) < 5.0f);

    ConvSpec rep{1, 1, 3, 3, 1, 1, PaddingMode::ReplicateSame};
    Tensor yr = ops::conv2d(x, w, b, rep);
    for (std::int64_t i = 0; i < yr.size(); ++i) {
        CHECK(yr.data()[i] == doctest::Approx(5.0).epsilon(1e-6));
    }
}

TEST_CASE("conv2d identity kernel") {
    Tensor x = random_tensor({2, 1, 5, 7}, 7);
    Tensor w = Tensor::full({1, 1, 1, 1}, 1.0f);
    Tensor b = bias_tensor({0.0f});
    ConvSpec spec{1, 1, 1, 1, 1, 1, PaddingMode::ReplicateSame};
    Tensor y = ops::conv2d(x, w, b, spec);
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("conv2d matches the nested-loop oracle") {
    std::uint64_t seed = 42;
    for (int trial = 0; trial < 12; ++trial) {
        const int kh = trial % 2 == 0 ? 3 : 1;
        const int stride = trial % 3 == 0 ? 2 : 1;
        const bool repl = trial % 2 == 1;
        const int in_c = 1 + trial % 3;
        const int out_c = 1 + (trial / 2) % 3;
        const std::int64_t h = 3 + trial % 6;
        const std::int64_t w = 3 + (trial * 5) % 9;

        Tensor x = random_tensor({2, in_c, h, w}, seed += 17);
        Tensor k = random_tensor({out_c, in_c, kh, kh}, seed += 17);
        std::vector<float> bias;
        for (int i = 0; i < out_c; ++i) bias.push_back(0.125f * static_cast<float>(i - 1));

        ConvSpec spec{in_c, out_c, kh, kh, stride, 1,
                      repl ? PaddingMode::ReplicateSame : PaddingMode::ZeroSame};
        const Tensor got = ops::conv2d(x, k, bias_tensor(bias), spec);
        const Tensor want = oracle::conv2d(x, k, bias, stride, repl);
        check_close(got, want, 1e-6);
    }

    // The spec'd case: 1x1x5x5, two 3x3 kernels, vertical stride 2.
    Tensor x = random_tensor({1, 1, 5, 5}, 99);
    Tensor k = random_tensor({2, 1, 3, 3}, 100);
    ConvSpec spec{1, 2, 3, 3, 2, 1, PaddingMode::ZeroSame};
    check_close(ops::conv2d(x, k, bias_tensor({0.0f, 0.0f}), spec),
                oracle::conv2d(x, k, {0.0f, 0.0f}, 2, false), 1e-6);
}

TEST_CASE("conv2d output shape law over H, W in [1,16]") {
    std::uint64_t seed = 5;
    for (int h = 1; h <= 16; ++h) {
        for (int w = 1; w <= 16; w += 3) {
            for (int stride = 1; stride <= 2; ++stride) {
                Tensor x = random_tensor({1, 1, h, w}, seed += 3);
                Tensor k = random_tensor({1, 1, 3, 3}, seed += 3);
                ConvSpec spec{1, 1, 3, 3, stride, 1, PaddingMode::ReplicateSame};
                Tensor y = ops::conv2d(x, k, bias_tensor({0.0f}), spec);
                CHECK(y.height() == (h + stride - 1) / stride);
                CHECK(y.width() == w);
            }
        }
    }
}

TEST_CASE("conv2d is linear in its input") {
    std::uint64_t seed = 1234;
    Tensor a = random_tensor({1, 2, 8, 8}, seed += 9);
    Tensor b = random_tensor({1, 2, 8, 8}, seed += 9);
    Tensor k = random_tensor({3, 2, 3, 3}, seed += 9);
    Tensor zero_bias = bias_tensor({0.0f, 0.0f, 0.0f});
    ConvSpec spec{2, 3, 3, 3, 1, 1, PaddingMode::ZeroSame};

    const Tensor lhs = ops::conv2d(ops::add(a, b), k, zero_bias, spec);
    const Tensor rhs = ops::add(ops::conv2d(a, k, zero_bias, spec),
                                ops::conv2d(b, k, zero_bias, spec));
    check_close(lhs, rhs, 1e-6);
}

TEST_CASE("conv2d contract violations name both shapes") {
    Tensor x({1, 2, 4, 4});
    Tensor k({1, 3, 3, 3});
    Tensor b = bias_tensor({0.0f});
    ConvSpec spec{3, 1, 3, 3, 1, 1, PaddingMode::ZeroSame};
    CHECK_THROWS_WITH_AS(ops::conv2d(x, k, b, spec),
                         doctest::Contains("1x2x4x4"), ShapeError);

    ConvSpec bad_stride{2, 1, 3, 3, 3, 1, PaddingMode::ZeroSame};
    CHECK_THROWS_AS(ops::conv2d(x, k, b, bad_stride), ShapeError);
}

TEST_CASE("relu basics and finiteness guard") {
    Tensor x({1, 1, 1, 3}, {-1.0f, 0.0f, 2.0f});
    Tensor y = ops::relu(x);
    CHECK(y.data()[0] == 0.0f);
    CHECK(y.data()[1] == 0.0f);
    CHECK(y.data()[2] == 2.0f);

    Tensor pos = random_tensor({1, 1, 4, 4}, 3, 0.0f, 1.0f);
    Tensor same = ops::relu(pos);
    for (std::int64_t i = 0; i < pos.size(); ++i) CHECK(same.data()[i] == pos.data()[i]);

    Tensor inf({1, 1, 1, 1}, {std::numeric_limits<float>::infinity()});
    CHECK_THROWS_AS(ops::add(inf, inf), NonFiniteError);
}

TEST_CASE("total_variation basics and oracle") {
    CHECK(ops::total_variation(Tensor::full({1, 1, 6, 6}, 0.37f)) == 0.0);

    Tensor two({1, 1, 1, 2}, {0.0f, 1.0f});
    CHECK(ops::total_variation(two) == doctest::Approx(1.0));

    Tensor img = random_tensor({1, 1, 8, 8}, 77);
    CHECK(ops::total_variation(img) == doctest::Approx(oracle::total_variation(img)).epsilon(1e-9));

    Tensor batch = random_tensor({3, 1, 5, 7}, 78);
    CHECK(ops::total_variation(batch) ==
          doctest::Approx(oracle::total_variation(batch)).epsilon(1e-9));
}

TEST_CASE("take_rows / weave_rows invert each other") {
    Tensor x = random_tensor({2, 1, 8, 5}, 11);
    Tensor top = ops::take_rows(x, 0);
    Tensor bottom = ops::take_rows(x, 1);
    CHECK(top.height() == 4);
    Tensor back = ops::weave_rows(top, bottom);
    for (std::int64_t i = 0; i < x.size(); ++i) CHECK(back.data()[i] == x.data()[i]);
}

TEST_CASE("no non-finite values from bounded inputs") {
    std::uint64_t seed = 31;
    Tensor x = random_tensor({1, 2, 6, 6}, seed, -1000.0f, 1000.0f);
    Tensor k = random_tensor({2, 2, 3, 3}, seed + 1, -1000.0f, 1000.0f);
    ConvSpec spec{2, 2, 3, 3, 1, 1, PaddingMode::ReplicateSame};
    Tensor y = ops::conv2d(x, k, bias_tensor({1000.0f, -1000.0f}), spec);
    CHECK(y.all_finite());
    CHECK(ops::relu(y).all_finite());
    Tensor plane = random_tensor({2, 1, 6, 6}, seed + 2, -1000.0f, 1000.0f);
    CHECK(std::isfinite(ops::total_variation(ops::take_rows(ops::mul(plane, plane), 0))));
}

// ---- backend equivalence: the scalar path is the reference, AVX2 must agree
// bit for bit (same per-element term order, double accumulation in both).

TEST_CASE("kernel backends produce identical bits") {
    std::vector<kernels::Backend> simd;
    for (auto b : {kernels::Backend::Avx2, kernels::Backend::Avx512}) {
        if (kernels::backend_available(b)) simd.push_back(b);
    }
    if (simd.empty()) {
        MESSAGE("no SIMD backend available; skipping equivalence tests");
        return;
    }
    const auto& scalar = kernels::table(kernels::Backend::Scalar);
    for (const auto backend : simd) {
    INFO("backend ", kernels::backend_name(backend));
    const auto& avx2 = kernels::table(backend);

    std::uint64_t seed = 2024;
    for (int trial = 0; trial < 10; ++trial) {
        const int stride = trial % 2 == 0 ? 1 : 2;
        const bool repl = trial % 3 != 0;
        const int kh = trial % 4 == 3 ? 1 : 3;
        const std::int64_t h = 4 + trial;
        const std::int64_t w = 5 + 3 * trial;  // exercises vector tails
        const int in_c = 1 + trial % 4;
        const int out_c = 1 + (trial * 7) % 5;

        Tensor x = random_tensor({2, in_c, h, w}, seed += 13);
        Tensor k = random_tensor({out_c, in_c, kh, kh}, seed += 13);
        std::vector<float> bias_v;
        for (int i = 0; i < out_c; ++i) bias_v.push_back(0.0625f * static_cast<float>(i));
        Tensor bias = bias_tensor(bias_v);

        ConvSpec spec{in_c, out_c, kh, kh, stride, 1,
                      repl ? PaddingMode::ReplicateSame : PaddingMode::ZeroSame};
        const auto g = kernels::conv_geometry(spec, x.batch(), h, w);

        Tensor y_s({g.batch, g.out_c, g.out_h, g.out_w});
        Tensor y_v(y_s.shape());
        scalar.conv2d_forward(x.data(), k.data(), bias.data(), y_s.data(), g);
        avx2.conv2d_forward(x.data(), k.data(), bias.data(), y_v.data(), g);
        for (std::int64_t i = 0; i < y_s.size(); ++i) REQUIRE(y_s.data()[i] == y_v.data()[i]);

        Tensor dy = random_tensor(y_s.shape(), seed += 13);
        Tensor dx_s(x.shape()), dx_v(x.shape());
        scalar.conv2d_backward_input(dy.data(), k.data(), dx_s.data(), g);
        avx2.conv2d_backward_input(dy.data(), k.data(), dx_v.data(), g);
        for (std::int64_t i = 0; i < dx_s.size(); ++i) REQUIRE(dx_s.data()[i] == dx_v.data()[i]);

        Tensor dw_s(k.shape()), dw_v(k.shape());
        Tensor db_s(bias.shape()), db_v(bias.shape());
        scalar.conv2d_backward_weights(x.data(), dy.data(), dw_s.data(), db_s.data(), g);
        avx2.conv2d_backward_weights(x.data(), dy.data(), dw_v.data(), db_v.data(), g);
        for (std::int64_t i = 0; i < dw_s.size(); ++i) REQUIRE(dw_s.data()[i] == dw_v.data()[i]);
        for (std::int64_t i = 0; i < db_s.size(); ++i) REQUIRE(db_s.data()[i] == db_v.data()[i]);
    }

    // relu and reductions, including non-multiple-of-8 tails
    for (std::int64_t n : {1, 7, 8, 9, 64, 1001}) {
        Tensor x = random_tensor({1, 1, 1, n}, seed += 13);
        Tensor ys({1, 1, 1, n}), yv({1, 1, 1, n});
        scalar.relu_forward(x.data(), ys.data(), n);
        avx2.relu_forward(x.data(), yv.data(), n);
        for (std::int64_t i = 0; i < n; ++i) REQUIRE(ys.data()[i] == yv.data()[i]);

        Tensor dy = random_tensor({1, 1, 1, n}, seed += 13);
        scalar.relu_backward(x.data(), dy.data(), ys.data(), n);
        avx2.relu_backward(x.data(), dy.data(), yv.data(), n);
        for (std::int64_t i = 0; i < n; ++i) REQUIRE(ys.data()[i] == yv.data()[i]);

        REQUIRE(scalar.sum(x.data(), n) == avx2.sum(x.data(), n));
        REQUIRE(scalar.sum_squares(x.data(), n) == avx2.sum_squares(x.data(), n));
    }
    }
}

TEST_CASE("backend selection") {
    CHECK(kernels::backend_available(kernels::Backend::Scalar));
    const auto saved = kernels::active_backend();
    kernels::set_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    kernels::set_backend(saved);
    CHECK(std::string(kernels::backend_name(kernels::Backend::Avx2)) == "avx2");
}
