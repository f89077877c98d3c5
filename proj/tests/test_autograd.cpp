#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dinw/autograd.hpp"
#include "oracles.hpp"

using namespace dinw;
namespace ag = dinw::autograd;

namespace {

// 2^-10: the binary neighbor of the 1e-3 step, exactly representable so the
// perturbed parameter is stored without rounding.
constexpr double kStep = 0x1.0p-10;
constexpr double kRtol = 1e-3;
constexpr double kAtol = 1e-4;

Tensor grid_random(Tensor::Shape shape, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
    Tensor t(shape);
    std::uint64_t s = seed;
    for (std::int64_t i = 0; i < t.size(); ++i) t.data()[i] = oracle::grid_uniform(s, lo, hi);
    return t;
}

Tensor bias_tensor(std::int64_t c, float v = 0.0f) { return Tensor::full({1, c, 1, 1}, v); }

// Finite differences measure the smooth part; reject setups where a ReLU
// input sits within a step of its kink.
bool relu_safe(const Tensor& preact, double margin) {
    for (std::int64_t i = 0; i < preact.size(); ++i) {
        if (std::fabs(static_cast<double>(preact.data()[i])) < margin) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("backward requires a scalar loss") {
    ag::Value x = ag::leaf(grid_random({1, 1, 3, 3}, 1), true);
    CHECK_THROWS_AS(ag::backward(ag::relu(x)), ShapeError);
}

TEST_CASE("sum gradient is all ones; zero-scaled loss gives exact zeros") {
    Tensor t = grid_random({2, 1, 4, 5}, 2);
    ag::Value x = ag::leaf(t, true);
    ag::backward(ag::sum(x));
    Tensor g = x.grad();
    for (std::int64_t i = 0; i < g.size(); ++i) CHECK(g.data()[i] == 1.0f);

    ag::Value y = ag::leaf(t, true);
    ag::backward(ag::scale(ag::sum(ag::relu(y)), 0.0));
    Tensor gz = y.grad();
    for (std::int64_t i = 0; i < gz.size(); ++i) CHECK(gz.data()[i] == 0.0f);
}

TEST_CASE("relu subgradient: 1 at x=3, 0 at x=-3 and at x=0") {
    Tensor t({1, 1, 1, 3}, {3.0f, -3.0f, 0.0f});
    ag::Value x = ag::leaf(t, true);
    ag::backward(ag::sum(ag::relu(x)));
    const Tensor g = x.grad();
    CHECK(g.data()[0] == 1.0f);
    CHECK(g.data()[1] == 0.0f);
    CHECK(g.data()[2] == 0.0f);
}

TEST_CASE("spec case: d sum(relu(conv(x,w))) / dw within 1e-4 of central differences") {
    std::uint64_t seed = 11;
    Tensor x, w;
    Tensor bias = bias_tensor(1);
    ConvSpec spec{1, 1, 3, 3, 1, 1, PaddingMode::ZeroSame};
    do {
        x = grid_random({1, 1, 4, 4}, ++seed);
        w = grid_random({1, 1, 3, 3}, seed * 7 + 1);
    } while (!relu_safe(ops::conv2d(x, w, bias, spec), 8.0 * kStep));

    ag::Value wv = ag::leaf(w, true);
    ag::backward(ag::sum(ag::relu(ag::conv2d(ag::leaf(x), wv, ag::leaf(bias), spec))));
    const Tensor analytic = wv.grad();

    Tensor probe = w;
    auto f = [&]() {
        return ops::sum(ops::relu(ops::conv2d(x, probe, bias, spec)));
    };
    const auto r = oracle::grad_check(f, probe.data(), probe.size(), analytic.data(), kStep,
                                      1e-4, 0.0);
    CHECK(r.pass);
    CHECK(r.max_rel <= 1e-4);
}

TEST_CASE("randomized gradient checks across the operator set (100+ trials)") {
    int trials = 0;
    std::uint64_t seed = 1000;

    // (a) single conv: gradients w.r.t. weights, bias and input
    for (int i = 0; i < 36; ++i, ++trials) {
        const int stride = i % 2 == 0 ? 1 : 2;
        const bool repl = i % 3 == 0;
        const int in_c = 1 + i % 2;
        const int out_c = 1 + i % 3;
        const int k = i % 5 == 4 ? 1 : 3;
        ConvSpec spec{in_c, out_c, k, k, stride, 1,
                      repl ? PaddingMode::ReplicateSame : PaddingMode::ZeroSame};
        Tensor x = grid_random({1 + i % 2, in_c, 4 + i % 3, 5}, seed += 31);
        Tensor w = grid_random({out_c, in_c, k, k}, seed += 31);
        Tensor b = grid_random({1, out_c, 1, 1}, seed += 31);

        ag::Value xv = ag::leaf(x, true);
        ag::Value wv = ag::leaf(w, true);
        ag::Value bv = ag::leaf(b, true);
        ag::backward(ag::sum_squares(ag::conv2d(xv, wv, bv, spec)));

        {
            Tensor probe = w;
            auto f = [&]() { return ops::sum_squares(ops::conv2d(x, probe, b, spec)); };
            CHECK(oracle::grad_check(f, probe.data(), probe.size(), wv.grad().data(), kStep,
                                     kRtol, kAtol)
                      .pass);
        }
        {
            Tensor probe = x;
            auto f = [&]() { return ops::sum_squares(ops::conv2d(probe, w, b, spec)); };
            CHECK(oracle::grad_check(f, probe.data(), probe.size(), xv.grad().data(), kStep,
                                     kRtol, kAtol)
                      .pass);
        }
        {
            Tensor probe = b;
            auto f = [&]() { return ops::sum_squares(ops::conv2d(x, w, probe, spec)); };
            CHECK(oracle::grad_check(f, probe.data(), probe.size(), bv.grad().data(), kStep,
                                     kRtol, kAtol)
                      .pass);
        }
    }

    // (b) two-layer ReLU chains
    for (int i = 0; i < 30; ++i, ++trials) {
        ConvSpec s1{1, 2, 3, 3, 1, 1, PaddingMode::ReplicateSame};
        ConvSpec s2{2, 1, 3, 3, i % 2 == 0 ? 2 : 1, 1, PaddingMode::ZeroSame};
        Tensor x, w1, w2, target;
        Tensor b1 = bias_tensor(2, 0.0625f);
        Tensor b2 = bias_tensor(1);
        for (;;) {
            x = grid_random({1, 1, 6, 6}, seed += 31, 0.0f, 1.0f);
            w1 = grid_random({2, 1, 3, 3}, seed += 31, -0.5f, 0.5f);
            w2 = grid_random({1, 2, 3, 3}, seed += 31, -0.5f, 0.5f);
            const Tensor h1 = ops::conv2d(x, w1, b1, s1);
            if (relu_safe(h1, 8.0 * kStep)) {
                target = grid_random(ops::conv2d(ops::relu(h1), w2, b2, s2).shape(), seed += 31);
                break;
            }
        }
        auto forward = [&](const Tensor& w1t, const Tensor& w2t) {
            const Tensor h = ops::relu(ops::conv2d(x, w1t, b1, s1));
            return ops::sum_squares(ops::sub(ops::conv2d(h, w2t, b2, s2), target));
        };

        ag::Value w1v = ag::leaf(w1, true);
        ag::Value w2v = ag::leaf(w2, true);
        ag::Value h = ag::relu(ag::conv2d(ag::leaf(x), w1v, ag::leaf(b1), s1));
        ag::Value out = ag::conv2d(h, w2v, ag::leaf(b2), s2);
        ag::backward(ag::sum_squares(ag::sub(out, ag::leaf(target))));

        Tensor p1 = w1;
        auto f1 = [&]() { return forward(p1, w2); };
        CHECK(oracle::grad_check(f1, p1.data(), p1.size(), w1v.grad().data(), kStep, kRtol, kAtol)
                  .pass);
        Tensor p2 = w2;
        auto f2 = [&]() { return forward(w1, p2); };
        CHECK(oracle::grad_check(f2, p2.data(), p2.size(), w2v.grad().data(), kStep, kRtol, kAtol)
                  .pass);
    }

    // (c) total variation through a weave
    for (int i = 0; i < 20; ++i, ++trials) {
        Tensor known = grid_random({1, 1, 4, 6}, seed += 31, 0.0f, 1.0f);
        Tensor pred = grid_random({1, 1, 4, 6}, seed += 31, 0.0f, 1.0f);

        ag::Value pv = ag::leaf(pred, true);
        ag::backward(ag::total_variation(ag::weave_rows(ag::leaf(known), pv)));

        Tensor probe = pred;
        auto f = [&]() { return ops::total_variation(ops::weave_rows(known, probe)); };
        CHECK(oracle::grad_check(f, probe.data(), probe.size(), pv.grad().data(), kStep, kRtol,
                                 kAtol)
                  .pass);
    }

    // (d) elementwise compositions
    for (int i = 0; i < 14; ++i, ++trials) {
        Tensor a = grid_random({1, 1, 5, 5}, seed += 31);
        Tensor b = grid_random({1, 1, 5, 5}, seed += 31);
        ag::Value av = ag::leaf(a, true);
        ag::Value loss = ag::add(ag::sum_squares(ag::mul(av, ag::leaf(b))),
                                 ag::scale(ag::sum(ag::sub(av, ag::leaf(b))), 0.25));
        ag::backward(loss);

        Tensor probe = a;
        auto f = [&]() {
            return ops::sum_squares(ops::mul(probe, b)) + 0.25 * ops::sum(ops::sub(probe, b));
        };
        CHECK(oracle::grad_check(f, probe.data(), probe.size(), av.grad().data(), kStep, kRtol,
                                 kAtol)
                  .pass);
    }

    CHECK(trials >= 100);
}

TEST_CASE("gradient accumulates over reused values") {
    Tensor t = grid_random({1, 1, 3, 3}, 7);
    ag::Value x = ag::leaf(t, true);
    ag::Value y = ag::add(x, x);
    ag::backward(ag::sum(y));
    const Tensor g = x.grad();
    for (std::int64_t i = 0; i < g.size(); ++i) CHECK(g.data()[i] == 2.0f);
}
