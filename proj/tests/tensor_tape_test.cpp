#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "kaleido/param_store.hpp"
#include "kaleido/rng.hpp"
#include "kaleido/tape.hpp"
#include "kaleido/tensor.hpp"

using namespace kaleido;

namespace {

// Symmetric relative error with an absolute floor so near-zero pairs compare
// sensibly.
double rel_err(double a, double b) {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) / scale;
}

// Compares analytic store gradients against central differences for a scalar
// loss rebuilt from scratch on every evaluation.
double max_grad_rel_err(ParamStore<double>& store, const std::vector<std::string>& names,
                        const std::function<double()>& loss_fn) {
    double worst = 0.0;
    for (const auto& name : names) {
        const Tensor<double> fd = finite_difference_gradient(store, name, loss_fn, 1e-5);
        const Tensor<double>& an = store.grad(name);
        REQUIRE(fd.same_shape(an));
        for (size_t i = 0; i < fd.size(); ++i) worst = std::max(worst, rel_err(an.v[i], fd.v[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("matmul matches a naive triple loop on random shapes") {
    RngStream rng(11, "init");
    for (int trial = 0; trial < 20; ++trial) {
        const int m = 1 + rng.uniform_int(6), k = 1 + rng.uniform_int(6), n = 1 + rng.uniform_int(6);
        const Tensor<double> a = Tensor<double>::uniform(m, k, -2.0, 2.0, rng);
        const Tensor<double> b = Tensor<double>::uniform(k, n, -2.0, 2.0, rng);
        Tensor<double> c(m, n);
        matmul(a, b, c);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
                CHECK(std::fabs(c.at(i, j) - acc) < 1e-12);
            }
    }
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
    Tensor<double> a(2, 3), b(2, 3), c(2, 3);
    CHECK_THROWS(matmul(a, b, c));
}

TEST_CASE("linear layer with identity weights passes input through") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({1.0, 2.0}));
    Tensor<double> w(2, 2);
    w.at(0, 0) = 1.0;
    w.at(1, 1) = 1.0;
    const int wid = t.input(std::move(w));
    const int b = t.input(Tensor<double>::row({0.0, 0.0}));
    const int y = t.record_linear(x, wid, b);
    CHECK(t.value(y).at(0, 0) == 1.0);
    CHECK(t.value(y).at(0, 1) == 2.0);
}

TEST_CASE("scalar linear layer computes x*w + b") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({1.0}));
    const int w = t.input(Tensor<double>::row({3.0}));
    const int b = t.input(Tensor<double>::row({1.0}));
    const int y = t.record_linear(x, w, b);
    CHECK(t.value(y).at(0, 0) == 4.0);
}

TEST_CASE("linear layer matches the naive oracle on a random 4x8x3 case") {
    RngStream rng(21, "init");
    const Tensor<double> xv = Tensor<double>::uniform(4, 8, -1.0, 1.0, rng);
    const Tensor<double> wv = Tensor<double>::uniform(8, 3, -1.0, 1.0, rng);
    const Tensor<double> bv = Tensor<double>::uniform(1, 3, -1.0, 1.0, rng);

    GradTape<double> t;
    const int y = t.record_linear(t.input(xv), t.input(wv), t.input(bv));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = bv.at(0, j);
            for (int p = 0; p < 8; ++p) acc += xv.at(i, p) * wv.at(p, j);
            CHECK(std::fabs(t.value(y).at(i, j) - acc) < 1e-12);
        }
}

TEST_CASE("linear layer rejects bad shapes") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>(1, 3));
    const int w = t.input(Tensor<double>(2, 2));
    const int b = t.input(Tensor<double>(1, 2));
    CHECK_THROWS(t.record_linear(x, w, b));
    const int w2 = t.input(Tensor<double>(3, 2));
    const int bad_b = t.input(Tensor<double>(1, 3));
    CHECK_THROWS(t.record_linear(x, w2, bad_b));
}

TEST_CASE("relu maps [-1,0,2] to [0,0,2]") {
    GradTape<double> t;
    const int y = t.record_activation(t.input(Tensor<double>::row({-1.0, 0.0, 2.0})), Act::relu);
    CHECK(t.value(y).at(0, 0) == 0.0);
    CHECK(t.value(y).at(0, 1) == 0.0);
    CHECK(t.value(y).at(0, 2) == 2.0);
}

TEST_CASE("sigmoid at zero is one half") {
    GradTape<double> t;
    const int y = t.record_activation(t.input(Tensor<double>::row({0.0})), Act::sigmoid);
    CHECK(t.value(y).at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("tanh gradient at zero is one") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({0.0}));
    const int y = t.record_activation(x, Act::tanh);
    t.backward(t.record_sum_all(y));
    CHECK(t.grad(x).at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("layer norm maps a constant row to the bias") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({1.0, 1.0, 1.0}));
    const int g = t.input(Tensor<double>::row({2.0, 2.0, 2.0}));
    const int b = t.input(Tensor<double>::row({0.3, -0.1, 0.7}));
    const int y = t.record_layer_norm(x, g, b);
    CHECK(t.value(y).at(0, 0) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(t.value(y).at(0, 1) == doctest::Approx(-0.1).epsilon(1e-9));
    CHECK(t.value(y).at(0, 2) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("layer norm leaves a symmetric unit-variance row almost unchanged") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({-1.0, 1.0}));
    const int g = t.input(Tensor<double>::row({1.0, 1.0}));
    const int b = t.input(Tensor<double>::row({0.0, 0.0}));
    const int y = t.record_layer_norm(x, g, b);
    CHECK(t.value(y).at(0, 0) == doctest::Approx(-1.0).epsilon(1e-4));
    CHECK(t.value(y).at(0, 1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("layer norm standardizes [1,2,3]") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({1.0, 2.0, 3.0}));
    const int g = t.input(Tensor<double>::row({1.0, 1.0, 1.0}));
    const int b = t.input(Tensor<double>::row({0.0, 0.0, 0.0}));
    const int y = t.record_layer_norm(x, g, b);
    const double expected = 1.0 / std::sqrt(2.0 / 3.0 + kLayerNormEps);
    CHECK(t.value(y).at(0, 0) == doctest::Approx(-expected).epsilon(1e-9));
    CHECK(t.value(y).at(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.value(y).at(0, 2) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(expected == doctest::Approx(1.2247).epsilon(1e-4));
}

TEST_CASE("backward of w squared at w=3 gives gradient 6") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({3.0}));
    GradTape<double> t;
    const int w = t.param(store, "w");
    t.backward(t.record_sum_all(t.record_square(w)));
    CHECK(store.grad("w").at(0, 0) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward of sum(relu(w)) at [-1,2] gives [0,1]") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({-1.0, 2.0}));
    GradTape<double> t;
    const int w = t.param(store, "w");
    t.backward(t.record_sum_all(t.record_activation(w, Act::relu)));
    CHECK(store.grad("w").at(0, 0) == 0.0);
    CHECK(store.grad("w").at(0, 1) == 1.0);
}

TEST_CASE("backward rejects a non-scalar loss node") {
    GradTape<double> t;
    const int x = t.input(Tensor<double>::row({1.0, 2.0}));
    CHECK_THROWS(t.backward(x));
}

TEST_CASE("two-layer MLP MSE gradients match central differences") {
    RngStream rng(31, "init");
    ParamStore<double> store;
    store.add("w1", Tensor<double>::uniform(4, 6, -0.5, 0.5, rng));
    store.add("b1", Tensor<double>::uniform(1, 6, -0.5, 0.5, rng));
    store.add("w2", Tensor<double>::uniform(6, 2, -0.5, 0.5, rng));
    store.add("b2", Tensor<double>::uniform(1, 2, -0.5, 0.5, rng));
    const Tensor<double> x = Tensor<double>::uniform(3, 4, -1.0, 1.0, rng);
    const Tensor<double> target = Tensor<double>::uniform(3, 2, -1.0, 1.0, rng);

    auto loss_fn = [&]() {
        GradTape<double> t;
        const int h = t.record_activation(
            t.record_linear(t.constant(x), t.param(store, "w1"), t.param(store, "b1")), Act::tanh);
        const int y = t.record_linear(h, t.param(store, "w2"), t.param(store, "b2"));
        const int d = t.record_sub(y, t.constant(target));
        return t.value(t.record_mean_all(t.record_square(d))).v[0];
    };

    store.zero_grads();
    {
        GradTape<double> t;
        const int h = t.record_activation(
            t.record_linear(t.constant(x), t.param(store, "w1"), t.param(store, "b1")), Act::tanh);
        const int y = t.record_linear(h, t.param(store, "w2"), t.param(store, "b2"));
        const int d = t.record_sub(y, t.constant(target));
        t.backward(t.record_mean_all(t.record_square(d)));
    }
    CHECK(max_grad_rel_err(store, {"w1", "b1", "w2", "b2"}, loss_fn) < 1e-5);
}

TEST_CASE("every primitive op passes a randomized gradient check") {
    // One composite graph exercising linear, activations, layer norm, soft
    // threshold, row gate, mask mul, add/sub/mul/scale/abs, concat, gather,
    // rowwise bmm, and both reductions. Kinked inputs are conditioned away
    // from their kinks so central differences stay valid.
    RngStream rng(41, "init");
    for (int trial = 0; trial < 100; ++trial) {
        ParamStore<double> store;

        auto away_from = [&](int r, int c, double lo, double hi, double kink, double margin) {
            Tensor<double> t(r, c);
            for (auto& e : t.v) {
                do {
                    e = rng.uniform(lo, hi);
                } while (std::fabs(std::fabs(e) - kink) < margin);
            }
            return t;
        };

        store.add("th", away_from(4, 3, -1.0, 1.0, 0.0, 0.08));          // soft-threshold weights
        store.add("s", Tensor<double>::uniform(4, 3, -3.0, -1.0, rng));  // cuts in (0.047, 0.269)
        store.add("rw", away_from(3, 4, -1.0, 1.0, 0.0, 0.08));          // row-gate weights
        store.add("rs", Tensor<double>::uniform(3, 1, -3.0, -1.0, rng));
        store.add("w", Tensor<double>::uniform(3, 4, -1.0, 1.0, rng));
        store.add("b", Tensor<double>::uniform(1, 4, -1.0, 1.0, rng));
        store.add("g", Tensor<double>::uniform(1, 4, 0.5, 1.5, rng));
        store.add("lb", Tensor<double>::uniform(1, 4, -0.5, 0.5, rng));
        store.add("bmm_w", Tensor<double>::uniform(2, 8, -1.0, 1.0, rng));
        store.add("mix", away_from(2, 4, -1.0, 1.0, 0.0, 0.08));  // feeds relu and abs

        // Re-draw any soft-threshold pair sitting near its cutoff kink.
        for (size_t i = 0; i < store.value("th").size(); ++i) {
            double& th = store.value("th").v[i];
            const double cut = sigmoid_scalar(store.value("s").v[i]);
            while (std::fabs(std::fabs(th) - cut) < 0.05) th = rng.uniform(-1.0, 1.0);
        }
        // Keep each row-gate row's mean magnitude clear of its cutoff.
        for (int r = 0; r < 3; ++r) {
            const double cut = sigmoid_scalar(store.value("rs").at(r, 0));
            for (;;) {
                double a = 0.0;
                for (int c = 0; c < 4; ++c) a += std::fabs(store.value("rw").at(r, c));
                a /= 4.0;
                if (std::fabs(a - cut) > 0.05) break;
                for (int c = 0; c < 4; ++c) store.value("rw").at(r, c) = rng.uniform(-1.0, 1.0);
            }
        }

        Tensor<double> mask(3, 4);
        for (auto& e : mask.v) e = rng.uniform() < 0.5 ? 0.0 : 1.0;
        const Tensor<double> x = Tensor<double>::uniform(2, 3, -1.0, 1.0, rng);
        const std::vector<int> gather_idx = {rng.uniform_int(4), rng.uniform_int(4)};

        auto build = [&](GradTape<double>& t) {
            const int eff = t.record_soft_threshold(t.param(store, "th"), t.param(store, "s"));  // [4,3]
            const int gated = t.record_row_gate(t.param(store, "rw"), t.param(store, "rs"));     // [3,4]
            const int masked = t.record_mask_mul(t.param(store, "w"), mask);                     // [3,4]
            const int mixed = t.record_add(gated, masked);                                       // [3,4]
            const int h0 = t.record_linear(t.constant(x), t.record_mul(mixed, masked), t.param(store, "b"));
            const int h1 = t.record_layer_norm(h0, t.param(store, "g"), t.param(store, "lb"));  // [2,4]
            const int h2 = t.record_activation(h1, Act::tanh);                                  // [2,4]
            const int h3 = t.record_linear(h2, eff, t.constant(Tensor<double>(1, 3)));          // [2,3]
            const int h4 = t.record_activation(h3, Act::sigmoid);
            const int bm = t.record_rowwise_bmm(t.record_gather_cols(h4, {1, 0}), t.param(store, "bmm_w"),
                                                1, 8);  // [2,8]
            const int mx = t.param(store, "mix");
            const int act = t.record_concat_cols({t.record_activation(mx, Act::relu), t.record_abs(mx)});
            const int joined = t.record_concat_cols({bm, act});  // [2,16]
            const int picked = t.record_gather_cols(joined, gather_idx);
            const int spread = t.record_sub(t.record_scale(joined, 0.3), t.record_linear(picked, t.constant(Tensor<double>(1, 16, 0.1)), t.constant(Tensor<double>(1, 16))));
            return t.record_add(t.record_mean_all(t.record_square(spread)), t.record_sum_all(picked));
        };

        auto loss_fn = [&]() {
            GradTape<double> t;
            return t.value(build(t)).v[0];
        };

        store.zero_grads();
        {
            GradTape<double> t;
            t.backward(build(t));
        }
        const std::vector<std::string> names = {"th", "s", "rw", "rs", "w", "b", "g", "lb", "bmm_w", "mix"};
        const double worst = max_grad_rel_err(store, names, loss_fn);
        CHECK(worst < 1e-5);
        if (worst >= 1e-5) break;
    }
}

TEST_CASE("soft threshold forward matches its scalar definition") {
    GradTape<double> t;
    const int th = t.input(Tensor<double>::row({1.0, -1.0, 0.3}));
    Tensor<double> s(1, 3);
    s.fill(0.0);  // sigmoid 0.5
    const int y = t.record_soft_threshold(th, t.input(std::move(s)));
    CHECK(t.value(y).at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t.value(y).at(0, 1) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(t.value(y).at(0, 2) == 0.0);
}

TEST_CASE("row gate zeroes a row whose mean magnitude is below its cutoff") {
    GradTape<double> t;
    Tensor<double> th(2, 2);
    th.at(0, 0) = 0.8;
    th.at(0, 1) = -0.4;  // mean 0.6
    th.at(1, 0) = 0.01;
    th.at(1, 1) = 0.01;  // mean 0.01
    Tensor<double> s(2, 1);
    s.fill(0.0);  // cutoff 0.5
    const int y = t.record_row_gate(t.input(std::move(th)), t.input(std::move(s)));
    // Row 0 gate = 1 - 0.5/0.6; gated mean magnitude equals the 0.1 gap.
    const double gate = 1.0 - 0.5 / 0.6;
    CHECK(t.value(y).at(0, 0) == doctest::Approx(0.8 * gate).epsilon(1e-12));
    CHECK(t.value(y).at(0, 1) == doctest::Approx(-0.4 * gate).epsilon(1e-12));
    CHECK(t.value(y).at(1, 0) == 0.0);
    CHECK(t.value(y).at(1, 1) == 0.0);
}

TEST_CASE("adam step with zero gradients leaves parameters unchanged") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({1.5, -2.5}));
    store.zero_grads();
    store.adam_step(0.1);
    CHECK(store.value("w").at(0, 0) == 1.5);
    CHECK(store.value("w").at(0, 1) == -2.5);
}

TEST_CASE("first adam step moves a unit-gradient scalar by about lr") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({1.0}));
    store.zero_grads();
    store.grad("w").at(0, 0) = 1.0;
    store.adam_step(0.1);
    CHECK(store.value("w").at(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("adam drives (w-2)^2 to its minimum within 100 steps") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({0.0}));
    for (int i = 0; i < 100; ++i) {
        store.zero_grads();
        GradTape<double> t;
        const int w = t.param(store, "w");
        const int d = t.record_sub(w, t.constant(Tensor<double>::row({2.0})));
        t.backward(t.record_sum_all(t.record_square(d)));
        store.adam_step(0.1);
    }
    CHECK(std::fabs(store.value("w").at(0, 0) - 2.0) < 1e-2);
}

TEST_CASE("central differences recover the derivative of w squared") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({1.0}));
    auto f = [&]() { return store.value("w").at(0, 0) * store.value("w").at(0, 0); };
    const Tensor<double> g = finite_difference_gradient(store, "w", f, 1e-5);
    CHECK(std::fabs(g.at(0, 0) - 2.0) < 1e-8);
}

TEST_CASE("central differences of a constant are zero") {
    ParamStore<double> store;
    store.add("w", Tensor<double>::row({0.7, -0.3}));
    auto f = [&]() { return 42.0; };
    const Tensor<double> g = finite_difference_gradient(store, "w", f, 1e-5);
    CHECK(g.at(0, 0) == 0.0);
    CHECK(g.at(0, 1) == 0.0);
}

TEST_CASE("a seeded computation replays bit-identically") {
    auto run = [](std::vector<double>& values, std::vector<double>& grads) {
        RngStream rng(77, "init");
        ParamStore<double> store;
        store.add("w", Tensor<double>::uniform(5, 5, -1.0, 1.0, rng));
        store.add("s", Tensor<double>::uniform(5, 1, -4.0, -2.0, rng));
        store.zero_grads();
        GradTape<double> t;
        const int g = t.record_row_gate(t.param(store, "w"), t.param(store, "s"));
        const int y = t.record_linear(t.constant(Tensor<double>::uniform(2, 5, -1.0, 1.0, rng)), g,
                                      t.constant(Tensor<double>(1, 5)));
        t.backward(t.record_mean_all(t.record_square(y)));
        values = store.value("w").v;
        grads = store.grad("w").v;
        for (double e : store.grad("s").v) grads.push_back(e);
    };
    std::vector<double> v1, g1, v2, g2;
    run(v1, g1);
    run(v2, g2);
    CHECK(v1 == v2);
    CHECK(g1 == g2);
}

TEST_CASE("fuzzed graphs never produce non-finite values or gradients") {
    RngStream rng(55, "init");
    for (int trial = 0; trial < 50; ++trial) {
        ParamStore<double> store;
        store.add("w1", Tensor<double>::uniform(6, 8, -3.0, 3.0, rng));
        store.add("b1", Tensor<double>::uniform(1, 8, -3.0, 3.0, rng));
        store.add("g1", Tensor<double>::uniform(1, 8, -2.0, 2.0, rng));
        store.add("lb1", Tensor<double>::uniform(1, 8, -2.0, 2.0, rng));
        store.add("s1", Tensor<double>::uniform(6, 8, -8.0, 8.0, rng));
        store.zero_grads();
        GradTape<double> t;
        const int eff = t.record_soft_threshold(t.param(store, "w1"), t.param(store, "s1"));
        const int h = t.record_linear(t.constant(Tensor<double>::uniform(4, 6, -5.0, 5.0, rng)), eff,
                                      t.param(store, "b1"));
        const int n = t.record_layer_norm(h, t.param(store, "g1"), t.param(store, "lb1"));
        const Act kind = trial % 3 == 0 ? Act::relu : (trial % 3 == 1 ? Act::tanh : Act::sigmoid);
        t.backward(t.record_mean_all(t.record_square(t.record_activation(n, kind))));
        CHECK(store.grad("w1").all_finite());
        CHECK(store.grad("s1").all_finite());
        CHECK(store.grad("g1").all_finite());
        CHECK(store.grad("b1").all_finite());
    }
}
