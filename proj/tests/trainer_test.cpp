#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "kaleido/config.hpp"
#include "kaleido/trainer_matd3.hpp"
#include "kaleido/trainer_qmix.hpp"

using namespace kaleido;

namespace {

RunConfig qmix_cfg(const std::string& scheme) {
    RunConfig cfg;
    cfg.env = "hetero_spread";
    cfg.trainer = "qmix";
    cfg.scheme = scheme;
    cfg.total_steps = 20000;
    cfg.batch_size = 32;
    cfg.warmup_steps = 120;
    resolve_config(cfg);
    return cfg;
}

RunConfig matd3_cfg(const std::string& scheme) {
    RunConfig cfg;
    cfg.env = "hetero_reach";
    cfg.trainer = "matd3";
    cfg.scheme = scheme;
    cfg.total_steps = 20000;
    cfg.batch_size = 32;
    cfg.warmup_steps = 120;
    cfg.matd3_hidden = 32;
    resolve_config(cfg);
    return cfg;
}

bool is_threshold_name(const std::string& name) {
    const size_t p = name.rfind(".s");
    if (p == std::string::npos || p + 2 >= name.size()) return false;
    size_t q = p + 2;
    while (q < name.size() && std::isdigit(static_cast<unsigned char>(name[q]))) ++q;
    return q > p + 2 && name.compare(q, 2, ".m") == 0;
}

size_t count_with_prefix(const ParamStore<double>& store, const std::string& prefix) {
    size_t n = 0;
    for (const auto& [name, e] : store)
        if (name.rfind(prefix, 0) == 0) n += e.value.size();
    return n;
}

template <class Store>
bool stores_equal_except_thresholds(const Store& a, const Store& b) {
    for (const auto& [name, ea] : a) {
        if (is_threshold_name(name)) continue;
        if (!b.has(name)) return false;
        const auto& vb = b.value(name);
        if (ea.value.rows != vb.rows || ea.value.cols != vb.cols) return false;
        for (size_t i = 0; i < ea.value.size(); ++i)
            if (ea.value.v[i] != vb.v[i]) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("qmix training is bit-reproducible for matching configs and seeds") {
    const RunConfig cfg = qmix_cfg("kaleidoscope");
    QmixTrainer<double> a(cfg, 7);
    QmixTrainer<double> b(cfg, 7);
    for (int t = 0; t < 200; ++t) {
        a.step();
        b.step();
        REQUIRE(a.last_action().discrete == b.last_action().discrete);
    }
    const TrainSnapshot sa = a.metrics();
    const TrainSnapshot sb = b.metrics();
    CHECK(sa.td_loss == sb.td_loss);
    CHECK(sa.div_loss == sb.div_loss);
    CHECK(sa.sparsity == sb.sparsity);
    CHECK(sa.mean_hamming == sb.mean_hamming);
    CHECK(sa.flops_fwd == sb.flops_fwd);
    CHECK(a.eval_return() == b.eval_return());
    for (const auto& [name, e] : a.store()) {
        const auto& vb = b.store().value(name);
        for (size_t i = 0; i < e.value.size(); ++i) REQUIRE(e.value.v[i] == vb.v[i]);
    }
}

TEST_CASE("different seeds produce different qmix trajectories") {
    const RunConfig cfg = qmix_cfg("fups");
    QmixTrainer<double> a(cfg, 1);
    QmixTrainer<double> b(cfg, 2);
    bool diverged = false;
    for (int t = 0; t < 50 && !diverged; ++t) {
        a.step();
        b.step();
        diverged = a.last_action().discrete != b.last_action().discrete;
    }
    CHECK(diverged);
}

TEST_CASE("hard masks at a deeply negative threshold reproduce the shared baseline") {
    // With sigmoid(-40) ~ 4e-18 every weight magnitude clears the cutoff, all
    // masks are ones, and multiplying by one is exact, so action sequences and
    // learned values must match the plain shared network bit for bit.
    RunConfig masked = qmix_cfg("kaleidoscope");
    masked.mask_mode = "hard";
    masked.threshold_init = -40.0;
    const RunConfig plain = qmix_cfg("fups");
    QmixTrainer<double> a(masked, 11);
    QmixTrainer<double> b(plain, 11);
    for (int t = 0; t < 600; ++t) {
        a.step();
        b.step();
        REQUIRE(a.last_action().discrete == b.last_action().discrete);
    }
    CHECK(a.mask_stats().overall == doctest::Approx(0.0));
    for (const auto& [name, e] : a.store()) {
        if (is_threshold_name(name)) continue;
        const auto& vb = b.store().value(name);
        for (size_t i = 0; i < e.value.size(); ++i) REQUIRE(e.value.v[i] == vb.v[i]);
    }
}

TEST_CASE("separate stores hold one network copy per agent") {
    const RunConfig none = qmix_cfg("nops");
    const RunConfig shared = qmix_cfg("fups");
    QmixTrainer<double> a(none, 0);
    QmixTrainer<double> b(shared, 0);
    std::array<size_t, 4> per_agent{};
    for (int i = 0; i < 4; ++i)
        per_agent[static_cast<size_t>(i)] =
            count_with_prefix(a.store(), "agent.a" + std::to_string(i) + ".");
    CHECK(per_agent[0] > 0);
    CHECK(per_agent[0] == per_agent[1]);
    CHECK(per_agent[0] == per_agent[2]);
    CHECK(per_agent[0] == per_agent[3]);
    CHECK(count_with_prefix(a.store(), "agent.") == 4 * per_agent[0]);
    CHECK(count_with_prefix(b.store(), "agent.") == per_agent[0]);
    CHECK(count_with_prefix(a.store(), "mixer.") == count_with_prefix(b.store(), "mixer."));
}

TEST_CASE("appending one-hot agent ids widens the input layer") {
    QmixTrainer<double> with_id(qmix_cfg("fups_id"), 0);
    QmixTrainer<double> without(qmix_cfg("fups"), 0);
    CHECK(with_id.store().value("agent.w1").rows == 20);
    CHECK(without.store().value("agent.w1").rows == 16);
}

TEST_CASE("warmup exploration spreads across the whole action set") {
    RunConfig cfg = qmix_cfg("fups");
    cfg.warmup_steps = 2000;  // keep every step purely exploratory
    QmixTrainer<double> tr(cfg, 3);
    std::array<int, 5> counts{};
    const int steps = 512;
    for (int t = 0; t < steps; ++t) {
        tr.step();
        for (int a : tr.last_action().discrete) {
            REQUIRE(a >= 0);
            REQUIRE(a < 5);
            ++counts[static_cast<size_t>(a)];
        }
    }
    const double total = 4.0 * steps;
    for (int c : counts) {
        const double freq = c / total;
        CHECK(freq > 0.15);
        CHECK(freq < 0.25);
    }
}

TEST_CASE("diversity regularization moves thresholds but not shared weights") {
    // Both schemes see identical data streams while epsilon stays saturated,
    // and the regularizer only ever writes to threshold gradients. Gradient
    // updates land at steps 130 and 140; the second one is the first where the
    // threshold vectors of the two runs can differ, while the weight updates
    // still consumed identical threshold values, so weights stay bit-equal.
    RunConfig with_reg = qmix_cfg("kaleidoscope");
    RunConfig no_reg = qmix_cfg("kaleido_no_reg");
    with_reg.eps_anneal_steps = 1000000000;
    no_reg.eps_anneal_steps = 1000000000;
    QmixTrainer<double> a(with_reg, 5);
    QmixTrainer<double> b(no_reg, 5);
    for (int t = 0; t < 145; ++t) {
        a.step();
        b.step();
        REQUIRE(a.last_action().discrete == b.last_action().discrete);
    }
    CHECK(stores_equal_except_thresholds(a.store(), b.store()));
    bool threshold_diff = false;
    for (const auto& [name, e] : a.store()) {
        if (!is_threshold_name(name)) continue;
        const auto& vb = b.store().value(name);
        for (size_t i = 0; i < e.value.size() && !threshold_diff; ++i)
            threshold_diff = e.value.v[i] != vb.v[i];
    }
    CHECK(threshold_diff);
}

TEST_CASE("frozen random masks never change during training") {
    RunConfig cfg = qmix_cfg("kaleido_fixed_mask");
    QmixTrainer<double> tr(cfg, 9);
    tr.step();
    const TrainSnapshot before = tr.metrics();
    CHECK(before.sparsity > 0.0);
    CHECK(before.sparsity < 0.5);
    CHECK(before.mean_hamming > 0.0);
    for (int t = 0; t < 200; ++t) tr.step();
    const TrainSnapshot after = tr.metrics();
    CHECK(after.sparsity == before.sparsity);
    CHECK(after.mean_hamming == before.mean_hamming);
    CHECK(after.flops_fwd == before.flops_fwd);
}

TEST_CASE("unmasked schemes refuse mask statistics") {
    QmixTrainer<double> tr(qmix_cfg("fups"), 0);
    CHECK_THROWS_AS(tr.mask_stats(), std::logic_error);
}

TEST_CASE("learned masks drift apart over the course of training") {
    RunConfig cfg = qmix_cfg("kaleidoscope");
    // Start the cutoff near the weight-init scale so mask bits can flip
    // within a short run.
    cfg.threshold_init = -2.5;
    QmixTrainer<float> tr(cfg, 3);
    const double h0 = tr.mask_stats().mean_hamming;
    CHECK(h0 == 0.0);
    for (int t = 0; t < 6000; ++t) tr.step();
    CHECK(tr.mask_stats().mean_hamming > h0);
}

TEST_CASE("qmix training drives the td loss to a finite value") {
    RunConfig cfg = qmix_cfg("kaleidoscope");
    QmixTrainer<double> tr(cfg, 13);
    for (int t = 0; t < 400; ++t) tr.step();
    const TrainSnapshot s = tr.metrics();
    CHECK(std::isfinite(s.td_loss));
    CHECK(s.td_loss > 0.0);
    CHECK(std::isfinite(s.div_loss));
    CHECK(s.sparsity >= 0.0);
    CHECK(s.sparsity <= 1.0);
    CHECK(s.mean_hamming >= 0.0);
    CHECK(s.mean_hamming <= 1.0);
    CHECK(s.flops_fwd > 0);
    CHECK(std::isfinite(tr.eval_return()));
}

TEST_CASE("matd3 training is bit-reproducible and emits bounded actions") {
    const RunConfig cfg = matd3_cfg("kaleidoscope");
    Matd3Trainer<double> a(cfg, 4);
    Matd3Trainer<double> b(cfg, 4);
    for (int t = 0; t < 200; ++t) {
        a.step();
        b.step();
        REQUIRE(a.last_action().continuous == b.last_action().continuous);
        for (double v : a.last_action().continuous) {
            REQUIRE(std::isfinite(v));
            REQUIRE(v >= -1.0);
            REQUIRE(v <= 1.0);
        }
        REQUIRE(a.last_action().continuous.size() == 6);
    }
    const TrainSnapshot sa = a.metrics();
    const TrainSnapshot sb = b.metrics();
    CHECK(sa.td_loss == sb.td_loss);
    CHECK(sa.div_loss == sb.div_loss);
    CHECK(sa.sparsity == sb.sparsity);
    CHECK(std::isfinite(sa.td_loss));
    CHECK(a.eval_return() == b.eval_return());
}

TEST_CASE("matd3 ensemble size follows the scheme") {
    // Schemes with the masked critic ensemble share one critic body across
    // ensemble_k threshold sets; the others keep two independent critics.
    const RunConfig ens = matd3_cfg("kaleidoscope");
    const RunConfig twin = matd3_cfg("fups");
    Matd3Trainer<double> a(ens, 0);
    Matd3Trainer<double> b(twin, 0);
    CHECK(a.critic_store().has("critic.s1.m4"));
    CHECK_FALSE(a.critic_store().has("critic.m0.w1"));
    CHECK(b.critic_store().has("critic.m0.w1"));
    CHECK(b.critic_store().has("critic.m1.w1"));
    CHECK_FALSE(b.critic_store().has("critic.m2.w1"));
}

TEST_CASE("matd3 actor ids widen only the fups_id actor input") {
    Matd3Trainer<double> with_id(matd3_cfg("fups_id"), 0);
    Matd3Trainer<double> without(matd3_cfg("fups"), 0);
    CHECK(with_id.actor_store().value("actor.w1").rows == 15);
    CHECK(without.actor_store().value("actor.w1").rows == 12);
}
