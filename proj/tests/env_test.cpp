#include "doctest.h"

#include <cmath>
#include <vector>

#include "kaleido/env.hpp"
#include "kaleido/rng.hpp"

using namespace kaleido;

namespace {

JointAction spread_action(int a0, int a1, int a2, int a3) {
    JointAction a;
    a.discrete = {a0, a1, a2, a3};
    return a;
}

JointAction reach_action(std::vector<double> v) {
    JointAction a;
    a.continuous = std::move(v);
    return a;
}

constexpr int kStay = 0, kUp = 1, kDown = 2, kLeft = 3, kRight = 4;

}  // namespace

TEST_CASE("grid env resets identically regardless of seed history") {
    auto env1 = make_env("hetero_spread");
    auto env2 = make_env("hetero_spread");
    RngStream r1(1, "env"), r2(999, "env");
    const StepResult a = env1->reset(r1);
    const StepResult b = env2->reset(r2);
    CHECK(a.state == b.state);
    CHECK(a.obs == b.obs);
    CHECK_FALSE(a.done);
}

TEST_CASE("grid env dimensions follow its construction") {
    auto env = make_env("hetero_spread");
    const EnvSpec& s = env->spec();
    CHECK(s.n_agents == 4);
    CHECK(s.obs_dim == 2 * (4 + 3) + 2);  // centroid + landmarks + other agents
    CHECK(s.obs_dim == 16);
    CHECK(s.state_dim == 16);
    CHECK(s.discrete);
    CHECK(s.n_actions == 5);
    CHECK(s.episode_limit == 25);

    RngStream rng(0, "env");
    const StepResult r = env->reset(rng);
    CHECK(static_cast<int>(r.state.size()) == s.state_dim);
    REQUIRE(static_cast<int>(r.obs.size()) == s.n_agents);
    for (const auto& o : r.obs) CHECK(static_cast<int>(o.size()) == s.obs_dim);
}

TEST_CASE("every agent sees the identical observation vector") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    RngStream act(5, "exploration");
    for (int t = 0; t < 10; ++t) {
        const StepResult r = env->step(
            spread_action(act.uniform_int(5), act.uniform_int(5), act.uniform_int(5), act.uniform_int(5)));
        for (int i = 1; i < 4; ++i) CHECK(r.obs[0] == r.obs[i]);
    }
}

TEST_CASE("grid rewards trace the crafted convergence sequence exactly") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    // Starts (1,1),(5,1),(5,5),(1,5); everyone funnels onto the empty center
    // cell (3,3), pairing up on the way in.
    CHECK(env->step(spread_action(kRight, kLeft, kLeft, kRight)).reward == doctest::Approx(0.0));
    CHECK(env->step(spread_action(kRight, kLeft, kLeft, kRight)).reward == doctest::Approx(-0.2));
    CHECK(env->step(spread_action(kUp, kUp, kDown, kDown)).reward == doctest::Approx(-0.2));
    CHECK(env->step(spread_action(kUp, kUp, kDown, kDown)).reward == doctest::Approx(-0.6));
}

TEST_CASE("a lone agent on a landmark earns exactly one quarter") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    // Agent 0 walks (1,1) -> (3,1) -> (3,2); (3,2) is a landmark and nobody
    // else moves off their corner.
    CHECK(env->step(spread_action(kRight, kStay, kStay, kStay)).reward == doctest::Approx(0.0));
    CHECK(env->step(spread_action(kRight, kStay, kStay, kStay)).reward == doctest::Approx(0.0));
    CHECK(env->step(spread_action(kUp, kStay, kStay, kStay)).reward == doctest::Approx(0.25));
}

TEST_CASE("sharing a non-landmark cell costs one collision pair") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    // Agent 0 walks four cells right onto agent 1's corner (5,1).
    for (int t = 0; t < 3; ++t)
        CHECK(env->step(spread_action(kRight, kStay, kStay, kStay)).reward == doctest::Approx(0.0));
    CHECK(env->step(spread_action(kRight, kStay, kStay, kStay)).reward == doctest::Approx(-0.1));
}

TEST_CASE("grid rewards always stay inside their bounds") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    RngStream act(7, "exploration");
    for (int ep = 0; ep < 8; ++ep) {
        env->reset(rng);
        for (int t = 0; t < 25; ++t) {
            const StepResult r = env->step(
                spread_action(act.uniform_int(5), act.uniform_int(5), act.uniform_int(5), act.uniform_int(5)));
            CHECK(r.reward >= -0.6);
            CHECK(r.reward <= 1.0);
        }
    }
}

TEST_CASE("episodes end exactly at the step limit") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    for (int t = 1; t <= 25; ++t) {
        const StepResult r = env->step(spread_action(kStay, kStay, kStay, kStay));
        CHECK(r.done == (t == 25));
        CHECK(r.t == t);
    }
}

TEST_CASE("malformed joint actions are rejected") {
    auto env = make_env("hetero_spread");
    RngStream rng(0, "env");
    env->reset(rng);
    JointAction too_few;
    too_few.discrete = {0, 0};
    CHECK_THROWS(env->step(too_few));
    CHECK_THROWS(env->step(spread_action(0, 0, 0, 7)));

    auto reach = make_env("hetero_reach");
    reach->reset(rng);
    JointAction wrong;
    wrong.continuous = {0.0, 0.0};
    CHECK_THROWS(reach->step(wrong));
}

TEST_CASE("unknown environment names are rejected") {
    CHECK_THROWS(make_env("no_such_env"));
}

TEST_CASE("point-mass env starts all agents at the origin with unit-circle targets") {
    auto env = make_env("hetero_reach");
    const EnvSpec& s = env->spec();
    CHECK(s.n_agents == 3);
    CHECK(s.obs_dim == 12);
    CHECK_FALSE(s.discrete);
    CHECK(s.act_dim == 2);

    RngStream rng(0, "env");
    env->reset(rng);
    // All three agents sitting on the origin: every target is distance 1 from
    // its nearest agent, and all three agent pairs collide.
    const StepResult r = env->step(reach_action({0, 0, 0, 0, 0, 0}));
    CHECK(r.reward == doctest::Approx(-1.0 - 0.25 * 3).epsilon(1e-12));
}

TEST_CASE("one agent reaching a target leaves two uncovered and one colliding pair") {
    auto env = make_env("hetero_reach");
    RngStream rng(0, "env");
    env->reset(rng);
    StepResult r;
    for (int t = 0; t < 10; ++t) r = env->step(reach_action({0.0, 1.0, 0, 0, 0, 0}));
    // Agent 0 sits exactly on (0,1); the others cover their targets at
    // distance 1 while colliding with each other at the origin.
    CHECK(r.reward == doctest::Approx(-(0.0 + 1.0 + 1.0) / 3.0 - 0.25).epsilon(1e-9));
}

TEST_CASE("velocity commands are clipped to the unit box") {
    auto env = make_env("hetero_reach");
    RngStream rng(0, "env");
    env->reset(rng);
    const StepResult r = env->step(reach_action({50.0, 0.0, 0, 0, 0, 0}));
    // An oversized command still moves at most dt * 1.
    CHECK(r.state[0] == doctest::Approx(0.1 / 2.0).epsilon(1e-12));  // x normalized by the arena bound
}

TEST_CASE("scripted role assignment on the grid earns its frozen return") {
    CHECK(oracle_return("hetero_spread") == doctest::Approx(23.0).epsilon(1e-12));
}

TEST_CASE("scripted spreading in the plane earns its frozen return") {
    CHECK(oracle_return("hetero_reach") == doctest::Approx(-3.8571341075).epsilon(1e-6));
}

TEST_CASE("identical-action play caps the grid return far below the oracle") {
    const double bound = identical_action_bound_spread();
    CHECK(bound == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(bound < oracle_return("hetero_spread"));
}

TEST_CASE("same action sequence reproduces the same trajectory") {
    auto run = [] {
        auto env = make_env("hetero_spread");
        RngStream rng(3, "env");
        env->reset(rng);
        RngStream act(11, "exploration");
        std::vector<double> trace;
        for (int t = 0; t < 25; ++t) {
            const StepResult r = env->step(
                spread_action(act.uniform_int(5), act.uniform_int(5), act.uniform_int(5), act.uniform_int(5)));
            trace.push_back(r.reward);
            trace.insert(trace.end(), r.state.begin(), r.state.end());
        }
        return trace;
    };
    CHECK(run() == run());
}
