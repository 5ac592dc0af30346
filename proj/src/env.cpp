#include "kaleido/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace kaleido {

namespace {

// --- hetero_spread -----------------------------------------------------------

constexpr int kGrid = 7;
constexpr int kSpreadAgents = 4;
constexpr int kSpreadLimit = 25;
constexpr std::array<std::array<int, 2>, 4> kSpreadStarts{{{1, 1}, {5, 1}, {5, 5}, {1, 5}}};
constexpr std::array<std::array<int, 2>, 4> kSpreadLandmarks{{{3, 2}, {2, 3}, {3, 4}, {4, 3}}};

int clamp_grid(int x) { return std::max(0, std::min(kGrid - 1, x)); }

void apply_move(int& x, int& y, int action) {
    switch (action) {
        case 0: break;
        case 1: y = clamp_grid(y + 1); break;
        case 2: y = clamp_grid(y - 1); break;
        case 3: x = clamp_grid(x - 1); break;
        case 4: x = clamp_grid(x + 1); break;
        default: throw std::invalid_argument("hetero_spread: action out of range");
    }
}

double spread_reward(const std::array<std::array<int, 2>, 4>& pos) {
    int covered = 0;
    for (const auto& lm : kSpreadLandmarks) {
        int on = 0;
        for (const auto& p : pos)
            if (p[0] == lm[0] && p[1] == lm[1]) ++on;
        if (on == 1) ++covered;
    }
    int pairs = 0;
    for (int i = 0; i < kSpreadAgents; ++i)
        for (int j = i + 1; j < kSpreadAgents; ++j)
            if (pos[i] == pos[j]) ++pairs;
    return static_cast<double>(covered) / kSpreadAgents - 0.1 * pairs;
}

class HeteroSpread final : public Env {
public:
    HeteroSpread() {
        spec_.name = "hetero_spread";
        spec_.n_agents = kSpreadAgents;
        spec_.obs_dim = 16;
        spec_.state_dim = 16;
        spec_.discrete = true;
        spec_.n_actions = 5;
        spec_.act_dim = 0;
        spec_.episode_limit = kSpreadLimit;
    }

    const EnvSpec& spec() const override { return spec_; }

    StepResult reset(RngStream&) override {
        pos_ = kSpreadStarts;
        t_ = 0;
        return observe(0.0);
    }

    StepResult step(const JointAction& a) override {
        if (static_cast<int>(a.discrete.size()) != kSpreadAgents)
            throw std::invalid_argument("hetero_spread: expected 4 discrete actions");
        for (int i = 0; i < kSpreadAgents; ++i) apply_move(pos_[i][0], pos_[i][1], a.discrete[i]);
        ++t_;
        return observe(spread_reward(pos_));
    }

private:
    StepResult observe(double reward) const {
        StepResult r;
        r.reward = reward;
        r.t = t_;
        r.done = t_ >= kSpreadLimit;
        r.state.reserve(16);
        for (const auto& p : pos_) {
            r.state.push_back((p[0] - 3.0) / 3.0);
            r.state.push_back((p[1] - 3.0) / 3.0);
        }
        for (const auto& lm : kSpreadLandmarks) {
            r.state.push_back((lm[0] - 3.0) / 3.0);
            r.state.push_back((lm[1] - 3.0) / 3.0);
        }
        double cx = 0.0, cy = 0.0;
        for (const auto& p : pos_) {
            cx += p[0];
            cy += p[1];
        }
        cx /= kSpreadAgents;
        cy /= kSpreadAgents;
        // identical for every agent: centroid offset from the board center,
        // landmarks relative to the centroid, then agents 1..3 relative to the
        // centroid in fixed order (agent 0 is implied by the centroid)
        std::vector<double> obs;
        obs.reserve(16);
        obs.push_back((cx - 3.0) / 3.0);
        obs.push_back((cy - 3.0) / 3.0);
        for (const auto& lm : kSpreadLandmarks) {
            obs.push_back((lm[0] - cx) / 3.0);
            obs.push_back((lm[1] - cy) / 3.0);
        }
        for (int i = 1; i < kSpreadAgents; ++i) {
            obs.push_back((pos_[i][0] - cx) / 3.0);
            obs.push_back((pos_[i][1] - cy) / 3.0);
        }
        r.obs.assign(kSpreadAgents, obs);
        return r;
    }

    EnvSpec spec_;
    std::array<std::array<int, 2>, 4> pos_{};
    int t_ = 0;
};

// --- hetero_reach ------------------------------------------------------------

constexpr int kReachAgents = 3;
constexpr int kReachLimit = 25;
constexpr double kReachDt = 0.1;
constexpr double kReachBound = 2.0;
constexpr double kCollideDist = 0.1;

const std::array<std::array<double, 2>, 3>& reach_targets() {
    static const std::array<std::array<double, 2>, 3> t{{
        {0.0, 1.0},
        {-std::sqrt(3.0) / 2.0, -0.5},
        {std::sqrt(3.0) / 2.0, -0.5},
    }};
    return t;
}

double reach_reward(const std::array<std::array<double, 2>, 3>& pos) {
    double dist_acc = 0.0;
    for (const auto& tg : reach_targets()) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : pos) best = std::min(best, std::hypot(tg[0] - p[0], tg[1] - p[1]));
        dist_acc += best;
    }
    int close_pairs = 0;
    for (int i = 0; i < kReachAgents; ++i)
        for (int j = i + 1; j < kReachAgents; ++j)
            if (std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]) < kCollideDist) ++close_pairs;
    return -dist_acc / kReachAgents - 0.25 * close_pairs;
}

class HeteroReach final : public Env {
public:
    HeteroReach() {
        spec_.name = "hetero_reach";
        spec_.n_agents = kReachAgents;
        spec_.obs_dim = 12;
        spec_.state_dim = 12;
        spec_.discrete = false;
        spec_.n_actions = 0;
        spec_.act_dim = 2;
        spec_.episode_limit = kReachLimit;
    }

    const EnvSpec& spec() const override { return spec_; }

    StepResult reset(RngStream&) override {
        for (auto& p : pos_) p = {0.0, 0.0};
        t_ = 0;
        return observe(0.0);
    }

    StepResult step(const JointAction& a) override {
        if (static_cast<int>(a.continuous.size()) != kReachAgents * 2)
            throw std::invalid_argument("hetero_reach: expected 6 continuous action values");
        for (int i = 0; i < kReachAgents; ++i)
            for (int d = 0; d < 2; ++d) {
                const double v = std::max(-1.0, std::min(1.0, a.continuous[static_cast<size_t>(i) * 2 + d]));
                pos_[i][d] = std::max(-kReachBound, std::min(kReachBound, pos_[i][d] + kReachDt * v));
            }
        ++t_;
        return observe(reach_reward(pos_));
    }

private:
    StepResult observe(double reward) const {
        StepResult r;
        r.reward = reward;
        r.t = t_;
        r.done = t_ >= kReachLimit;
        r.state.reserve(12);
        for (const auto& p : pos_) {
            r.state.push_back(p[0] / kReachBound);
            r.state.push_back(p[1] / kReachBound);
        }
        for (const auto& tg : reach_targets()) {
            r.state.push_back(tg[0] / kReachBound);
            r.state.push_back(tg[1] / kReachBound);
        }
        double cx = 0.0, cy = 0.0;
        for (const auto& p : pos_) {
            cx += p[0];
            cy += p[1];
        }
        cx /= kReachAgents;
        cy /= kReachAgents;
        std::vector<double> obs;
        obs.reserve(12);
        obs.push_back(cx / kReachBound);
        obs.push_back(cy / kReachBound);
        for (const auto& tg : reach_targets()) {
            obs.push_back((tg[0] - cx) / kReachBound);
            obs.push_back((tg[1] - cy) / kReachBound);
        }
        for (int i = 1; i < kReachAgents; ++i) {
            obs.push_back((pos_[i][0] - cx) / kReachBound);
            obs.push_back((pos_[i][1] - cy) / kReachBound);
        }
        r.obs.assign(kReachAgents, obs);
        return r;
    }

    EnvSpec spec_;
    std::array<std::array<double, 2>, 3> pos_{};
    int t_ = 0;
};

// --- scripted policies -------------------------------------------------------

int spread_script_action(int x, int y, int tx, int ty) {
    if (x < tx) return 4;
    if (x > tx) return 3;
    if (y < ty) return 1;
    if (y > ty) return 2;
    return 0;
}

double oracle_spread() {
    HeteroSpread env;
    RngStream rng(0, "oracle");
    env.reset(rng);
    // role assignment chosen so the four approach paths never intersect
    const std::array<int, 4> target_of{0, 3, 2, 1};
    std::array<std::array<int, 2>, 4> pos = kSpreadStarts;
    double ret = 0.0;
    for (int t = 0; t < kSpreadLimit; ++t) {
        JointAction a;
        a.discrete.resize(kSpreadAgents);
        for (int i = 0; i < kSpreadAgents; ++i) {
            const auto& lm = kSpreadLandmarks[target_of[i]];
            a.discrete[i] = spread_script_action(pos[i][0], pos[i][1], lm[0], lm[1]);
            apply_move(pos[i][0], pos[i][1], a.discrete[i]);
        }
        ret += env.step(a).reward;
    }
    return ret;
}

double oracle_reach() {
    HeteroReach env;
    RngStream rng(0, "oracle");
    env.reset(rng);
    std::array<std::array<double, 2>, 3> pos{};
    for (auto& p : pos) p = {0.0, 0.0};
    double ret = 0.0;
    for (int t = 0; t < kReachLimit; ++t) {
        JointAction a;
        a.continuous.resize(kReachAgents * 2);
        for (int i = 0; i < kReachAgents; ++i)
            for (int d = 0; d < 2; ++d) {
                const double v = std::max(-1.0, std::min(1.0, (reach_targets()[i][d] - pos[i][d]) / kReachDt));
                a.continuous[static_cast<size_t>(i) * 2 + d] = v;
                pos[i][d] += kReachDt * v;
            }
        ret += env.step(a).reward;
    }
    return ret;
}

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "hetero_spread") return std::make_unique<HeteroSpread>();
    if (name == "hetero_reach") return std::make_unique<HeteroReach>();
    throw std::invalid_argument("make_env: unknown environment " + name);
}

double oracle_return(const std::string& name) {
    if (name == "hetero_spread") return oracle_spread();
    if (name == "hetero_reach") return oracle_reach();
    throw std::invalid_argument("oracle_return: unknown environment " + name);
}

double identical_action_bound_spread() {
    using Key = std::array<int8_t, 8>;  // positions sorted as (x,y) pairs
    auto key_of = [](const std::array<std::array<int, 2>, 4>& pos) {
        std::array<std::array<int, 2>, 4> s = pos;
        std::sort(s.begin(), s.end());
        Key k{};
        for (int i = 0; i < 4; ++i) {
            k[i * 2] = static_cast<int8_t>(s[i][0]);
            k[i * 2 + 1] = static_cast<int8_t>(s[i][1]);
        }
        return k;
    };

    std::map<Key, std::array<std::array<int, 2>, 4>> layer;
    layer[key_of(kSpreadStarts)] = kSpreadStarts;
    std::vector<std::map<Key, std::array<std::array<int, 2>, 4>>> layers{layer};
    for (int t = 1; t <= kSpreadLimit; ++t) {
        std::map<Key, std::array<std::array<int, 2>, 4>> next;
        for (const auto& [k, pos] : layers.back())
            for (int a = 0; a < 5; ++a) {
                auto p = pos;
                for (auto& q : p) apply_move(q[0], q[1], a);
                next.emplace(key_of(p), p);
            }
        layers.push_back(std::move(next));
    }

    // value-to-go, walked backwards from the horizon
    std::map<Key, double> value;
    for (const auto& [k, pos] : layers[kSpreadLimit]) value[k] = 0.0;
    for (int t = kSpreadLimit - 1; t >= 0; --t) {
        std::map<Key, double> prev;
        for (const auto& [k, pos] : layers[static_cast<size_t>(t)]) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < 5; ++a) {
                auto p = pos;
                for (auto& q : p) apply_move(q[0], q[1], a);
                best = std::max(best, spread_reward(p) + value.at(key_of(p)));
            }
            prev[k] = best;
        }
        value = std::move(prev);
    }
    return value.at(key_of(kSpreadStarts));
}

}  // namespace kaleido
