#pragma once

// Toy cooperative environments with heterogeneous optimal roles. Both emit
// agent-index-free observations: every agent sees the identical vector
// (constellation centroid plus relative layouts), so a policy that cannot
// condition on identity is forced to act identically across agents. The gap
// between role-specialized and identical-action play is what the training
// schemes are measured on.
//
// hetero_spread: 4 agents on a 7x7 grid, 4 landmark cells, 5 discrete moves.
//   reward = (landmarks covered by exactly one agent)/4 - 0.1 * colliding pairs
// hetero_reach: 3 point masses, 3 unit-circle targets, 2d velocity actions.
//   reward = -mean over targets of distance to nearest agent
//            - 0.25 * agent pairs closer than 0.1

#include <memory>
#include <string>
#include <vector>

#include "kaleido/rng.hpp"

namespace kaleido {

struct EnvSpec {
    std::string name;
    int n_agents = 0;
    int obs_dim = 0;
    int state_dim = 0;
    bool discrete = true;
    int n_actions = 0;  // discrete action count per agent
    int act_dim = 0;    // continuous action dims per agent
    int episode_limit = 0;
};

struct JointAction {
    std::vector<int> discrete;       // [n_agents]
    std::vector<double> continuous;  // [n_agents * act_dim]
};

struct StepResult {
    std::vector<std::vector<double>> obs;  // [agent][obs_dim]
    std::vector<double> state;
    double reward = 0.0;
    bool done = false;
    int t = 0;
};

class Env {
public:
    virtual ~Env() = default;
    virtual const EnvSpec& spec() const = 0;
    virtual StepResult reset(RngStream& rng) = 0;
    virtual StepResult step(const JointAction& a) = 0;
};

std::unique_ptr<Env> make_env(const std::string& name);

// Full-episode return of a hand-scripted role-assigned policy, rolled out
// through the real dynamics. A ceiling estimate for learned policies.
double oracle_return(const std::string& name);

// Exact best return on hetero_spread when all agents are constrained to take
// the same action every step: dynamic program over reachable configurations.
double identical_action_bound_spread();

}  // namespace kaleido
