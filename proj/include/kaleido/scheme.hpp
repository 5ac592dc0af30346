#pragma once

// Parameter-sharing schemes. Baselines: nops (one network per agent), fups
// (one shared network), fups_id (shared network, one-hot agent id appended to
// the input). The kaleidoscope family shares one network and differentiates
// agents through learned threshold masks; the ablation variants switch off
// one ingredient each.

#include <stdexcept>
#include <string>

#include "kaleido/masking.hpp"
#include "kaleido/networks.hpp"

namespace kaleido {

struct SchemeSpec {
    std::string name;
    bool per_agent_store = false;  // nops
    bool id_input = false;         // fups_id
    WeightStyle style = WeightStyle::plain;  // agent/actor weight formation
    MaskGranularity gran = MaskGranularity::weight;
    bool diversity = false;
    bool resets = false;
    bool critic_ensemble = false;  // matd3 only; qmix has no critics

    bool masked() const { return style != WeightStyle::plain; }
};

inline SchemeSpec build_scheme(const std::string& name, const std::string& mask_mode) {
    const WeightStyle learned = mask_mode == "hard" ? WeightStyle::hard : WeightStyle::soft;
    SchemeSpec s;
    s.name = name;
    if (name == "nops") {
        s.per_agent_store = true;
    } else if (name == "fups") {
    } else if (name == "fups_id") {
        s.id_input = true;
    } else if (name == "kaleidoscope") {
        s.style = learned;
        s.diversity = s.resets = s.critic_ensemble = true;
    } else if (name == "kaleido_fixed_mask") {
        s.style = WeightStyle::fixed;
        s.critic_ensemble = true;
    } else if (name == "kaleido_neuron_mask") {
        s.style = learned;
        s.gran = MaskGranularity::neuron;
        s.diversity = s.resets = s.critic_ensemble = true;
    } else if (name == "kaleido_no_reg") {
        s.style = learned;
        s.resets = s.critic_ensemble = true;
    } else if (name == "kaleido_no_reset") {
        s.style = learned;
        s.diversity = s.critic_ensemble = true;
    } else if (name == "kaleido_no_ce") {
        s.style = learned;
        s.diversity = s.resets = true;
    } else {
        throw std::invalid_argument("build_scheme: unknown scheme " + name);
    }
    return s;
}

}  // namespace kaleido
