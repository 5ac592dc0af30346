#pragma once

// Flat ring-buffer replay. Transitions are stored in double regardless of the
// training precision so the buffer contents never depend on the compute type;
// trainers cast when assembling batches.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kaleido/rng.hpp"

namespace kaleido {

struct Transition {
    std::vector<double> obs;        // [n_agents * obs_dim]
    std::vector<double> next_obs;   // [n_agents * obs_dim]
    std::vector<double> state;      // [state_dim]
    std::vector<double> next_state; // [state_dim]
    std::vector<int> actions;       // discrete, [n_agents]
    std::vector<double> cont_actions;  // continuous, [n_agents * act_dim]
    double reward = 0.0;
    bool done = false;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
        data_.reserve(capacity);
    }

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
        ++total_pushed_;
    }

    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    size_t cursor() const { return cursor_; }
    uint64_t total_pushed() const { return total_pushed_; }

    const Transition& at(size_t i) const { return data_.at(i); }

    // uniform with replacement; requires at least n stored transitions
    std::vector<size_t> sample_indices(size_t n, RngStream& rng) const {
        if (data_.size() < n)
            throw std::logic_error("ReplayBuffer: batch of " + std::to_string(n) +
                                   " requested but only " + std::to_string(data_.size()) + " stored");
        std::vector<size_t> idx(n);
        for (auto& i : idx) i = static_cast<size_t>(rng.uniform_int(static_cast<int>(data_.size())));
        return idx;
    }

private:
    size_t capacity_;
    size_t cursor_ = 0;
    uint64_t total_pushed_ = 0;
    std::vector<Transition> data_;
};

}  // namespace kaleido
