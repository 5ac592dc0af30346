#pragma once

// Named parameter collection with per-entry Adam moments. std::map keeps
// iteration order sorted by name, which makes optimizer sweeps and target
// copies deterministic.

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "kaleido/tensor.hpp"

namespace kaleido {

template <class T>
struct ParamEntry {
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
};

template <class T>
class ParamStore {
public:
    void add(const std::string& name, Tensor<T> init) {
        if (entries_.count(name)) throw std::invalid_argument("ParamStore::add: duplicate name " + name);
        ParamEntry<T> e;
        e.grad = Tensor<T>(init.rows, init.cols);
        e.m = Tensor<T>(init.rows, init.cols);
        e.v = Tensor<T>(init.rows, init.cols);
        e.value = std::move(init);
        entries_.emplace(name, std::move(e));
    }

    bool has(const std::string& name) const { return entries_.count(name) != 0; }

    Tensor<T>& value(const std::string& name) { return entry(name).value; }
    const Tensor<T>& value(const std::string& name) const { return entry(name).value; }
    Tensor<T>& grad(const std::string& name) { return entry(name).grad; }

    ParamEntry<T>& entry(const std::string& name) {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
        return it->second;
    }
    const ParamEntry<T>& entry(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
        return it->second;
    }

    void zero_grads() {
        for (auto& [name, e] : entries_) e.grad.zero();
    }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& [name, e] : entries_) n += e.value.size();
        return n;
    }

    int64_t adam_steps() const { return step_; }

    // One Adam step over every entry from the accumulated grads.
    // beta1=0.9, beta2=0.999, eps=1e-8, bias-corrected.
    void adam_step(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8)) {
        ++step_;
        const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(step_));
        for (auto& [name, e] : entries_) {
            const size_t n = e.value.size();
            for (size_t i = 0; i < n; ++i) {
                const T g = e.grad.v[i];
                e.m.v[i] = beta1 * e.m.v[i] + (T(1) - beta1) * g;
                e.v.v[i] = beta2 * e.v.v[i] + (T(1) - beta2) * g * g;
                const T mhat = e.m.v[i] / static_cast<T>(bc1);
                const T vhat = e.v.v[i] / static_cast<T>(bc2);
                e.value.v[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    // Snapshot of values only (targets); moments are not copied.
    std::map<std::string, Tensor<T>> snapshot() const {
        std::map<std::string, Tensor<T>> out;
        for (const auto& [name, e] : entries_) out.emplace(name, e.value);
        return out;
    }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    std::map<std::string, ParamEntry<T>> entries_;
    int64_t step_ = 0;
};

// Central finite differences of f with respect to one store entry.
// Test oracle: f must recompute its scalar output from the store on each call.
template <class T>
Tensor<T> finite_difference_gradient(ParamStore<T>& store, const std::string& name,
                                     const std::function<double()>& f, double eps) {
    Tensor<T>& p = store.value(name);
    Tensor<T> g(p.rows, p.cols);
    for (size_t i = 0; i < p.v.size(); ++i) {
        const T saved = p.v[i];
        p.v[i] = saved + static_cast<T>(eps);
        const double up = f();
        p.v[i] = saved - static_cast<T>(eps);
        const double down = f();
        p.v[i] = saved;
        g.v[i] = static_cast<T>((up - down) / (2.0 * eps));
    }
    return g;
}

}  // namespace kaleido
