#pragma once

// MLPs whose weight tensors live in a ParamStore under a naming convention,
// with four ways of forming effective weights:
//   plain: the shared tensor as-is
//   soft:  sign(w) * relu(|w| - sigmoid(s)), thresholds learn from the task
//          (neuron granularity gates whole rows by their mean magnitude)
//   hard:  w * 1[|w| > sigmoid(s)], thresholds learn only via the diversity
//          surrogate applied outside the tape
//   fixed: w * frozen Bernoulli mask drawn at init
// plus the monotonic value-mixing network and target-parameter helpers.
//
// Naming: "<prefix>.w<l>" / ".b<l>" weights and biases (l from 1),
// "<prefix>.g<l>" / ".lb<l>" layer-norm gain and bias, and
// "<prefix>.s<l>.m<k>" the threshold tensor of entity k at layer l.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaleido/masking.hpp"
#include "kaleido/param_store.hpp"
#include "kaleido/rng.hpp"
#include "kaleido/tape.hpp"
#include "kaleido/tensor.hpp"

namespace kaleido {

enum class WeightStyle { plain, soft, hard, fixed };

struct MlpArch {
    std::vector<int> dims;  // dims[0] input, dims.back() output
    bool layer_norm = false;
    Act hidden_act = Act::relu;
    bool tanh_head = false;

    int n_layers() const { return static_cast<int>(dims.size()) - 1; }
};

// Reads parameter values from either a live store or a target snapshot.
template <class T>
class ValueView {
public:
    ValueView(const ParamStore<T>& s) : store_(&s) {}
    ValueView(const std::map<std::string, Tensor<T>>& m) : snap_(&m) {}

    const Tensor<T>& operator()(const std::string& name) const {
        if (store_) return store_->value(name);
        auto it = snap_->find(name);
        if (it == snap_->end()) throw std::out_of_range("ValueView: unknown parameter " + name);
        return it->second;
    }

private:
    const ParamStore<T>* store_ = nullptr;
    const std::map<std::string, Tensor<T>>* snap_ = nullptr;
};

// --- no-tape building blocks (collect / eval / target paths) ---

template <class T>
Tensor<T> linear_eval(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    Tensor<T> out(x.rows, w.cols);
    matmul(x, w, out);
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += b.at(0, j);
    return out;
}

template <class T>
void activate_inplace(Tensor<T>& x, Act kind) {
    switch (kind) {
        case Act::relu:
            for (auto& e : x.v) e = e > T(0) ? e : T(0);
            break;
        case Act::tanh:
            for (auto& e : x.v) e = std::tanh(e);
            break;
        case Act::sigmoid:
            for (auto& e : x.v) e = sigmoid_scalar(e);
            break;
    }
}

template <class T>
void layer_norm_inplace(Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias) {
    for (int i = 0; i < x.rows; ++i) {
        double mean = 0.0;
        for (int j = 0; j < x.cols; ++j) mean += static_cast<double>(x.at(i, j));
        mean /= x.cols;
        double var = 0.0;
        for (int j = 0; j < x.cols; ++j) {
            const double d = static_cast<double>(x.at(i, j)) - mean;
            var += d * d;
        }
        var /= x.cols;
        const double is = 1.0 / std::sqrt(var + kLayerNormEps);
        for (int j = 0; j < x.cols; ++j)
            x.at(i, j) = static_cast<T>((static_cast<double>(x.at(i, j)) - mean) * is) * gain.at(0, j) + bias.at(0, j);
    }
}

template <class T>
Tensor<T> id_encode(int n, int i) {
    if (i < 0 || i >= n) throw std::out_of_range("id_encode: index out of range");
    Tensor<T> t(1, n);
    t.at(0, i) = T(1);
    return t;
}

template <class T>
struct MaskedMlp {
    std::string prefix;
    MlpArch arch;
    WeightStyle style = WeightStyle::plain;
    MaskGranularity gran = MaskGranularity::weight;
    int n_entities = 1;                               // threshold or fixed-mask sets
    std::vector<std::vector<Tensor<T>>> fixed_masks;  // [entity][layer-1], style fixed only

    bool masked() const { return style != WeightStyle::plain; }

    std::string w_name(int l) const { return prefix + ".w" + std::to_string(l); }
    std::string b_name(int l) const { return prefix + ".b" + std::to_string(l); }
    std::string g_name(int l) const { return prefix + ".g" + std::to_string(l); }
    std::string lb_name(int l) const { return prefix + ".lb" + std::to_string(l); }
    std::string s_name(int l, int entity) const {
        return prefix + ".s" + std::to_string(l) + ".m" + std::to_string(entity);
    }

    T init_bound(int l) const { return static_cast<T>(1.0 / std::sqrt(static_cast<double>(arch.dims[l - 1]))); }

    std::vector<T> init_bounds() const {
        std::vector<T> out;
        for (int l = 1; l <= arch.n_layers(); ++l) out.push_back(init_bound(l));
        return out;
    }

    std::vector<std::string> theta_names() const {
        std::vector<std::string> out;
        for (int l = 1; l <= arch.n_layers(); ++l) out.push_back(w_name(l));
        return out;
    }

    std::vector<std::vector<std::string>> thr_names() const {
        std::vector<std::vector<std::string>> out(static_cast<size_t>(n_entities));
        for (int e = 0; e < n_entities; ++e)
            for (int l = 1; l <= arch.n_layers(); ++l) out[e].push_back(s_name(l, e));
        return out;
    }

    // Weight and bias draws happen in layer order before anything
    // mask-related, so every style consumes the init stream identically up to
    // that point and a masked net starts from the same shared weights a plain
    // one would.
    void init(ParamStore<T>& store, RngStream& rng, T threshold_init = T(-5), double fixed_keep = 0.9) {
        const int L = arch.n_layers();
        if (L < 1) throw std::invalid_argument("MaskedMlp::init: need at least one layer");
        for (int l = 1; l <= L; ++l) {
            const T bound = init_bound(l);
            store.add(w_name(l), Tensor<T>::uniform(arch.dims[l - 1], arch.dims[l], -bound, bound, rng));
            store.add(b_name(l), Tensor<T>::uniform(1, arch.dims[l], -bound, bound, rng));
            if (arch.layer_norm && l < L) {
                store.add(g_name(l), Tensor<T>(1, arch.dims[l], T(1)));
                store.add(lb_name(l), Tensor<T>(1, arch.dims[l]));
            }
        }
        if (style == WeightStyle::soft || style == WeightStyle::hard) {
            for (int e = 0; e < n_entities; ++e)
                for (int l = 1; l <= L; ++l) {
                    const int rows = arch.dims[l - 1];
                    const int cols = gran == MaskGranularity::weight ? arch.dims[l] : 1;
                    store.add(s_name(l, e), Tensor<T>(rows, cols, threshold_init));
                }
        }
        if (style == WeightStyle::fixed) {
            fixed_masks.assign(static_cast<size_t>(n_entities), {});
            for (int e = 0; e < n_entities; ++e)
                for (int l = 1; l <= L; ++l) {
                    Tensor<T> m(arch.dims[l - 1], arch.dims[l]);
                    for (auto& x : m.v) x = rng.uniform() < fixed_keep ? T(1) : T(0);
                    fixed_masks[static_cast<size_t>(e)].push_back(std::move(m));
                }
        }
    }

    int forward(GradTape<T>& tape, ParamStore<T>& store, int x, int entity, bool trainable) const {
        check_entity(entity);
        const int L = arch.n_layers();
        const ValueView<T> view(store);
        for (int l = 1; l <= L; ++l) {
            const int wid = trainable ? tape.param(store, w_name(l)) : tape.constant(view(w_name(l)));
            int eff = wid;
            if (style == WeightStyle::soft) {
                const int sid =
                    trainable ? tape.param(store, s_name(l, entity)) : tape.constant(view(s_name(l, entity)));
                eff = gran == MaskGranularity::weight ? tape.record_soft_threshold(wid, sid)
                                                     : tape.record_row_gate(wid, sid);
            } else if (style == WeightStyle::hard) {
                eff = tape.record_mask_mul(wid, compute_mask(view(w_name(l)), view(s_name(l, entity))));
            } else if (style == WeightStyle::fixed) {
                eff = tape.record_mask_mul(wid, fixed_masks[static_cast<size_t>(entity)][static_cast<size_t>(l - 1)]);
            }
            const int bid = trainable ? tape.param(store, b_name(l)) : tape.constant(view(b_name(l)));
            x = tape.record_linear(x, eff, bid);
            if (l < L) {
                if (arch.layer_norm) {
                    const int gid = trainable ? tape.param(store, g_name(l)) : tape.constant(view(g_name(l)));
                    const int lbid = trainable ? tape.param(store, lb_name(l)) : tape.constant(view(lb_name(l)));
                    x = tape.record_layer_norm(x, gid, lbid);
                }
                x = tape.record_activation(x, arch.hidden_act);
            } else if (arch.tanh_head) {
                x = tape.record_activation(x, Act::tanh);
            }
        }
        return x;
    }

    Tensor<T> eval(const ValueView<T>& view, const Tensor<T>& x_in, int entity) const {
        check_entity(entity);
        const int L = arch.n_layers();
        Tensor<T> x = x_in;
        for (int l = 1; l <= L; ++l) {
            const Tensor<T>& w = view(w_name(l));
            Tensor<T> eff;
            const Tensor<T>* wp = &w;
            if (style == WeightStyle::soft) {
                eff = gran == MaskGranularity::weight ? soft_threshold(w, view(s_name(l, entity)))
                                                     : row_gate(w, view(s_name(l, entity)));
                wp = &eff;
            } else if (style == WeightStyle::hard) {
                eff = apply_hard_mask(w, compute_mask(w, view(s_name(l, entity))));
                wp = &eff;
            } else if (style == WeightStyle::fixed) {
                eff = apply_hard_mask(w, fixed_masks[static_cast<size_t>(entity)][static_cast<size_t>(l - 1)]);
                wp = &eff;
            }
            x = linear_eval(x, *wp, view(b_name(l)));
            if (l < L) {
                if (arch.layer_norm) layer_norm_inplace(x, view(g_name(l)), view(lb_name(l)));
                activate_inplace(x, arch.hidden_act);
            } else if (arch.tanh_head) {
                activate_inplace(x, Act::tanh);
            }
        }
        return x;
    }

    // Binary masks derived from the current parameter values (or the frozen
    // masks for the fixed style).
    std::vector<Tensor<T>> masks(const ValueView<T>& view, int entity) const {
        check_entity(entity);
        if (!masked()) throw std::logic_error("MaskedMlp::masks: plain network has no masks");
        if (style == WeightStyle::fixed) return fixed_masks[static_cast<size_t>(entity)];
        std::vector<Tensor<T>> out;
        for (int l = 1; l <= arch.n_layers(); ++l)
            out.push_back(compute_mask(view(w_name(l)), view(s_name(l, entity))));
        return out;
    }

    std::vector<std::vector<Tensor<T>>> all_masks(const ValueView<T>& view) const {
        std::vector<std::vector<Tensor<T>>> out;
        for (int e = 0; e < n_entities; ++e) out.push_back(masks(view, e));
        return out;
    }

private:
    void check_entity(int entity) const {
        if (entity < 0 || entity >= n_entities) throw std::out_of_range("MaskedMlp: entity index out of range");
    }
};

// Monotonic mixer: per-sample weights come from hypernetworks conditioned on
// the global state, first-layer weights and second-layer weights pass through
// abs() so d(q_tot)/d(q_i) >= 0, and a two-layer state value head supplies the
// unconstrained bias.
template <class T>
struct MixingNet {
    std::string prefix = "mixer";
    int n_agents = 0;
    int state_dim = 0;
    int embed = 32;

    std::string name(const char* leaf) const { return prefix + "." + leaf; }

    void init(ParamStore<T>& store, RngStream& rng) {
        auto u = [&](int r, int c, int fan_in) {
            const T bound = static_cast<T>(1.0 / std::sqrt(static_cast<double>(fan_in)));
            return Tensor<T>::uniform(r, c, -bound, bound, rng);
        };
        store.add(name("w1w"), u(state_dim, n_agents * embed, state_dim));
        store.add(name("w1b"), u(1, n_agents * embed, state_dim));
        store.add(name("b1w"), u(state_dim, embed, state_dim));
        store.add(name("b1b"), u(1, embed, state_dim));
        store.add(name("w2w"), u(state_dim, embed, state_dim));
        store.add(name("w2b"), u(1, embed, state_dim));
        store.add(name("v1w"), u(state_dim, embed, state_dim));
        store.add(name("v1b"), u(1, embed, state_dim));
        store.add(name("v2w"), u(embed, 1, embed));
        store.add(name("v2b"), u(1, 1, embed));
    }

    int forward(GradTape<T>& tape, ParamStore<T>& store, int qs, int state, bool trainable) const {
        const ValueView<T> view(store);
        auto leaf = [&](const char* n) {
            return trainable ? tape.param(store, name(n)) : tape.constant(view(name(n)));
        };
        const int w1 = tape.record_abs(tape.record_linear(state, leaf("w1w"), leaf("w1b")));
        const int b1 = tape.record_linear(state, leaf("b1w"), leaf("b1b"));
        const int h =
            tape.record_activation(tape.record_add(tape.record_rowwise_bmm(qs, w1, n_agents, embed), b1), Act::relu);
        const int w2 = tape.record_abs(tape.record_linear(state, leaf("w2w"), leaf("w2b")));
        const int v1 = tape.record_activation(tape.record_linear(state, leaf("v1w"), leaf("v1b")), Act::relu);
        const int v = tape.record_linear(v1, leaf("v2w"), leaf("v2b"));
        return tape.record_add(tape.record_rowwise_bmm(h, w2, embed, 1), v);
    }

    Tensor<T> eval(const ValueView<T>& view, const Tensor<T>& qs, const Tensor<T>& state) const {
        const int B = qs.rows;
        Tensor<T> w1 = linear_eval(state, view(name("w1w")), view(name("w1b")));
        for (auto& e : w1.v) e = std::abs(e);
        Tensor<T> h = linear_eval(state, view(name("b1w")), view(name("b1b")));
        for (int i = 0; i < B; ++i)
            for (int p = 0; p < n_agents; ++p) {
                const T qp = qs.at(i, p);
                for (int j = 0; j < embed; ++j)
                    h.at(i, j) += qp * w1.v[static_cast<size_t>(i) * n_agents * embed + p * embed + j];
            }
        activate_inplace(h, Act::relu);
        Tensor<T> w2 = linear_eval(state, view(name("w2w")), view(name("w2b")));
        for (auto& e : w2.v) e = std::abs(e);
        Tensor<T> v1 = linear_eval(state, view(name("v1w")), view(name("v1b")));
        activate_inplace(v1, Act::relu);
        Tensor<T> v = linear_eval(v1, view(name("v2w")), view(name("v2b")));
        Tensor<T> out(B, 1);
        for (int i = 0; i < B; ++i) {
            T acc = T(0);
            for (int j = 0; j < embed; ++j) acc += h.at(i, j) * w2.at(i, j);
            out.at(i, 0) = acc + v.at(i, 0);
        }
        return out;
    }
};

// --- target parameter sets ---

template <class T>
void hard_update(std::map<std::string, Tensor<T>>& target, const ParamStore<T>& live) {
    target = live.snapshot();
}

template <class T>
void polyak_update(std::map<std::string, Tensor<T>>& target, const ParamStore<T>& live, T tau) {
    for (auto& [name, t] : target) {
        const Tensor<T>& s = live.value(name);
        for (size_t i = 0; i < t.size(); ++i) t.v[i] = (T(1) - tau) * t.v[i] + tau * s.v[i];
    }
}

}  // namespace kaleido
