#pragma once

// Threshold-derived binary masks over shared weight tensors, the diversity
// objective that pushes per-agent masks apart, its straight-through gradient
// surrogate, and the two reset mechanisms.
//
// Granularity weight: one threshold per weight, mask = 1[|w| > sigmoid(s)].
// Granularity neuron: one threshold per input unit (matrix row); the row is
// kept iff mean(|w_row|) > sigmoid(s_row) and the mask broadcasts over it.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaleido/param_store.hpp"
#include "kaleido/rng.hpp"
#include "kaleido/tape.hpp"
#include "kaleido/tensor.hpp"

namespace kaleido {

enum class MaskMode { soft, hard };
enum class MaskGranularity { weight, neuron };

constexpr double kDivCoeffFloor = 1e-8;

// Strict inequality: a weight sitting exactly at the cutoff is masked out.
template <class T>
Tensor<T> compute_mask(const Tensor<T>& theta, const Tensor<T>& s) {
    Tensor<T> m(theta.rows, theta.cols);
    if (s.same_shape(theta)) {
        for (size_t i = 0; i < theta.size(); ++i)
            m.v[i] = std::abs(theta.v[i]) > sigmoid_scalar(s.v[i]) ? T(1) : T(0);
        return m;
    }
    if (s.rows == theta.rows && s.cols == 1) {
        for (int r = 0; r < theta.rows; ++r) {
            double mean_abs = 0.0;
            for (int c = 0; c < theta.cols; ++c) mean_abs += std::abs(static_cast<double>(theta.at(r, c)));
            mean_abs /= theta.cols;
            const T keep = mean_abs > static_cast<double>(sigmoid_scalar(s.at(r, 0))) ? T(1) : T(0);
            for (int c = 0; c < theta.cols; ++c) m.at(r, c) = keep;
        }
        return m;
    }
    throw std::invalid_argument("compute_mask: threshold shape " + shape_str(s) + " does not match " + shape_str(theta));
}

template <class T>
Tensor<T> apply_hard_mask(const Tensor<T>& theta, const Tensor<T>& mask) {
    if (!theta.same_shape(mask)) throw std::invalid_argument("apply_hard_mask: shape mismatch");
    Tensor<T> out(theta.rows, theta.cols);
    for (size_t i = 0; i < theta.size(); ++i) out.v[i] = theta.v[i] * mask.v[i];
    return out;
}

// No-tape soft threshold (collect/eval paths).
template <class T>
Tensor<T> soft_threshold(const Tensor<T>& theta, const Tensor<T>& s) {
    if (!theta.same_shape(s)) throw std::invalid_argument("soft_threshold: shape mismatch");
    Tensor<T> out(theta.rows, theta.cols);
    for (size_t i = 0; i < theta.size(); ++i) out.v[i] = soft_threshold_scalar(theta.v[i], s.v[i]);
    return out;
}

// No-tape row gate (eval path of the neuron granularity): each row scaled by
// relu(mean|row| - sigmoid(s_row)) / mean|row|.
template <class T>
Tensor<T> row_gate(const Tensor<T>& theta, const Tensor<T>& s) {
    if (s.rows != theta.rows || s.cols != 1) throw std::invalid_argument("row_gate: thresholds must be rows x 1");
    Tensor<T> out(theta.rows, theta.cols);
    for (int r = 0; r < theta.rows; ++r) {
        double a = 0.0;
        for (int c = 0; c < theta.cols; ++c) a += std::abs(static_cast<double>(theta.at(r, c)));
        a /= theta.cols;
        const double cut = static_cast<double>(sigmoid_scalar(s.at(r, 0)));
        const double g = a > cut ? 1.0 - cut / a : 0.0;
        for (int c = 0; c < theta.cols; ++c) out.at(r, c) = static_cast<T>(static_cast<double>(theta.at(r, c)) * g);
    }
    return out;
}

// Geometric depth weighting: deeper maskable layers count more.
inline std::vector<double> layer_weights(int n_layers, double base) {
    if (n_layers < 0) throw std::invalid_argument("layer_weights: negative layer count");
    std::vector<double> w(static_cast<size_t>(n_layers));
    double p = 1.0;
    for (int l = 0; l < n_layers; ++l) {
        p *= base;
        w[static_cast<size_t>(l)] = p;
    }
    return w;
}

// Weighted L1 of masked-weight differences over all ordered entity pairs.
// theta: one tensor per maskable layer; masks: [entity][layer], binary.
template <class T>
double diversity_objective(const std::vector<Tensor<T>>& theta,
                           const std::vector<std::vector<Tensor<T>>>& masks,
                           const std::vector<double>& w) {
    const size_t E = masks.size();
    if (E < 2) throw std::invalid_argument("diversity_objective: needs at least 2 mask sets");
    if (w.size() != theta.size()) throw std::invalid_argument("diversity_objective: weight count");
    double j = 0.0;
    for (size_t l = 0; l < theta.size(); ++l) {
        const Tensor<T>& th = theta[l];
        double layer_acc = 0.0;
        for (size_t a = 0; a < E; ++a)
            for (size_t b = a + 1; b < E; ++b) {
                const Tensor<T>& ma = masks[a][l];
                const Tensor<T>& mb = masks[b][l];
                for (size_t i = 0; i < th.size(); ++i)
                    if (ma.v[i] != mb.v[i]) layer_acc += std::abs(static_cast<double>(th.v[i]));
            }
        j += w[l] * 2.0 * layer_acc;  // ordered pairs: each unordered pair twice
    }
    return j;
}

// Continuous counterpart used by soft mode: L1 distance between effective
// weight tensors. Nonzero as soon as thresholds differ, which is what lets
// ascent create new mask disagreements instead of only entrenching old ones.
//
// Weight granularity: per-weight gap relu(|w| - sigmoid(s)); the effective
// weights of two entities differ by |gap_a - gap_b| at each coordinate.
// Neuron granularity: per-row gap relu(mean|row| - sigmoid(s_row)); the gated
// rows differ by cols * |gap_a - gap_b| in L1, in every keep/drop combination.
template <class T>
double diversity_objective_soft(const std::vector<Tensor<T>>& theta,
                                const std::vector<std::vector<Tensor<T>>>& s,
                                const std::vector<double>& w) {
    const size_t E = s.size();
    if (E < 2) throw std::invalid_argument("diversity_objective_soft: needs at least 2 threshold sets");
    double j = 0.0;
    std::vector<double> gap;
    for (size_t l = 0; l < theta.size(); ++l) {
        const Tensor<T>& th = theta[l];
        const bool neuron = s[0][l].cols == 1 && th.cols != 1;
        const size_t n = neuron ? static_cast<size_t>(th.rows) : th.size();
        gap.assign(E * n, 0.0);
        for (size_t e = 0; e < E; ++e) {
            double* ge = gap.data() + e * n;
            if (neuron) {
                for (int r = 0; r < th.rows; ++r) {
                    double a = 0.0;
                    for (int c = 0; c < th.cols; ++c) a += std::abs(static_cast<double>(th.at(r, c)));
                    a /= th.cols;
                    ge[r] = std::max(0.0, a - static_cast<double>(sigmoid_scalar(s[e][l].at(r, 0))));
                }
            } else {
                for (size_t i = 0; i < n; ++i)
                    ge[i] = std::max(0.0, std::abs(static_cast<double>(th.v[i])) -
                                              static_cast<double>(sigmoid_scalar(s[e][l].v[i])));
            }
        }
        double layer_acc = 0.0;
        for (size_t a = 0; a < E; ++a)
            for (size_t b = a + 1; b < E; ++b) {
                const double* ga = gap.data() + a * n;
                const double* gb = gap.data() + b * n;
                for (size_t i = 0; i < n; ++i) layer_acc += std::abs(ga[i] - gb[i]);
            }
        if (neuron) layer_acc *= th.cols;
        j += w[l] * 2.0 * layer_acc;
    }
    return j;
}

// Ascent direction dJ/ds. The shared weights are treated as constants
// (stop-gradient); only thresholds move. The mask-side gradient is squashed
// through tanh and chained through sigmoid'(s).
//
// soft: gradients come from the continuous gap objective.
// hard: gradients come from the binary masks (zero wherever masks agree).
template <class T>
std::vector<std::vector<Tensor<T>>> diversity_gradient_s(const std::vector<Tensor<T>>& theta,
                                                         const std::vector<std::vector<Tensor<T>>>& s,
                                                         const std::vector<double>& w, MaskMode mode) {
    const size_t E = s.size();
    if (E < 2) throw std::invalid_argument("diversity_gradient_s: needs at least 2 threshold sets");
    const size_t L = theta.size();
    std::vector<std::vector<Tensor<T>>> grad(E);
    for (size_t e = 0; e < E; ++e) {
        grad[e].reserve(L);
        for (size_t l = 0; l < L; ++l) grad[e].emplace_back(s[e][l].rows, s[e][l].cols);
    }
    std::vector<double> sig, stat;
    for (size_t l = 0; l < L; ++l) {
        const Tensor<T>& th = theta[l];
        const bool neuron = s[0][l].cols == 1 && th.cols != 1;
        const size_t n = neuron ? static_cast<size_t>(th.rows) : th.size();
        // magnitude of the mask-side subgradient at each site
        std::vector<double> mag(n);
        if (neuron) {
            for (int r = 0; r < th.rows; ++r) {
                double a = 0.0;
                for (int c = 0; c < th.cols; ++c) a += std::abs(static_cast<double>(th.at(r, c)));
                mag[static_cast<size_t>(r)] = a;
            }
        } else {
            for (size_t i = 0; i < n; ++i) mag[i] = std::abs(static_cast<double>(th.v[i]));
        }
        sig.assign(E * n, 0.0);
        stat.assign(E * n, 0.0);
        for (size_t e = 0; e < E; ++e) {
            double* se = sig.data() + e * n;
            double* te = stat.data() + e * n;
            for (size_t i = 0; i < n; ++i) {
                se[i] = static_cast<double>(sigmoid_scalar(s[e][l].v[i]));
                const double m = neuron ? mag[i] / th.cols : mag[i];
                te[i] = mode == MaskMode::soft ? std::max(0.0, m - se[i]) : (m > se[i] ? 1.0 : 0.0);
            }
        }
        for (size_t e = 0; e < E; ++e) {
            const double* se = sig.data() + e * n;
            const double* te = stat.data() + e * n;
            for (size_t i = 0; i < n; ++i) {
                double pair_sign = 0.0;
                for (size_t o = 0; o < E; ++o) {
                    if (o == e) continue;
                    const double to = stat[o * n + i];
                    pair_sign += 2.0 * (te[i] > to ? 1.0 : (te[i] < to ? -1.0 : 0.0));
                }
                const double dj_dm = w[l] * mag[i] * pair_sign;
                grad[e][l].v[i] = static_cast<T>(-std::tanh(dj_dm) * se[i] * (1.0 - se[i]));
            }
        }
    }
    return grad;
}

// coeff = ratio * |task| / max(|div|, floor); both magnitudes are treated as
// constants (no gradient flows through the ratio).
inline double adaptive_coefficient(double task_abs, double div_abs, double ratio) {
    return ratio * std::abs(task_abs) / std::max(std::abs(div_abs), kDivCoeffFloor);
}

struct ResetReport {
    int candidates = 0;  // coordinates masked by every entity
    int reset = 0;       // candidates that drew below rho
};

// Mask-guided recycling: a weight coordinate excluded by every entity's mask
// carries no signal for anyone, so with probability rho it is re-drawn from
// the layer's original init and all entity thresholds at that coordinate are
// re-armed. Only the last (up to) three maskable layers participate; Adam
// moments of touched coordinates are cleared.
template <class T>
ResetReport actor_reset(ParamStore<T>& store, const std::vector<std::string>& theta_names,
                        const std::vector<std::vector<std::string>>& s_names,
                        const std::vector<std::vector<Tensor<T>>>& masks, const std::vector<T>& init_bounds,
                        T threshold_init, double rho, RngStream& rng) {
    const size_t L = theta_names.size();
    const size_t E = s_names.size();
    if (E == 0) throw std::invalid_argument("actor_reset: no threshold sets");
    ResetReport rep;
    const size_t first = L > 3 ? L - 3 : 0;
    for (size_t l = first; l < L; ++l) {
        auto& th_entry = store.entry(theta_names[l]);
        Tensor<T>& th = th_entry.value;
        const bool neuron = store.value(s_names[0][l]).cols == 1 && th.cols != 1;
        if (neuron) {
            for (int r = 0; r < th.rows; ++r) {
                bool all_masked = true;
                for (size_t e = 0; e < E && all_masked; ++e)
                    if (masks[e][l].at(r, 0) != T(0)) all_masked = false;
                if (!all_masked) continue;
                ++rep.candidates;
                if (rng.uniform() >= rho) continue;
                ++rep.reset;
                for (int c = 0; c < th.cols; ++c) {
                    const size_t i = static_cast<size_t>(r) * th.cols + c;
                    th.v[i] = static_cast<T>(rng.uniform(-static_cast<double>(init_bounds[l]),
                                                         static_cast<double>(init_bounds[l])));
                    th_entry.m.v[i] = T(0);
                    th_entry.v.v[i] = T(0);
                }
                for (size_t e = 0; e < E; ++e) {
                    auto& se = store.entry(s_names[e][l]);
                    se.value.at(r, 0) = threshold_init;
                    se.m.at(r, 0) = T(0);
                    se.v.at(r, 0) = T(0);
                }
            }
            continue;
        }
        for (size_t i = 0; i < th.size(); ++i) {
            bool all_masked = true;
            for (size_t e = 0; e < E && all_masked; ++e)
                if (masks[e][l].v[i] != T(0)) all_masked = false;
            if (!all_masked) continue;
            ++rep.candidates;
            if (rng.uniform() >= rho) continue;
            ++rep.reset;
            th.v[i] = static_cast<T>(rng.uniform(-static_cast<double>(init_bounds[l]),
                                                 static_cast<double>(init_bounds[l])));
            th_entry.m.v[i] = T(0);
            th_entry.v.v[i] = T(0);
            for (size_t e = 0; e < E; ++e) {
                auto& se = store.entry(s_names[e][l]);
                se.value.v[i] = threshold_init;
                se.m.v[i] = T(0);
                se.v.v[i] = T(0);
            }
        }
    }
    return rep;
}

// Staggered ensemble refresh: one member's thresholds at a time, cursor wraps.
// Shared weights are never touched here.
template <class T>
int critic_cyclic_reset(ParamStore<T>& store, const std::vector<std::vector<std::string>>& s_names, int cursor,
                        T threshold_init) {
    const int K = static_cast<int>(s_names.size());
    if (K == 0) throw std::invalid_argument("critic_cyclic_reset: no threshold sets");
    if (cursor < 0 || cursor >= K) throw std::out_of_range("critic_cyclic_reset: cursor out of range");
    for (const auto& name : s_names[static_cast<size_t>(cursor)]) {
        auto& e = store.entry(name);
        e.value.fill(threshold_init);
        e.m.zero();
        e.v.zero();
    }
    return (cursor + 1) % K;
}

struct MaskStats {
    std::vector<std::vector<double>> sparsity;  // [entity][layer], fraction masked out
    double overall = 0.0;
    std::vector<std::vector<double>> hamming;  // [entity][entity], normalized disagreement
    double mean_hamming = 0.0;                 // mean over unordered pairs
};

template <class T>
MaskStats sparsity_stats(const std::vector<std::vector<Tensor<T>>>& masks) {
    const size_t E = masks.size();
    if (E == 0) throw std::invalid_argument("sparsity_stats: no mask sets");
    const size_t L = masks[0].size();
    MaskStats st;
    st.sparsity.assign(E, std::vector<double>(L, 0.0));
    size_t total = 0, zeros = 0;
    for (size_t e = 0; e < E; ++e)
        for (size_t l = 0; l < L; ++l) {
            size_t z = 0;
            for (T m : masks[e][l].v)
                if (m == T(0)) ++z;
            st.sparsity[e][l] = masks[e][l].size() ? static_cast<double>(z) / masks[e][l].size() : 0.0;
            total += masks[e][l].size();
            zeros += z;
        }
    st.overall = total ? static_cast<double>(zeros) / total : 0.0;
    st.hamming.assign(E, std::vector<double>(E, 0.0));
    double pair_acc = 0.0;
    size_t pairs = 0;
    for (size_t a = 0; a < E; ++a)
        for (size_t b = a + 1; b < E; ++b) {
            size_t diff = 0, n = 0;
            for (size_t l = 0; l < L; ++l) {
                for (size_t i = 0; i < masks[a][l].size(); ++i)
                    if (masks[a][l].v[i] != masks[b][l].v[i]) ++diff;
                n += masks[a][l].size();
            }
            const double h = n ? static_cast<double>(diff) / n : 0.0;
            st.hamming[a][b] = st.hamming[b][a] = h;
            pair_acc += h;
            ++pairs;
        }
    st.mean_hamming = pairs ? pair_acc / pairs : 0.0;
    return st;
}

}  // namespace kaleido
