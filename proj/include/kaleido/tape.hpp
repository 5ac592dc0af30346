#pragma once

// Reverse-mode tape. Each record_* op appends a node holding its output value;
// backward() walks the tape in reverse and calls each node's pullback.
// Parameters enter as leaves bound to a ParamStore entry and their gradients
// are flushed back into the store after the sweep. Targets and other frozen
// values enter as constants and never receive gradients.

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaleido/param_store.hpp"
#include "kaleido/tensor.hpp"

namespace kaleido {

enum class Act { relu, tanh, sigmoid };

constexpr double kLayerNormEps = 1e-5;

template <class T>
inline T sigmoid_scalar(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// sign(w) * relu(|w| - sigmoid(s)): soft threshold with a learnable cutoff.
template <class T>
inline T soft_threshold_scalar(T w, T s) {
    const T cut = sigmoid_scalar(s);
    const T mag = std::abs(w) - cut;
    if (mag <= T(0)) return T(0);
    return w > T(0) ? mag : -mag;
}

template <class T>
class GradTape {
public:
    struct Node {
        Tensor<T> val;
        Tensor<T> grad;           // allocated lazily in backward()
        bool needs_grad = false;
        std::function<void(GradTape&)> back;  // empty for leaves/constants
    };

    int n_nodes() const { return static_cast<int>(nodes_.size()); }

    const Tensor<T>& value(int id) const { return node(id).val; }
    const Tensor<T>& grad(int id) const {
        const Node& n = node(id);
        if (n.grad.size() == 0) throw std::logic_error("GradTape::grad: no gradient at node (run backward first)");
        return n.grad;
    }

    // Constant leaf: no gradient ever flows out of it.
    int constant(Tensor<T> value) {
        Node n;
        n.val = std::move(value);
        n.needs_grad = false;
        nodes_.push_back(std::move(n));
        return n_nodes() - 1;
    }

    // Differentiable leaf not tied to a store (tests, probes).
    int input(Tensor<T> value) {
        Node n;
        n.val = std::move(value);
        n.needs_grad = true;
        nodes_.push_back(std::move(n));
        return n_nodes() - 1;
    }

    // Leaf bound to a ParamStore entry; backward() accumulates into store.grad.
    int param(ParamStore<T>& store, const std::string& name) {
        Node n;
        n.val = store.value(name);
        n.needs_grad = true;
        nodes_.push_back(std::move(n));
        const int id = n_nodes() - 1;
        param_links_.push_back({&store, name, id});
        return id;
    }

    // x[B,in] * w[in,out] + b[1,out]
    int record_linear(int x, int w, int b) {
        const Tensor<T>& xv = node(x).val;
        const Tensor<T>& wv = node(w).val;
        const Tensor<T>& bv = node(b).val;
        if (xv.cols != wv.rows) throw std::invalid_argument("record_linear: inner dims " + shape_str(xv) + " x " + shape_str(wv));
        if (bv.rows != 1 || bv.cols != wv.cols) throw std::invalid_argument("record_linear: bias shape " + shape_str(bv));
        Tensor<T> out(xv.rows, wv.cols);
        matmul(xv, wv, out);
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv.at(0, j);
        return push(std::move(out), {x, w, b}, [x, w, b](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& xv = t.node(x).val;
            const Tensor<T>& wv = t.node(w).val;
            if (t.wants(x)) matmul_a_bt_acc(g, wv, t.grad_buf(x));
            if (t.wants(w)) matmul_at_b_acc(xv, g, t.grad_buf(w));
            if (t.wants(b)) {
                Tensor<T>& bg = t.grad_buf(b);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) bg.at(0, j) += g.at(i, j);
            }
        });
    }

    int record_activation(int x, Act kind) {
        const Tensor<T>& xv = node(x).val;
        Tensor<T> out(xv.rows, xv.cols);
        switch (kind) {
            case Act::relu:
                for (size_t i = 0; i < xv.size(); ++i) out.v[i] = xv.v[i] > T(0) ? xv.v[i] : T(0);
                break;
            case Act::tanh:
                for (size_t i = 0; i < xv.size(); ++i) out.v[i] = std::tanh(xv.v[i]);
                break;
            case Act::sigmoid:
                for (size_t i = 0; i < xv.size(); ++i) out.v[i] = sigmoid_scalar(xv.v[i]);
                break;
        }
        return push(std::move(out), {x}, [x, kind](GradTape& t) {
            if (!t.wants(x)) return;
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& xv = t.node(x).val;
            const Tensor<T>& yv = t.node_out_val();
            Tensor<T>& xg = t.grad_buf(x);
            switch (kind) {
                case Act::relu:
                    // derivative at exactly 0 is taken as 0
                    for (size_t i = 0; i < xv.size(); ++i) xg.v[i] += xv.v[i] > T(0) ? g.v[i] : T(0);
                    break;
                case Act::tanh:
                    for (size_t i = 0; i < xv.size(); ++i) xg.v[i] += g.v[i] * (T(1) - yv.v[i] * yv.v[i]);
                    break;
                case Act::sigmoid:
                    for (size_t i = 0; i < xv.size(); ++i) xg.v[i] += g.v[i] * yv.v[i] * (T(1) - yv.v[i]);
                    break;
            }
        });
    }

    // Row-wise layer norm with learned gain/bias (1 x cols each).
    int record_layer_norm(int x, int gain, int bias) {
        const Tensor<T>& xv = node(x).val;
        const Tensor<T>& gv = node(gain).val;
        const Tensor<T>& bv = node(bias).val;
        if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
            throw std::invalid_argument("record_layer_norm: gain/bias must be 1 x cols");
        const int B = xv.rows, D = xv.cols;
        Tensor<T> out(B, D);
        Tensor<T> xhat(B, D);
        std::vector<T> inv_std(B);
        for (int i = 0; i < B; ++i) {
            double mean = 0.0;
            for (int j = 0; j < D; ++j) mean += static_cast<double>(xv.at(i, j));
            mean /= D;
            double var = 0.0;
            for (int j = 0; j < D; ++j) {
                const double d = static_cast<double>(xv.at(i, j)) - mean;
                var += d * d;
            }
            var /= D;
            const double is = 1.0 / std::sqrt(var + kLayerNormEps);
            inv_std[i] = static_cast<T>(is);
            for (int j = 0; j < D; ++j) {
                const T xh = static_cast<T>((static_cast<double>(xv.at(i, j)) - mean) * is);
                xhat.at(i, j) = xh;
                out.at(i, j) = xh * gv.at(0, j) + bv.at(0, j);
            }
        }
        auto xhat_p = std::make_shared<Tensor<T>>(std::move(xhat));
        auto istd_p = std::make_shared<std::vector<T>>(std::move(inv_std));
        return push(std::move(out), {x, gain, bias}, [x, gain, bias, xhat_p, istd_p](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& gv = t.node(gain).val;
            const int B = g.rows, D = g.cols;
            if (t.wants(gain)) {
                Tensor<T>& gg = t.grad_buf(gain);
                for (int i = 0; i < B; ++i)
                    for (int j = 0; j < D; ++j) gg.at(0, j) += g.at(i, j) * xhat_p->at(i, j);
            }
            if (t.wants(bias)) {
                Tensor<T>& bg = t.grad_buf(bias);
                for (int i = 0; i < B; ++i)
                    for (int j = 0; j < D; ++j) bg.at(0, j) += g.at(i, j);
            }
            if (t.wants(x)) {
                Tensor<T>& xg = t.grad_buf(x);
                for (int i = 0; i < B; ++i) {
                    double sum_gy = 0.0, sum_gy_xhat = 0.0;
                    for (int j = 0; j < D; ++j) {
                        const double gy = static_cast<double>(g.at(i, j)) * static_cast<double>(gv.at(0, j));
                        sum_gy += gy;
                        sum_gy_xhat += gy * static_cast<double>(xhat_p->at(i, j));
                    }
                    for (int j = 0; j < D; ++j) {
                        const double gy = static_cast<double>(g.at(i, j)) * static_cast<double>(gv.at(0, j));
                        const double xh = static_cast<double>(xhat_p->at(i, j));
                        xg.at(i, j) += static_cast<T>(static_cast<double>((*istd_p)[i]) *
                                                      (gy - sum_gy / D - xh * sum_gy_xhat / D));
                    }
                }
            }
        });
    }

    // Elementwise soft threshold of theta by sigmoid(s); the masked-out region
    // passes no gradient, the live region passes d/dtheta = 1 and
    // d/ds = -sign(theta) * sigmoid'(s).
    int record_soft_threshold(int theta, int s) {
        const Tensor<T>& tv = node(theta).val;
        const Tensor<T>& sv = node(s).val;
        if (!tv.same_shape(sv)) throw std::invalid_argument("record_soft_threshold: shape mismatch");
        Tensor<T> out(tv.rows, tv.cols);
        for (size_t i = 0; i < tv.size(); ++i) out.v[i] = soft_threshold_scalar(tv.v[i], sv.v[i]);
        return push(std::move(out), {theta, s}, [theta, s](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& tv = t.node(theta).val;
            const Tensor<T>& sv = t.node(s).val;
            const bool wt = t.wants(theta), ws = t.wants(s);
            if (!wt && !ws) return;
            Tensor<T>* tg = wt ? &t.grad_buf(theta) : nullptr;
            Tensor<T>* sg = ws ? &t.grad_buf(s) : nullptr;
            for (size_t i = 0; i < tv.size(); ++i) {
                const T cut = sigmoid_scalar(sv.v[i]);
                if (std::abs(tv.v[i]) <= cut) continue;
                if (wt) tg->v[i] += g.v[i];
                if (ws) {
                    const T sign_t = tv.v[i] > T(0) ? T(1) : T(-1);
                    sg->v[i] += g.v[i] * (-sign_t) * cut * (T(1) - cut);
                }
            }
        });
    }

    // Row-level soft threshold: theta[in,out] gated by s[in,1]. Each row is
    // scaled by g_r = relu(a_r - sigmoid(s_r)) / a_r where a_r = mean|row|, so
    // the gated row's mean magnitude is exactly the gap a_r - sigmoid(s_r) and
    // a row whose mean magnitude falls below the cutoff is zeroed entirely.
    int record_row_gate(int theta, int s) {
        const Tensor<T>& tv = node(theta).val;
        const Tensor<T>& sv = node(s).val;
        if (sv.rows != tv.rows || sv.cols != 1)
            throw std::invalid_argument("record_row_gate: thresholds must be rows x 1, got " + shape_str(sv) +
                                        " for " + shape_str(tv));
        const int R = tv.rows, C = tv.cols;
        Tensor<T> out(R, C);
        std::vector<T> gate(static_cast<size_t>(R)), amean(static_cast<size_t>(R));
        for (int r = 0; r < R; ++r) {
            double a = 0.0;
            for (int c = 0; c < C; ++c) a += std::abs(static_cast<double>(tv.at(r, c)));
            a /= C;
            const double cut = static_cast<double>(sigmoid_scalar(sv.at(r, 0)));
            const double g = a > cut ? 1.0 - cut / a : 0.0;
            amean[r] = static_cast<T>(a);
            gate[r] = static_cast<T>(g);
            for (int c = 0; c < C; ++c) out.at(r, c) = static_cast<T>(static_cast<double>(tv.at(r, c)) * g);
        }
        auto gate_p = std::make_shared<std::vector<T>>(std::move(gate));
        auto amean_p = std::make_shared<std::vector<T>>(std::move(amean));
        return push(std::move(out), {theta, s}, [theta, s, gate_p, amean_p](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& tv = t.node(theta).val;
            const Tensor<T>& sv = t.node(s).val;
            const bool wt = t.wants(theta), ws = t.wants(s);
            if (!wt && !ws) return;
            Tensor<T>* tg = wt ? &t.grad_buf(theta) : nullptr;
            Tensor<T>* sg = ws ? &t.grad_buf(s) : nullptr;
            const int R = tv.rows, C = tv.cols;
            for (int r = 0; r < R; ++r) {
                const double gr = static_cast<double>((*gate_p)[r]);
                if (gr <= 0.0) continue;
                const double a = static_cast<double>((*amean_p)[r]);
                const double cut = static_cast<double>(sigmoid_scalar(sv.at(r, 0)));
                double dot = 0.0;
                for (int c = 0; c < C; ++c) dot += static_cast<double>(g.at(r, c)) * static_cast<double>(tv.at(r, c));
                if (wt) {
                    const double da_coef = dot * cut / (a * a) / C;
                    for (int c = 0; c < C; ++c) {
                        const T tvc = tv.at(r, c);
                        const double sign_t = tvc > T(0) ? 1.0 : (tvc < T(0) ? -1.0 : 0.0);
                        tg->at(r, c) += static_cast<T>(static_cast<double>(g.at(r, c)) * gr + da_coef * sign_t);
                    }
                }
                if (ws) sg->at(r, 0) += static_cast<T>(dot * (-1.0 / a) * cut * (1.0 - cut));
            }
        });
    }

    // Elementwise product with a constant 0/1 mask (hard masking).
    int record_mask_mul(int theta, const Tensor<T>& mask) {
        const Tensor<T>& tv = node(theta).val;
        if (!tv.same_shape(mask)) throw std::invalid_argument("record_mask_mul: shape mismatch");
        Tensor<T> out(tv.rows, tv.cols);
        for (size_t i = 0; i < tv.size(); ++i) out.v[i] = tv.v[i] * mask.v[i];
        auto m = std::make_shared<Tensor<T>>(mask);
        return push(std::move(out), {theta}, [theta, m](GradTape& t) {
            if (!t.wants(theta)) return;
            const Tensor<T>& g = t.node_out_grad();
            Tensor<T>& tg = t.grad_buf(theta);
            for (size_t i = 0; i < g.size(); ++i) tg.v[i] += g.v[i] * m->v[i];
        });
    }

    int record_add(int a, int b) { return binary(a, b, /*sub=*/false); }
    int record_sub(int a, int b) { return binary(a, b, /*sub=*/true); }

    int record_mul(int a, int b) {
        const Tensor<T>& av = node(a).val;
        const Tensor<T>& bv = node(b).val;
        if (!av.same_shape(bv)) throw std::invalid_argument("record_mul: shape mismatch");
        Tensor<T> out(av.rows, av.cols);
        for (size_t i = 0; i < av.size(); ++i) out.v[i] = av.v[i] * bv.v[i];
        return push(std::move(out), {a, b}, [a, b](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& av = t.node(a).val;
            const Tensor<T>& bv = t.node(b).val;
            if (t.wants(a)) {
                Tensor<T>& ag = t.grad_buf(a);
                for (size_t i = 0; i < g.size(); ++i) ag.v[i] += g.v[i] * bv.v[i];
            }
            if (t.wants(b)) {
                Tensor<T>& bg = t.grad_buf(b);
                for (size_t i = 0; i < g.size(); ++i) bg.v[i] += g.v[i] * av.v[i];
            }
        });
    }

    int record_scale(int a, T c) {
        const Tensor<T>& av = node(a).val;
        Tensor<T> out(av.rows, av.cols);
        for (size_t i = 0; i < av.size(); ++i) out.v[i] = av.v[i] * c;
        return push(std::move(out), {a}, [a, c](GradTape& t) {
            if (!t.wants(a)) return;
            const Tensor<T>& g = t.node_out_grad();
            Tensor<T>& ag = t.grad_buf(a);
            for (size_t i = 0; i < g.size(); ++i) ag.v[i] += g.v[i] * c;
        });
    }

    int record_abs(int a) {
        const Tensor<T>& av = node(a).val;
        Tensor<T> out(av.rows, av.cols);
        for (size_t i = 0; i < av.size(); ++i) out.v[i] = std::abs(av.v[i]);
        return push(std::move(out), {a}, [a](GradTape& t) {
            if (!t.wants(a)) return;
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& av = t.node(a).val;
            Tensor<T>& ag = t.grad_buf(a);
            // subgradient at 0 is 0
            for (size_t i = 0; i < g.size(); ++i)
                ag.v[i] += av.v[i] > T(0) ? g.v[i] : (av.v[i] < T(0) ? -g.v[i] : T(0));
        });
    }

    int record_square(int a) { return record_mul(a, a); }

    int record_concat_cols(const std::vector<int>& xs) {
        if (xs.empty()) throw std::invalid_argument("record_concat_cols: empty input");
        const int B = node(xs[0]).val.rows;
        int total = 0;
        for (int id : xs) {
            if (node(id).val.rows != B) throw std::invalid_argument("record_concat_cols: row mismatch");
            total += node(id).val.cols;
        }
        Tensor<T> out(B, total);
        int off = 0;
        for (int id : xs) {
            const Tensor<T>& xv = node(id).val;
            for (int i = 0; i < B; ++i)
                for (int j = 0; j < xv.cols; ++j) out.at(i, off + j) = xv.at(i, j);
            off += xv.cols;
        }
        auto parts = std::make_shared<std::vector<int>>(xs);
        return push(std::move(out), xs, [parts](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            int off = 0;
            for (int id : *parts) {
                const int c = t.node(id).val.cols;
                if (t.wants(id)) {
                    Tensor<T>& xg = t.grad_buf(id);
                    for (int i = 0; i < g.rows; ++i)
                        for (int j = 0; j < c; ++j) xg.at(i, j) += g.at(i, off + j);
                }
                off += c;
            }
        });
    }

    // out[i,0] = x[i, idx[i]]
    int record_gather_cols(int x, const std::vector<int>& idx) {
        const Tensor<T>& xv = node(x).val;
        if (static_cast<int>(idx.size()) != xv.rows) throw std::invalid_argument("record_gather_cols: index count");
        for (int i : idx)
            if (i < 0 || i >= xv.cols) throw std::out_of_range("record_gather_cols: index out of range");
        Tensor<T> out(xv.rows, 1);
        for (int i = 0; i < xv.rows; ++i) out.at(i, 0) = xv.at(i, idx[i]);
        auto ix = std::make_shared<std::vector<int>>(idx);
        return push(std::move(out), {x}, [x, ix](GradTape& t) {
            if (!t.wants(x)) return;
            const Tensor<T>& g = t.node_out_grad();
            Tensor<T>& xg = t.grad_buf(x);
            for (int i = 0; i < g.rows; ++i) xg.at(i, (*ix)[i]) += g.at(i, 0);
        });
    }

    // Per-row matmul: x[B, r], w[B, r*c] (row-major r x c per row) -> [B, c].
    int record_rowwise_bmm(int x, int w, int r, int c) {
        const Tensor<T>& xv = node(x).val;
        const Tensor<T>& wv = node(w).val;
        if (xv.cols != r || wv.cols != r * c || xv.rows != wv.rows)
            throw std::invalid_argument("record_rowwise_bmm: shape mismatch");
        const int B = xv.rows;
        Tensor<T> out(B, c);
        for (int i = 0; i < B; ++i)
            for (int p = 0; p < r; ++p) {
                const T xp = xv.at(i, p);
                for (int j = 0; j < c; ++j) out.at(i, j) += xp * wv.v[static_cast<size_t>(i) * r * c + p * c + j];
            }
        return push(std::move(out), {x, w}, [x, w, r, c](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            const Tensor<T>& xv = t.node(x).val;
            const Tensor<T>& wv = t.node(w).val;
            const int B = xv.rows;
            if (t.wants(x)) {
                Tensor<T>& xg = t.grad_buf(x);
                for (int i = 0; i < B; ++i)
                    for (int p = 0; p < r; ++p) {
                        T acc = T(0);
                        for (int j = 0; j < c; ++j) acc += g.at(i, j) * wv.v[static_cast<size_t>(i) * r * c + p * c + j];
                        xg.at(i, p) += acc;
                    }
            }
            if (t.wants(w)) {
                Tensor<T>& wg = t.grad_buf(w);
                for (int i = 0; i < B; ++i)
                    for (int p = 0; p < r; ++p) {
                        const T xp = xv.at(i, p);
                        for (int j = 0; j < c; ++j) wg.v[static_cast<size_t>(i) * r * c + p * c + j] += xp * g.at(i, j);
                    }
            }
        });
    }

    int record_sum_all(int x) { return reduce(x, /*mean=*/false); }
    int record_mean_all(int x) { return reduce(x, /*mean=*/true); }

    // Reverse sweep from a scalar loss node; flushes param leaf grads into
    // their stores (accumulating, so zero_grads() is the caller's decision).
    void backward(int loss) {
        const Node& ln = node(loss);
        if (ln.val.rows != 1 || ln.val.cols != 1)
            throw std::invalid_argument("backward: loss must be 1x1, got " + shape_str(ln.val));
        for (auto& n : nodes_)
            if (n.needs_grad && n.grad.size() == 0) n.grad = Tensor<T>(n.val.rows, n.val.cols);
        if (!node(loss).needs_grad) return;  // loss independent of any differentiable leaf
        node_mut(loss).grad.v[0] = T(1);
        for (int id = loss; id >= 0; --id) {
            Node& n = node_mut(id);
            if (!n.needs_grad || !n.back) continue;
            cur_ = id;
            n.back(*this);
        }
        for (const auto& link : param_links_) {
            Tensor<T>& dst = link.store->grad(link.name);
            const Tensor<T>& src = node(link.id).grad;
            for (size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
        }
    }

    // --- helpers used by pullbacks ---
    const Node& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
    bool wants(int id) const { return node(id).needs_grad; }
    Tensor<T>& grad_buf(int id) { return node_mut(id).grad; }
    const Tensor<T>& node_out_grad() const { return node(cur_).grad; }
    const Tensor<T>& node_out_val() const { return node(cur_).val; }

private:
    struct ParamLink {
        ParamStore<T>* store;
        std::string name;
        int id;
    };

    Node& node_mut(int id) { return nodes_.at(static_cast<size_t>(id)); }

    int push(Tensor<T> out, const std::vector<int>& parents, std::function<void(GradTape&)> back) {
        Node n;
        n.val = std::move(out);
        for (int p : parents)
            if (node(p).needs_grad) n.needs_grad = true;
        if (n.needs_grad) n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return n_nodes() - 1;
    }

    int binary(int a, int b, bool sub) {
        const Tensor<T>& av = node(a).val;
        const Tensor<T>& bv = node(b).val;
        if (!av.same_shape(bv)) throw std::invalid_argument("record_add/sub: shape mismatch");
        Tensor<T> out(av.rows, av.cols);
        for (size_t i = 0; i < av.size(); ++i) out.v[i] = sub ? av.v[i] - bv.v[i] : av.v[i] + bv.v[i];
        return push(std::move(out), {a, b}, [a, b, sub](GradTape& t) {
            const Tensor<T>& g = t.node_out_grad();
            if (t.wants(a)) {
                Tensor<T>& ag = t.grad_buf(a);
                for (size_t i = 0; i < g.size(); ++i) ag.v[i] += g.v[i];
            }
            if (t.wants(b)) {
                Tensor<T>& bg = t.grad_buf(b);
                for (size_t i = 0; i < g.size(); ++i) bg.v[i] += sub ? -g.v[i] : g.v[i];
            }
        });
    }

    int reduce(int x, bool mean) {
        const Tensor<T>& xv = node(x).val;
        double acc = 0.0;
        for (T e : xv.v) acc += static_cast<double>(e);
        const double denom = mean ? static_cast<double>(xv.size()) : 1.0;
        Tensor<T> out(1, 1);
        out.v[0] = static_cast<T>(acc / denom);
        return push(std::move(out), {x}, [x, mean](GradTape& t) {
            if (!t.wants(x)) return;
            const T g = t.node_out_grad().v[0];
            Tensor<T>& xg = t.grad_buf(x);
            const T scale = mean ? g / static_cast<T>(xg.size()) : g;
            for (size_t i = 0; i < xg.size(); ++i) xg.v[i] += scale;
        });
    }

    std::vector<Node> nodes_;
    std::vector<ParamLink> param_links_;
    int cur_ = -1;
};

}  // namespace kaleido
