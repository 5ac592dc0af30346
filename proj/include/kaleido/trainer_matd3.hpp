#pragma once

// Deterministic-policy trainer for the continuous environment: per-agent
// actors with tanh heads, centralized critics over (state, joint action),
// clipped-noise target smoothing, pessimistic min over the critic bank for
// the bootstrap, delayed actor updates with Polyak target tracking.
//
// The critic bank is either a masked ensemble (K threshold sets over one
// shared network, layer norm between hidden layers) or two independent plain
// networks for the schemes without the ensemble.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kaleido/config.hpp"
#include "kaleido/env.hpp"
#include "kaleido/flops.hpp"
#include "kaleido/masking.hpp"
#include "kaleido/networks.hpp"
#include "kaleido/param_store.hpp"
#include "kaleido/replay.hpp"
#include "kaleido/rng.hpp"
#include "kaleido/scheme.hpp"
#include "kaleido/tape.hpp"
#include "kaleido/trainer_common.hpp"

namespace kaleido {

template <class T>
class Matd3Trainer {
public:
    Matd3Trainer(const RunConfig& cfg, uint64_t seed)
        : cfg_(cfg),
          scheme_(build_scheme(cfg.scheme, cfg.mask_mode)),
          seed_(seed),
          env_(make_env(cfg.env)),
          rngs_(seed),
          buffer_(static_cast<size_t>(cfg.buffer_capacity)) {
        const EnvSpec& sp = env_->spec();
        if (sp.discrete) throw std::invalid_argument("Matd3Trainer: environment must be continuous");
        n_ = sp.n_agents;
        act_dim_ = sp.act_dim;
        obs_dim_ = sp.obs_dim;
        state_dim_ = sp.state_dim;
        in_dim_ = obs_dim_ + (scheme_.id_input ? n_ : 0);
        K_ = scheme_.critic_ensemble ? cfg_.ensemble_k : 2;

        MlpArch actor_arch;
        actor_arch.dims = {in_dim_, cfg_.matd3_hidden, cfg_.matd3_hidden, act_dim_};
        actor_arch.tanh_head = true;
        if (scheme_.per_agent_store) {
            for (int i = 0; i < n_; ++i) {
                MaskedMlp<T> net;
                net.prefix = "actor.a" + std::to_string(i);
                net.arch = actor_arch;
                actors_.push_back(std::move(net));
            }
        } else {
            MaskedMlp<T> net;
            net.prefix = "actor";
            net.arch = actor_arch;
            net.style = scheme_.style;
            net.gran = scheme_.gran;
            net.n_entities = scheme_.masked() ? n_ : 1;
            actors_.push_back(std::move(net));
        }
        for (auto& net : actors_)
            net.init(actor_store_, rngs_.init, static_cast<T>(cfg_.threshold_init), cfg_.fixed_keep_prob);

        MlpArch critic_arch;
        critic_arch.dims = {state_dim_ + n_ * act_dim_, cfg_.matd3_hidden, cfg_.matd3_hidden, 1};
        critic_arch.layer_norm = true;
        if (scheme_.critic_ensemble) {
            MaskedMlp<T> net;
            net.prefix = "critic";
            net.arch = critic_arch;
            net.style = scheme_.style;
            net.gran = scheme_.gran;
            net.n_entities = K_;
            critics_.push_back(std::move(net));
        } else {
            for (int j = 0; j < K_; ++j) {
                MaskedMlp<T> net;
                net.prefix = "critic.m" + std::to_string(j);
                net.arch = critic_arch;
                critics_.push_back(std::move(net));
            }
        }
        for (auto& net : critics_)
            net.init(critic_store_, rngs_.init, static_cast<T>(cfg_.threshold_init), cfg_.fixed_keep_prob);

        hard_update(actor_target_, actor_store_);
        hard_update(critic_target_, critic_store_);
        cur_ = env_->reset(rngs_.env);
    }

    int64_t steps_done() const { return step_; }
    const JointAction& last_action() const { return last_action_; }
    const ParamStore<T>& actor_store() const { return actor_store_; }
    const ParamStore<T>& critic_store() const { return critic_store_; }
    const SchemeSpec& scheme() const { return scheme_; }

    void step() {
        ++step_;
        JointAction a;
        a.continuous.resize(static_cast<size_t>(n_) * act_dim_);
        if (step_ <= cfg_.warmup_steps) {
            for (auto& v : a.continuous) v = rngs_.exploration.uniform(-1.0, 1.0);
        } else {
            const ValueView<T> live(actor_store_);
            for (int i = 0; i < n_; ++i) {
                const Tensor<T> mu = actor_of(i).eval(live, input_row(cur_.obs[i], i), entity_of(i));
                for (int d = 0; d < act_dim_; ++d) {
                    const double noisy = static_cast<double>(mu.at(0, d)) +
                                         cfg_.exploration_noise * rngs_.exploration.normal();
                    a.continuous[static_cast<size_t>(i) * act_dim_ + d] = std::clamp(noisy, -1.0, 1.0);
                }
            }
        }
        StepResult next = env_->step(a);
        Transition tr;
        tr.obs = flatten_obs(cur_);
        tr.state = cur_.state;
        tr.cont_actions = a.continuous;
        tr.reward = next.reward;
        tr.done = next.done;
        tr.next_obs = flatten_obs(next);
        tr.next_state = next.state;
        buffer_.push(std::move(tr));
        ep_return_ += next.reward;
        last_action_ = a;
        if (next.done) {
            window_returns_.push_back(ep_return_);
            ep_return_ = 0.0;
            cur_ = env_->reset(rngs_.env);
        } else {
            cur_ = std::move(next);
        }
        if (step_ > cfg_.warmup_steps && step_ % cfg_.matd3_update_interval == 0) {
            update_critic();
            if (critic_updates_ % cfg_.policy_delay == 0) {
                update_actor();
                polyak_update(actor_target_, actor_store_, static_cast<T>(cfg_.tau));
                polyak_update(critic_target_, critic_store_, static_cast<T>(cfg_.tau));
            }
        }
        // Scheduled resets stop after 80% of the run so the final policy is
        // evaluated after a recovery window, not right after a perturbation.
        if (scheme_.resets && step_ * 5 <= cfg_.total_steps * 4) {
            if (step_ % cfg_.actor_reset_interval == 0) reset_masked_out();
            if (scheme_.critic_ensemble && step_ % cfg_.critic_reset_interval == 0 &&
                critics_[0].style != WeightStyle::fixed)
                critic_cursor_ = critic_cyclic_reset(critic_store_, critics_[0].thr_names(), critic_cursor_,
                                                     static_cast<T>(cfg_.threshold_init));
        }
    }

    double eval_return() {
        auto ev = make_env(cfg_.env);
        RngStream evrng(seed_, "eval");
        const ValueView<T> live(actor_store_);
        double acc = 0.0;
        for (int e = 0; e < cfg_.eval_episodes; ++e) {
            StepResult sr = ev->reset(evrng);
            double ep = 0.0;
            while (!sr.done) {
                JointAction a;
                a.continuous.resize(static_cast<size_t>(n_) * act_dim_);
                for (int i = 0; i < n_; ++i) {
                    const Tensor<T> mu = actor_of(i).eval(live, input_row(sr.obs[i], i), entity_of(i));
                    for (int d = 0; d < act_dim_; ++d)
                        a.continuous[static_cast<size_t>(i) * act_dim_ + d] =
                            std::clamp(static_cast<double>(mu.at(0, d)), -1.0, 1.0);
                }
                sr = ev->step(a);
                ep += sr.reward;
            }
            acc += ep;
        }
        return acc / cfg_.eval_episodes;
    }

    TrainSnapshot metrics(bool clear_window = true) {
        TrainSnapshot s;
        if (!window_returns_.empty()) {
            double acc = 0.0;
            for (double r : window_returns_) acc += r;
            last_train_return_ = acc / static_cast<double>(window_returns_.size());
        }
        if (clear_window) window_returns_.clear();
        s.train_return = last_train_return_;
        s.td_loss = td_loss_;
        s.div_loss = div_loss_;
        if (scheme_.masked()) {
            const MaskStats st = mask_stats();
            s.sparsity = st.overall;
            s.mean_hamming = st.mean_hamming;
            int64_t fl = 0;
            for (int i = 0; i < n_; ++i) fl += mlp_fwd_flops(actors_[0].arch.dims, st.sparsity[static_cast<size_t>(i)]);
            s.flops_fwd = fl;
        } else {
            const std::vector<double> zero(actors_[0].arch.dims.size() - 1, 0.0);
            s.flops_fwd = static_cast<int64_t>(n_) * mlp_fwd_flops(actors_[0].arch.dims, zero);
        }
        return s;
    }

    MaskStats mask_stats() const {
        if (!scheme_.masked()) throw std::logic_error("Matd3Trainer: scheme has no masks");
        return sparsity_stats(actors_[0].all_masks(ValueView<T>(actor_store_)));
    }

private:
    std::vector<double> flatten_obs(const StepResult& sr) const {
        std::vector<double> flat;
        flat.reserve(static_cast<size_t>(n_) * obs_dim_);
        for (const auto& o : sr.obs) flat.insert(flat.end(), o.begin(), o.end());
        return flat;
    }

    Tensor<T> input_row(const std::vector<double>& obs, int agent) const {
        Tensor<T> x(1, in_dim_);
        for (int k = 0; k < obs_dim_; ++k) x.at(0, k) = static_cast<T>(obs[static_cast<size_t>(k)]);
        if (scheme_.id_input) x.at(0, obs_dim_ + agent) = T(1);
        return x;
    }

    const MaskedMlp<T>& actor_of(int agent) const {
        return scheme_.per_agent_store ? actors_[static_cast<size_t>(agent)] : actors_[0];
    }
    int entity_of(int agent) const { return scheme_.per_agent_store || !scheme_.masked() ? 0 : agent; }

    int critic_forward(GradTape<T>& tape, int x, int member, bool trainable) {
        if (scheme_.critic_ensemble) return critics_[0].forward(tape, critic_store_, x, member, trainable);
        return critics_[static_cast<size_t>(member)].forward(tape, critic_store_, x, 0, trainable);
    }

    Tensor<T> critic_eval(const ValueView<T>& view, const Tensor<T>& x, int member) const {
        if (scheme_.critic_ensemble) return critics_[0].eval(view, x, member);
        return critics_[static_cast<size_t>(member)].eval(view, x, 0);
    }

    Tensor<T> batch_inputs(const std::vector<size_t>& idx, int agent, bool next) const {
        const int B = static_cast<int>(idx.size());
        Tensor<T> x(B, in_dim_);
        const size_t off = static_cast<size_t>(agent) * obs_dim_;
        for (int b = 0; b < B; ++b) {
            const Transition& tr = buffer_.at(idx[static_cast<size_t>(b)]);
            const std::vector<double>& src = next ? tr.next_obs : tr.obs;
            for (int k = 0; k < obs_dim_; ++k) x.at(b, k) = static_cast<T>(src[off + k]);
            if (scheme_.id_input) x.at(b, obs_dim_ + agent) = T(1);
        }
        return x;
    }

    void update_critic() {
        const std::vector<size_t> idx = buffer_.sample_indices(static_cast<size_t>(cfg_.batch_size), rngs_.sampling);
        const int B = static_cast<int>(idx.size());
        const ValueView<T> actor_tgt(actor_target_);
        const ValueView<T> critic_tgt(critic_target_);

        // smoothed target actions: clipped noise on top of the target actors
        Tensor<T> joint_next(B, n_ * act_dim_);
        for (int i = 0; i < n_; ++i) {
            const Tensor<T> an = actor_of(i).eval(actor_tgt, batch_inputs(idx, i, /*next=*/true), entity_of(i));
            for (int b = 0; b < B; ++b)
                for (int d = 0; d < act_dim_; ++d) {
                    const double noise = std::clamp(cfg_.target_noise * rngs_.sampling.normal(),
                                                    -cfg_.target_noise_clip, cfg_.target_noise_clip);
                    joint_next.at(b, i * act_dim_ + d) =
                        static_cast<T>(std::clamp(static_cast<double>(an.at(b, d)) + noise, -1.0, 1.0));
                }
        }
        const Tensor<T> next_state = gather_batch<T>(
            buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.next_state; }, 0,
            state_dim_);
        const Tensor<T> x_next = concat_cols_eval<T>({&next_state, &joint_next});
        Tensor<T> q_min;
        for (int j = 0; j < K_; ++j) {
            const Tensor<T> qj = critic_eval(critic_tgt, x_next, j);
            if (j == 0) {
                q_min = qj;
            } else {
                for (int b = 0; b < B; ++b) q_min.at(b, 0) = std::min(q_min.at(b, 0), qj.at(b, 0));
            }
        }
        Tensor<T> y(B, 1);
        for (int b = 0; b < B; ++b) {
            const Transition& tr = buffer_.at(idx[static_cast<size_t>(b)]);
            y.at(b, 0) = static_cast<T>(tr.reward) +
                         static_cast<T>(cfg_.matd3_gamma) * (tr.done ? T(0) : q_min.at(b, 0));
        }

        const Tensor<T> state = gather_batch<T>(
            buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.state; }, 0, state_dim_);
        const Tensor<T> joint = gather_batch<T>(
            buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.cont_actions; }, 0,
            n_ * act_dim_);
        GradTape<T> tape;
        const int x = tape.constant(concat_cols_eval<T>({&state, &joint}));
        const int ynode = tape.constant(y);
        int loss = -1;
        for (int j = 0; j < K_; ++j) {
            const int qj = critic_forward(tape, x, j, /*trainable=*/true);
            const int lj = tape.record_mean_all(tape.record_square(tape.record_sub(qj, ynode)));
            loss = j == 0 ? lj : tape.record_add(loss, lj);
        }
        critic_store_.zero_grads();
        tape.backward(loss);
        td_loss_ = static_cast<double>(tape.value(loss).v[0]) / K_;

        if (scheme_.critic_ensemble && scheme_.diversity && critics_[0].style != WeightStyle::fixed)
            apply_diversity(critic_store_, critics_[0], K_, static_cast<double>(tape.value(loss).v[0]), cfg_.alpha,
                            nullptr);

        critic_store_.adam_step(static_cast<T>(cfg_.critic_lr));
        ++critic_updates_;
    }

    void update_actor() {
        const std::vector<size_t> idx = buffer_.sample_indices(static_cast<size_t>(cfg_.batch_size), rngs_.sampling);
        const int B = static_cast<int>(idx.size());
        const Tensor<T> state = gather_batch<T>(
            buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.state; }, 0, state_dim_);
        const Tensor<T> joint = gather_batch<T>(
            buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.cont_actions; }, 0,
            n_ * act_dim_);

        GradTape<T> tape;
        const int state_node = tape.constant(state);
        int loss = -1;
        for (int i = 0; i < n_; ++i) {
            const int xb = tape.constant(batch_inputs(idx, i, /*next=*/false));
            const int ai = actor_of(i).forward(tape, actor_store_, xb, entity_of(i), /*trainable=*/true);
            std::vector<int> parts{state_node};
            for (int j = 0; j < n_; ++j) {
                if (j == i) {
                    parts.push_back(ai);
                    continue;
                }
                Tensor<T> blk(B, act_dim_);
                for (int b = 0; b < B; ++b)
                    for (int d = 0; d < act_dim_; ++d) blk.at(b, d) = joint.at(b, j * act_dim_ + d);
                parts.push_back(tape.constant(std::move(blk)));
            }
            const int x = tape.record_concat_cols(parts);
            int q;
            if (scheme_.critic_ensemble) {
                int acc = -1;
                for (int j = 0; j < K_; ++j) {
                    const int qj = critic_forward(tape, x, j, /*trainable=*/false);
                    acc = j == 0 ? qj : tape.record_add(acc, qj);
                }
                q = tape.record_scale(acc, static_cast<T>(1.0 / K_));
            } else {
                q = critic_forward(tape, x, 0, /*trainable=*/false);
            }
            const int neg = tape.record_scale(tape.record_mean_all(q), T(-1));
            loss = i == 0 ? neg : tape.record_add(loss, neg);
        }
        actor_store_.zero_grads();
        tape.backward(loss);
        const double task = static_cast<double>(tape.value(loss).v[0]);

        div_loss_ = 0.0;
        if (scheme_.diversity && scheme_.masked())
            apply_diversity(actor_store_, actors_[0], n_, task, cfg_.beta, &div_loss_);

        actor_store_.adam_step(static_cast<T>(cfg_.actor_lr));
    }

    void apply_diversity(ParamStore<T>& store, const MaskedMlp<T>& net, int entities, double task_value, double ratio,
                         double* div_out) {
        const int L = net.arch.n_layers();
        std::vector<Tensor<T>> theta;
        for (int l = 1; l <= L; ++l) theta.push_back(store.value(net.w_name(l)));
        std::vector<std::vector<Tensor<T>>> s(static_cast<size_t>(entities));
        for (int e = 0; e < entities; ++e)
            for (int l = 1; l <= L; ++l) s[static_cast<size_t>(e)].push_back(store.value(net.s_name(l, e)));
        const std::vector<double> w = layer_weights(L, cfg_.layer_weight_base);
        const MaskMode mode = net.style == WeightStyle::soft ? MaskMode::soft : MaskMode::hard;
        double j_div;
        if (mode == MaskMode::soft) {
            j_div = diversity_objective_soft(theta, s, w);
        } else {
            j_div = diversity_objective(theta, net.all_masks(ValueView<T>(store)), w);
        }
        if (div_out) *div_out = j_div;
        const double coeff = adaptive_coefficient(task_value, j_div, ratio);
        const auto g = diversity_gradient_s(theta, s, w, mode);
        for (int e = 0; e < entities; ++e)
            for (int l = 1; l <= L; ++l) {
                Tensor<T>& dst = store.grad(net.s_name(l, e));
                const Tensor<T>& src = g[static_cast<size_t>(e)][static_cast<size_t>(l - 1)];
                for (size_t i = 0; i < dst.size(); ++i) dst.v[i] -= static_cast<T>(coeff) * src.v[i];
            }
    }

    void reset_masked_out() {
        MaskedMlp<T>& net = actors_[0];
        if (net.style != WeightStyle::soft && net.style != WeightStyle::hard) return;
        const auto masks = net.all_masks(ValueView<T>(actor_store_));
        actor_reset(actor_store_, net.theta_names(), net.thr_names(), masks, net.init_bounds(),
                    static_cast<T>(cfg_.threshold_init), cfg_.rho, rngs_.reset);
    }

    RunConfig cfg_;
    SchemeSpec scheme_;
    uint64_t seed_;
    std::unique_ptr<Env> env_;
    RngSet rngs_;
    ReplayBuffer buffer_;
    int n_ = 0, act_dim_ = 0, obs_dim_ = 0, state_dim_ = 0, in_dim_ = 0, K_ = 2;
    ParamStore<T> actor_store_, critic_store_;
    std::map<std::string, Tensor<T>> actor_target_, critic_target_;
    std::vector<MaskedMlp<T>> actors_, critics_;
    StepResult cur_;
    JointAction last_action_;
    int64_t step_ = 0, critic_updates_ = 0;
    int critic_cursor_ = 0;
    double ep_return_ = 0.0, last_train_return_ = 0.0;
    std::vector<double> window_returns_;
    double td_loss_ = 0.0, div_loss_ = 0.0;
};

}  // namespace kaleido
