#pragma once

// Value-factorization trainer for the discrete environment: per-agent utility
// networks combined by the monotonic mixer, epsilon-greedy collection, double
// estimation for the bootstrap action, hard target refresh counted in
// gradient steps. The sharing scheme decides how agent networks are stored
// and masked; the mixer is always one shared plain network.

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
class QmixTrainer {
public:
    QmixTrainer(const RunConfig& cfg, uint64_t seed)
        : cfg_(cfg),
          scheme_(build_scheme(cfg.scheme, cfg.mask_mode)),
          seed_(seed),
          env_(make_env(cfg.env)),
          rngs_(seed),
          buffer_(static_cast<size_t>(cfg.buffer_capacity)) {
        const EnvSpec& sp = env_->spec();
        if (!sp.discrete) throw std::invalid_argument("QmixTrainer: environment must be discrete");
        n_ = sp.n_agents;
        n_actions_ = sp.n_actions;
        obs_dim_ = sp.obs_dim;
        in_dim_ = obs_dim_ + (scheme_.id_input ? n_ : 0);

        MlpArch arch;
        arch.dims = {in_dim_, cfg_.qmix_hidden, cfg_.qmix_hidden, n_actions_};
        if (scheme_.per_agent_store) {
            for (int i = 0; i < n_; ++i) {
                MaskedMlp<T> net;
                net.prefix = "agent.a" + std::to_string(i);
                net.arch = arch;
                nets_.push_back(std::move(net));
            }
        } else {
            MaskedMlp<T> net;
            net.prefix = "agent";
            net.arch = arch;
            net.style = scheme_.style;
            net.gran = scheme_.gran;
            net.n_entities = scheme_.masked() ? n_ : 1;
            nets_.push_back(std::move(net));
        }
        for (auto& net : nets_)
            net.init(store_, rngs_.init, static_cast<T>(cfg_.threshold_init), cfg_.fixed_keep_prob);
        mixer_.n_agents = n_;
        mixer_.state_dim = sp.state_dim;
        mixer_.embed = cfg_.mixer_embed;
        mixer_.init(store_, rngs_.init);
        hard_update(target_, store_);
        cur_ = env_->reset(rngs_.env);
    }

    int64_t steps_done() const { return step_; }
    const JointAction& last_action() const { return last_action_; }
    const ParamStore<T>& store() const { return store_; }
    const SchemeSpec& scheme() const { return scheme_; }

    void step() {
        ++step_;
        const double eps = eps_at(step_ - 1);
        JointAction a;
        a.discrete.resize(static_cast<size_t>(n_));
        const ValueView<T> live(store_);
        for (int i = 0; i < n_; ++i) {
            const double coin = rngs_.exploration.uniform();
            const int random_a = rngs_.exploration.uniform_int(n_actions_);
            a.discrete[static_cast<size_t>(i)] = coin < eps ? random_a : greedy_action(live, cur_.obs[i], i);
        }
        StepResult next = env_->step(a);
        Transition tr;
        tr.obs = flatten_obs(cur_);
        tr.state = cur_.state;
        tr.actions = a.discrete;
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
        if (step_ > cfg_.warmup_steps && step_ % cfg_.qmix_update_interval == 0) update();
        // Scheduled resets stop after 80% of the run so the final policy is
        // evaluated after a recovery window, not right after a perturbation.
        if (scheme_.resets && step_ % cfg_.actor_reset_interval == 0 &&
            step_ * 5 <= cfg_.total_steps * 4)
            reset_masked_out();
    }

    double eval_return() {
        auto ev = make_env(cfg_.env);
        RngStream evrng(seed_, "eval");
        const ValueView<T> live(store_);
        double acc = 0.0;
        for (int e = 0; e < cfg_.eval_episodes; ++e) {
            StepResult sr = ev->reset(evrng);
            double ep = 0.0;
            while (!sr.done) {
                JointAction a;
                a.discrete.resize(static_cast<size_t>(n_));
                for (int i = 0; i < n_; ++i) a.discrete[static_cast<size_t>(i)] = greedy_action(live, sr.obs[i], i);
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
            for (int i = 0; i < n_; ++i) fl += mlp_fwd_flops(nets_[0].arch.dims, st.sparsity[static_cast<size_t>(i)]);
            s.flops_fwd = fl;
        } else {
            const std::vector<double> zero(nets_[0].arch.dims.size() - 1, 0.0);
            s.flops_fwd = static_cast<int64_t>(n_) * mlp_fwd_flops(nets_[0].arch.dims, zero);
        }
        return s;
    }

    MaskStats mask_stats() const {
        if (!scheme_.masked()) throw std::logic_error("QmixTrainer: scheme has no masks");
        return sparsity_stats(nets_[0].all_masks(ValueView<T>(store_)));
    }

private:
    double eps_at(int64_t s) const {
        const double p = std::min(1.0, static_cast<double>(s) / static_cast<double>(cfg_.eps_anneal_steps));
        return cfg_.eps_start - (cfg_.eps_start - cfg_.eps_end) * p;
    }

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

    const MaskedMlp<T>& net_of(int agent) const { return scheme_.per_agent_store ? nets_[static_cast<size_t>(agent)] : nets_[0]; }
    int entity_of(int agent) const { return scheme_.per_agent_store || !scheme_.masked() ? 0 : agent; }

    int greedy_action(const ValueView<T>& view, const std::vector<double>& obs, int agent) const {
        const Tensor<T> q = net_of(agent).eval(view, input_row(obs, agent), entity_of(agent));
        int best = 0;
        for (int j = 1; j < n_actions_; ++j)
            if (q.at(0, j) > q.at(0, best)) best = j;
        return best;
    }

    // Batch inputs for one agent; appends the one-hot id when the scheme asks.
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

    void update() {
        const std::vector<size_t> idx = buffer_.sample_indices(static_cast<size_t>(cfg_.batch_size), rngs_.sampling);
        const int B = static_cast<int>(idx.size());
        const ValueView<T> live(store_);
        const ValueView<T> tgt(target_);

        // bootstrap value: action chosen by the live net (double estimation)
        // or the target net, evaluated by the target net, mixed by the target
        // mixer
        Tensor<T> qs_next(B, n_);
        for (int i = 0; i < n_; ++i) {
            const Tensor<T> xb = batch_inputs(idx, i, /*next=*/true);
            const Tensor<T> q_tgt = net_of(i).eval(tgt, xb, entity_of(i));
            const Tensor<T>* chooser = &q_tgt;
            Tensor<T> q_live;
            if (cfg_.double_q) {
                q_live = net_of(i).eval(live, xb, entity_of(i));
                chooser = &q_live;
            }
            for (int b = 0; b < B; ++b) {
                int best = 0;
                for (int j = 1; j < n_actions_; ++j)
                    if (chooser->at(b, j) > chooser->at(b, best)) best = j;
                qs_next.at(b, i) = q_tgt.at(b, best);
            }
        }
        const Tensor<T> next_state =
            gather_batch<T>(buffer_, idx, [](const Transition& tr) -> const std::vector<double>& { return tr.next_state; },
                            0, env_->spec().state_dim);
        const Tensor<T> qtot_next = mixer_.eval(tgt, qs_next, next_state);
        Tensor<T> y(B, 1);
        for (int b = 0; b < B; ++b) {
            const Transition& tr = buffer_.at(idx[static_cast<size_t>(b)]);
            y.at(b, 0) = static_cast<T>(tr.reward) +
                         static_cast<T>(cfg_.qmix_gamma) * (tr.done ? T(0) : qtot_next.at(b, 0));
        }

        GradTape<T> tape;
        std::vector<int> qsel(static_cast<size_t>(n_));
        for (int i = 0; i < n_; ++i) {
            const int xb = tape.constant(batch_inputs(idx, i, /*next=*/false));
            const int qa = net_of(i).forward(tape, store_, xb, entity_of(i), /*trainable=*/true);
            std::vector<int> acts(static_cast<size_t>(B));
            for (int b = 0; b < B; ++b) acts[static_cast<size_t>(b)] = buffer_.at(idx[static_cast<size_t>(b)]).actions[static_cast<size_t>(i)];
            qsel[static_cast<size_t>(i)] = tape.record_gather_cols(qa, acts);
        }
        const int qs = tape.record_concat_cols(qsel);
        const int state_node =
            tape.constant(gather_batch<T>(buffer_, idx,
                                          [](const Transition& tr) -> const std::vector<double>& { return tr.state; },
                                          0, env_->spec().state_dim));
        const int qtot = mixer_.forward(tape, store_, qs, state_node, /*trainable=*/true);
        const int err = tape.record_sub(qtot, tape.constant(y));
        const int loss = tape.record_mean_all(tape.record_square(err));
        store_.zero_grads();
        tape.backward(loss);
        td_loss_ = static_cast<double>(tape.value(loss).v[0]);

        div_loss_ = 0.0;
        if (scheme_.diversity && scheme_.masked()) apply_diversity();

        store_.adam_step(static_cast<T>(cfg_.qmix_lr));
        ++updates_;
        if (updates_ % cfg_.target_update_interval == 0) hard_update(target_, store_);
    }

    void apply_diversity() {
        const MaskedMlp<T>& net = nets_[0];
        const int L = net.arch.n_layers();
        std::vector<Tensor<T>> theta;
        for (int l = 1; l <= L; ++l) theta.push_back(store_.value(net.w_name(l)));
        std::vector<std::vector<Tensor<T>>> s(static_cast<size_t>(n_));
        for (int e = 0; e < n_; ++e)
            for (int l = 1; l <= L; ++l) s[static_cast<size_t>(e)].push_back(store_.value(net.s_name(l, e)));
        const std::vector<double> w = layer_weights(L, cfg_.layer_weight_base);
        const MaskMode mode = net.style == WeightStyle::soft ? MaskMode::soft : MaskMode::hard;
        if (mode == MaskMode::soft) {
            div_loss_ = diversity_objective_soft(theta, s, w);
        } else {
            div_loss_ = diversity_objective(theta, net.all_masks(ValueView<T>(store_)), w);
        }
        const double beta_d = adaptive_coefficient(td_loss_, div_loss_, cfg_.beta);
        const auto g = diversity_gradient_s(theta, s, w, mode);
        for (int e = 0; e < n_; ++e)
            for (int l = 1; l <= L; ++l) {
                Tensor<T>& dst = store_.grad(net.s_name(l, e));
                const Tensor<T>& src = g[static_cast<size_t>(e)][static_cast<size_t>(l - 1)];
                for (size_t i = 0; i < dst.size(); ++i)
                    dst.v[i] -= static_cast<T>(beta_d) * src.v[i];
            }
    }

    void reset_masked_out() {
        MaskedMlp<T>& net = nets_[0];
        if (net.style != WeightStyle::soft && net.style != WeightStyle::hard) return;
        const auto masks = net.all_masks(ValueView<T>(store_));
        actor_reset(store_, net.theta_names(), net.thr_names(), masks, net.init_bounds(),
                    static_cast<T>(cfg_.threshold_init), cfg_.rho, rngs_.reset);
    }

    RunConfig cfg_;
    SchemeSpec scheme_;
    uint64_t seed_;
    std::unique_ptr<Env> env_;
    RngSet rngs_;
    ReplayBuffer buffer_;
    int n_ = 0, n_actions_ = 0, obs_dim_ = 0, in_dim_ = 0;
    ParamStore<T> store_;
    std::map<std::string, Tensor<T>> target_;
    std::vector<MaskedMlp<T>> nets_;
    MixingNet<T> mixer_;
    StepResult cur_;
    JointAction last_action_;
    int64_t step_ = 0, updates_ = 0;
    double ep_return_ = 0.0, last_train_return_ = 0.0;
    std::vector<double> window_returns_;
    double td_loss_ = 0.0, div_loss_ = 0.0;
};

}  // namespace kaleido
