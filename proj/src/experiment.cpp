#include "kaleido/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "kaleido/env.hpp"
#include "kaleido/flops.hpp"
#include "kaleido/trainer_matd3.hpp"
#include "kaleido/trainer_qmix.hpp"

namespace kaleido {

namespace {

namespace fs = std::filesystem;

template <class Trainer>
SeedOutcome run_seed(const RunConfig& cfg, uint64_t seed) {
    Trainer tr(cfg, seed);
    SeedOutcome out;
    out.seed = seed;
    auto emit = [&](int64_t step, bool with_train) {
        const TrainSnapshot snap = tr.metrics(true);
        MetricsRow ev;
        ev.step = step;
        ev.seed = seed;
        ev.scheme = cfg.scheme;
        ev.split = "eval";
        ev.ret = tr.eval_return();
        ev.td_loss = snap.td_loss;
        ev.div_loss = snap.div_loss;
        ev.sparsity = snap.sparsity;
        ev.mean_hamming = snap.mean_hamming;
        ev.flops_fwd = snap.flops_fwd;
        out.rows.push_back(ev);
        if (with_train) {
            MetricsRow trw = ev;
            trw.split = "train";
            trw.ret = snap.train_return;
            out.rows.push_back(std::move(trw));
        }
    };
    emit(0, false);
    for (int64_t s = 1; s <= cfg.total_steps; ++s) {
        tr.step();
        if (s % cfg.eval_interval == 0 || s == cfg.total_steps) emit(s, true);
    }
    if (tr.scheme().masked()) {
        const MaskStats st = tr.mask_stats();
        out.masked = true;
        out.sparsity = st.sparsity;
        out.hamming = st.hamming;
        out.overall_sparsity = st.overall;
        out.mean_hamming = st.mean_hamming;
    }
    return out;
}

SeedOutcome dispatch_seed(const RunConfig& cfg, uint64_t seed) {
    if (cfg.trainer == "qmix") {
        if (cfg.precision == "f64") return run_seed<QmixTrainer<double>>(cfg, seed);
        return run_seed<QmixTrainer<float>>(cfg, seed);
    }
    if (cfg.precision == "f64") return run_seed<Matd3Trainer<double>>(cfg, seed);
    return run_seed<Matd3Trainer<float>>(cfg, seed);
}

void write_masks_json(const std::string& path, const RunConfig& cfg, const std::vector<SeedOutcome>& outcomes) {
    nlohmann::ordered_json root;
    root["env"] = cfg.env;
    root["trainer"] = cfg.trainer;
    root["scheme"] = cfg.scheme;
    root["seeds"] = nlohmann::ordered_json::array();
    for (const auto& o : outcomes) {
        nlohmann::ordered_json s;
        s["seed"] = o.seed;
        s["masked"] = o.masked;
        if (o.masked) {
            s["overall_sparsity"] = o.overall_sparsity;
            s["mean_hamming"] = o.mean_hamming;
            s["sparsity"] = o.sparsity;
            s["hamming"] = o.hamming;
        }
        root["seeds"].push_back(std::move(s));
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << root.dump(2) << "\n";
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, bool force) {
    validate_config(cfg);
    const fs::path dir(cfg.out_dir);
    const fs::path metrics_path = dir / "metrics.csv";
    if (fs::exists(metrics_path) && !force)
        throw std::runtime_error("run_experiment: " + metrics_path.string() +
                                 " already exists (pass force to overwrite)");
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "resolved.cfg", std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write resolved.cfg in " + cfg.out_dir);
        f << serialize_config(cfg);
    }

    const size_t n_seeds = cfg.seeds.size();
    std::vector<SeedOutcome> outcomes(n_seeds);
    size_t workers = cfg.n_workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<size_t>(cfg.n_workers);
    workers = std::min(workers, n_seeds);
    if (workers <= 1) {
        for (size_t i = 0; i < n_seeds; ++i) outcomes[i] = dispatch_seed(cfg, cfg.seeds[i]);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (size_t i = next.fetch_add(1); i < n_seeds; i = next.fetch_add(1))
                        outcomes[i] = dispatch_seed(cfg, cfg.seeds[i]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    ExperimentResult res;
    res.out_dir = cfg.out_dir;
    for (const auto& o : outcomes) res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
    write_metrics_csv(metrics_path.string(), res.rows);
    write_masks_json((dir / "masks_final.json").string(), cfg, outcomes);
    res.rows = read_metrics_csv(metrics_path.string());
    return res;
}

double t_critical_975(int df) {
    static const double table[] = {12.706204736,  4.302652730, 3.182446305, 2.776445105, 2.570581836,
                                   2.446911849,   2.364624252, 2.306004135, 2.262157163, 2.228138852,
                                   2.200985160,   2.178812830, 2.160368656, 2.144786688, 2.131449546,
                                   2.119905299,   2.109815578, 2.100922040, 2.093024054, 2.085963447,
                                   2.079613845,   2.073873068, 2.068657610, 2.063898562, 2.059538553,
                                   2.055529439,   2.051830516, 2.048407142, 2.045229642, 2.042272456};
    if (df < 1) throw std::invalid_argument("t_critical_975: df must be >= 1");
    if (df <= 30) return table[df - 1];
    return 1.959963985;
}

std::vector<CompareRow> compare_runs(const std::vector<std::string>& dirs) {
    std::vector<CompareRow> out;
    std::string env, env_dir;
    for (const auto& d : dirs) {
        const fs::path cfg_path = fs::path(d) / "resolved.cfg";
        if (fs::exists(cfg_path)) {
            const RunConfig cfg = parse_config_file(cfg_path.string());
            if (env.empty()) {
                env = cfg.env;
                env_dir = d;
            } else if (cfg.env != env) {
                throw std::runtime_error("compare_runs: environment mismatch: " + env_dir + " ran " + env + " but " +
                                         d + " ran " + cfg.env);
            }
        }
        const auto rows = read_metrics_csv((fs::path(d) / "metrics.csv").string());
        if (rows.empty()) throw std::runtime_error("compare_runs: no rows in " + d);
        // final eval row per seed
        std::map<uint64_t, MetricsRow> finals;
        for (const auto& r : rows) {
            if (r.split != "eval") continue;
            auto it = finals.find(r.seed);
            if (it == finals.end() || r.step > it->second.step) finals[r.seed] = r;
        }
        CompareRow c;
        c.scheme = rows.front().scheme;
        c.n_seeds = static_cast<int>(finals.size());
        double acc = 0.0, facc = 0.0;
        for (const auto& [seed, r] : finals) {
            acc += r.ret;
            facc += static_cast<double>(r.flops_fwd);
        }
        c.mean_return = acc / c.n_seeds;
        c.mean_flops = facc / c.n_seeds;
        if (c.n_seeds > 1) {
            double ss = 0.0;
            for (const auto& [seed, r] : finals) ss += (r.ret - c.mean_return) * (r.ret - c.mean_return);
            const double sd = std::sqrt(ss / (c.n_seeds - 1));
            const double half = t_critical_975(c.n_seeds - 1) * sd / std::sqrt(static_cast<double>(c.n_seeds));
            c.ci_lo = c.mean_return - half;
            c.ci_hi = c.mean_return + half;
        } else {
            c.ci_lo = c.ci_hi = c.mean_return;
        }
        out.push_back(std::move(c));
    }
    double denom = 0.0;
    for (const auto& c : out)
        if (c.scheme == "fups_id") denom = c.mean_flops;
    if (denom == 0.0)
        for (const auto& c : out) denom = std::max(denom, c.mean_flops);
    for (auto& c : out) c.norm_flops = denom > 0.0 ? c.mean_flops / denom : 0.0;
    return out;
}

std::string format_compare(const std::vector<CompareRow>& rows) {
    std::ostringstream o;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-22s %5s %12s %12s %12s %12s\n", "scheme", "seeds", "final", "ci95_lo",
                  "ci95_hi", "norm_flops");
    o << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-22s %5d %12.4f %12.4f %12.4f %12.3f\n", r.scheme.c_str(), r.n_seeds,
                      r.mean_return, r.ci_lo, r.ci_hi, r.norm_flops);
        o << buf;
    }
    return o.str();
}

int run_selftest() {
    int failed = 0;
    auto check = [&](const char* name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string err;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            err = e.what();
        }
        if (ok) {
            std::cout << "[ok]   " << name << "\n";
        } else {
            ++failed;
            std::cout << "[FAIL] " << name << (err.empty() ? "" : ": " + err) << "\n";
        }
    };

    check("rng streams reproducible and independent", [] {
        RngStream a(42, "env"), b(42, "env"), c(42, "init");
        for (int i = 0; i < 5; ++i)
            if (a.u64() != b.u64()) return false;
        return b.u64() != c.u64();
    });

    check("soft-masked mlp matches finite differences", [] {
        ParamStore<double> store;
        MaskedMlp<double> net;
        net.prefix = "net";
        net.arch.dims = {3, 4, 2};
        net.arch.hidden_act = Act::tanh;
        net.style = WeightStyle::soft;
        net.n_entities = 2;
        RngStream rng(7, "init");
        net.init(store, rng, -1.0);
        // keep every weight clear of its threshold boundary
        for (int l = 1; l <= 2; ++l) {
            Tensor<double>& w = store.value(net.w_name(l));
            const Tensor<double>& s = store.value(net.s_name(l, 1));
            for (size_t i = 0; i < w.size(); ++i) {
                const double cut = sigmoid_scalar(s.v[i]);
                if (std::abs(std::abs(w.v[i]) - cut) < 1e-4) w.v[i] += 1e-2;
            }
        }
        const Tensor<double> x = Tensor<double>::uniform(2, 3, -1.0, 1.0, rng);
        auto loss_value = [&] {
            GradTape<double> t;
            const int y = net.forward(t, store, t.constant(x), 1, true);
            const int l = t.record_mean_all(t.record_square(y));
            return static_cast<double>(t.value(l).v[0]);
        };
        GradTape<double> t;
        const int y = net.forward(t, store, t.constant(x), 1, true);
        const int l = t.record_mean_all(t.record_square(y));
        store.zero_grads();
        t.backward(l);
        double worst = 0.0;
        for (const std::string& name : {net.w_name(1), net.s_name(1, 1), net.w_name(2), net.b_name(2)}) {
            const Tensor<double> fd = finite_difference_gradient(store, name, loss_value, 1e-6);
            const Tensor<double>& an = store.grad(name);
            for (size_t i = 0; i < fd.size(); ++i) {
                const double d = std::abs(fd.v[i] - an.v[i]);
                const double rel = d / (std::abs(fd.v[i]) + std::abs(an.v[i]) + 1e-12);
                worst = std::max(worst, rel);
            }
        }
        return worst < 1e-6;
    });

    check("mask cutoff is strict", [] {
        Tensor<double> w(1, 2);
        w.at(0, 0) = 0.5;
        w.at(0, 1) = 0.5 + 1e-9;
        const Tensor<double> s(1, 2, 0.0);  // sigmoid(0) = 0.5
        const Tensor<double> m = compute_mask(w, s);
        return m.at(0, 0) == 0.0 && m.at(0, 1) == 1.0;
    });

    check("scripted policy return on hetero_spread", [] { return oracle_return("hetero_spread") == 23.0; });

    check("fc/gru flop counts", [] {
        return flops_fc(64, 64, 0.0) == 8192 && flops_fc(64, 64, 0.5) == 4096 && flops_gru(64, 64) == 50816;
    });

    check("config round-trips through serialize/parse", [] {
        RunConfig cfg;
        resolve_config(cfg);
        const std::string s1 = serialize_config(cfg);
        const RunConfig cfg2 = parse_config_text(s1);
        return serialize_config(cfg2) == s1;
    });

    check("mixer output is monotone in agent values", [] {
        ParamStore<double> store;
        MixingNet<double> mixer;
        mixer.n_agents = 3;
        mixer.state_dim = 5;
        mixer.embed = 8;
        RngStream rng(11, "init");
        mixer.init(store, rng);
        const ValueView<double> view(store);
        for (int trial = 0; trial < 50; ++trial) {
            const Tensor<double> qs = Tensor<double>::uniform(1, 3, -2.0, 2.0, rng);
            const Tensor<double> st = Tensor<double>::uniform(1, 5, -1.0, 1.0, rng);
            const double base = mixer.eval(view, qs, st).at(0, 0);
            for (int i = 0; i < 3; ++i) {
                Tensor<double> up = qs;
                up.at(0, i) += 1e-3;
                if (mixer.eval(view, up, st).at(0, 0) < base - 1e-9) return false;
            }
        }
        return true;
    });

    return failed;
}

}  // namespace kaleido
