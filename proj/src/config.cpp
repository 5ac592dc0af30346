#include "kaleido/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace kaleido {

const std::vector<std::string> kSchemeNames = {
    "nops",           "fups",           "fups_id",
    "kaleidoscope",   "kaleido_fixed_mask", "kaleido_neuron_mask",
    "kaleido_no_reg", "kaleido_no_reset",   "kaleido_no_ce",
};

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Setter {
    std::function<void(RunConfig&, const std::string&, const std::string&)> apply;
};

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

double to_double(const std::string& v, const std::string& where) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        fail(where, "expected a number, got '" + v + "'");
    }
}

int64_t to_int(const std::string& v, const std::string& where) {
    try {
        size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        fail(where, "expected an integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(where, "expected true/false, got '" + v + "'");
}

std::vector<uint64_t> to_seeds(const std::string& v, const std::string& where) {
    std::vector<uint64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(where, "empty seed entry");
        try {
            size_t pos = 0;
            out.push_back(std::stoull(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            fail(where, "bad seed '" + item + "'");
        }
    }
    if (out.empty()) fail(where, "seeds list is empty");
    return out;
}

using KeyMap = std::map<std::string, std::map<std::string, Setter>>;

const KeyMap& key_map() {
    static const KeyMap m = [] {
        KeyMap km;
        auto str = [](std::string RunConfig::*f) {
            return Setter{[f](RunConfig& c, const std::string& v, const std::string&) { c.*f = v; }};
        };
        auto dbl = [](double RunConfig::*f) {
            return Setter{[f](RunConfig& c, const std::string& v, const std::string& w) { c.*f = to_double(v, w); }};
        };
        auto i64 = [](int64_t RunConfig::*f) {
            return Setter{[f](RunConfig& c, const std::string& v, const std::string& w) { c.*f = to_int(v, w); }};
        };
        auto i32 = [](int RunConfig::*f) {
            return Setter{[f](RunConfig& c, const std::string& v, const std::string& w) {
                c.*f = static_cast<int>(to_int(v, w));
            }};
        };
        auto bol = [](bool RunConfig::*f) {
            return Setter{[f](RunConfig& c, const std::string& v, const std::string& w) { c.*f = to_bool(v, w); }};
        };
        km["run"] = {
            {"env", str(&RunConfig::env)},
            {"trainer", str(&RunConfig::trainer)},
            {"scheme", str(&RunConfig::scheme)},
            {"seeds", Setter{[](RunConfig& c, const std::string& v, const std::string& w) { c.seeds = to_seeds(v, w); }}},
            {"total_steps", i64(&RunConfig::total_steps)},
            {"eval_interval", i64(&RunConfig::eval_interval)},
            {"eval_episodes", i32(&RunConfig::eval_episodes)},
            {"batch_size", i32(&RunConfig::batch_size)},
            {"buffer_capacity", i64(&RunConfig::buffer_capacity)},
            {"warmup_steps", i64(&RunConfig::warmup_steps)},
            {"precision", str(&RunConfig::precision)},
            {"n_workers", i32(&RunConfig::n_workers)},
            {"out_dir", str(&RunConfig::out_dir)},
        };
        km["masking"] = {
            {"mode", str(&RunConfig::mask_mode)},
            {"threshold_init", dbl(&RunConfig::threshold_init)},
            {"alpha", dbl(&RunConfig::alpha)},
            {"beta", dbl(&RunConfig::beta)},
            {"rho", dbl(&RunConfig::rho)},
            {"actor_reset_interval", i64(&RunConfig::actor_reset_interval)},
            {"critic_reset_interval", i64(&RunConfig::critic_reset_interval)},
            {"layer_weight_base", dbl(&RunConfig::layer_weight_base)},
            {"ensemble_k", i32(&RunConfig::ensemble_k)},
            {"fixed_keep_prob", dbl(&RunConfig::fixed_keep_prob)},
        };
        km["qmix"] = {
            {"lr", dbl(&RunConfig::qmix_lr)},
            {"gamma", dbl(&RunConfig::qmix_gamma)},
            {"eps_start", dbl(&RunConfig::eps_start)},
            {"eps_end", dbl(&RunConfig::eps_end)},
            {"eps_anneal_steps", i64(&RunConfig::eps_anneal_steps)},
            {"target_update_interval", i64(&RunConfig::target_update_interval)},
            {"double_q", bol(&RunConfig::double_q)},
            {"hidden", i32(&RunConfig::qmix_hidden)},
            {"mixer_embed", i32(&RunConfig::mixer_embed)},
            {"update_interval", i32(&RunConfig::qmix_update_interval)},
        };
        km["matd3"] = {
            {"actor_lr", dbl(&RunConfig::actor_lr)},
            {"critic_lr", dbl(&RunConfig::critic_lr)},
            {"gamma", dbl(&RunConfig::matd3_gamma)},
            {"tau", dbl(&RunConfig::tau)},
            {"policy_delay", i32(&RunConfig::policy_delay)},
            {"exploration_noise", dbl(&RunConfig::exploration_noise)},
            {"target_noise", dbl(&RunConfig::target_noise)},
            {"target_noise_clip", dbl(&RunConfig::target_noise_clip)},
            {"hidden", i32(&RunConfig::matd3_hidden)},
            {"update_interval", i32(&RunConfig::matd3_update_interval)},
        };
        return km;
    }();
    return m;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(where, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!key_map().count(section)) fail(where, "unknown section [" + section + "]");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) fail(where, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) fail(where, "key '" + key + "' outside any section");
        const auto& sect = key_map().at(section);
        auto it = sect.find(key);
        if (it == sect.end()) fail(where, "unknown key '" + key + "' in section [" + section + "]");
        if (value.empty()) fail(where, "empty value for '" + key + "'");
        it->second.apply(cfg, value, where);
    }
    resolve_config(cfg);
    validate_config(cfg);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

void resolve_config(RunConfig& cfg) {
    const bool qmix = cfg.trainer == "qmix";
    if (cfg.beta < 0.0) cfg.beta = qmix ? 0.5 : 0.1;
    if (cfg.rho < 0.0) cfg.rho = qmix ? 0.1 : 0.5;
    if (cfg.actor_reset_interval < 0) cfg.actor_reset_interval = std::max<int64_t>(1, cfg.total_steps / 10);
    if (cfg.critic_reset_interval < 0) cfg.critic_reset_interval = std::max<int64_t>(1, cfg.total_steps * 2 / 25);
}

void validate_config(const RunConfig& cfg) {
    auto req = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError("config: " + msg);
    };
    req(cfg.env == "hetero_spread" || cfg.env == "hetero_reach", "env must be hetero_spread or hetero_reach");
    req(cfg.trainer == "qmix" || cfg.trainer == "matd3", "trainer must be qmix or matd3");
    req(std::find(kSchemeNames.begin(), kSchemeNames.end(), cfg.scheme) != kSchemeNames.end(),
        "unknown scheme '" + cfg.scheme + "'");
    req(!cfg.seeds.empty(), "seeds must be non-empty");
    req(cfg.total_steps >= 1, "total_steps must be >= 1");
    req(cfg.eval_interval >= 1, "eval_interval must be >= 1");
    req(cfg.eval_episodes >= 1, "eval_episodes must be >= 1");
    req(cfg.batch_size >= 1, "batch_size must be >= 1");
    req(cfg.buffer_capacity >= cfg.batch_size, "buffer_capacity must be >= batch_size");
    req(cfg.warmup_steps >= cfg.batch_size, "warmup_steps must be >= batch_size");
    req(cfg.precision == "f32" || cfg.precision == "f64", "precision must be f32 or f64");
    req(cfg.n_workers >= 0, "n_workers must be >= 0");
    req(!cfg.out_dir.empty(), "out_dir must be non-empty");

    req(cfg.mask_mode == "soft" || cfg.mask_mode == "hard", "masking mode must be soft or hard");
    req(cfg.alpha > 0.0, "alpha must be > 0");
    req(cfg.beta > 0.0, "beta must be > 0");
    req(cfg.rho > 0.0 && cfg.rho <= 1.0, "rho must be in (0, 1]");
    req(cfg.actor_reset_interval >= 1, "actor_reset_interval must be >= 1");
    req(cfg.critic_reset_interval >= 1, "critic_reset_interval must be >= 1");
    req(cfg.layer_weight_base > 0.0, "layer_weight_base must be > 0");
    req(cfg.ensemble_k >= 2, "ensemble_k must be >= 2");
    req(cfg.fixed_keep_prob > 0.0 && cfg.fixed_keep_prob <= 1.0, "fixed_keep_prob must be in (0, 1]");

    req(cfg.qmix_lr > 0.0, "qmix lr must be > 0");
    req(cfg.qmix_gamma >= 0.0 && cfg.qmix_gamma < 1.0, "qmix gamma must be in [0, 1)");
    req(cfg.eps_start >= 0.0 && cfg.eps_start <= 1.0, "eps_start must be in [0, 1]");
    req(cfg.eps_end >= 0.0 && cfg.eps_end <= cfg.eps_start, "eps_end must be in [0, eps_start]");
    req(cfg.eps_anneal_steps >= 1, "eps_anneal_steps must be >= 1");
    req(cfg.target_update_interval >= 1, "target_update_interval must be >= 1");
    req(cfg.qmix_hidden >= 1, "qmix hidden must be >= 1");
    req(cfg.mixer_embed >= 1, "mixer_embed must be >= 1");
    req(cfg.qmix_update_interval >= 1, "qmix update_interval must be >= 1");

    req(cfg.actor_lr > 0.0, "actor_lr must be > 0");
    req(cfg.critic_lr > 0.0, "critic_lr must be > 0");
    req(cfg.matd3_gamma >= 0.0 && cfg.matd3_gamma < 1.0, "matd3 gamma must be in [0, 1)");
    req(cfg.tau > 0.0 && cfg.tau <= 1.0, "tau must be in (0, 1]");
    req(cfg.policy_delay >= 1, "policy_delay must be >= 1");
    req(cfg.exploration_noise >= 0.0, "exploration_noise must be >= 0");
    req(cfg.target_noise >= 0.0, "target_noise must be >= 0");
    req(cfg.target_noise_clip > 0.0, "target_noise_clip must be > 0");
    req(cfg.matd3_hidden >= 1, "matd3 hidden must be >= 1");
    req(cfg.matd3_update_interval >= 1, "matd3 update_interval must be >= 1");

    if (cfg.env == "hetero_spread") req(cfg.trainer == "qmix", "hetero_spread is discrete: use the qmix trainer");
    if (cfg.env == "hetero_reach") req(cfg.trainer == "matd3", "hetero_reach is continuous: use the matd3 trainer");
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream o;
    o.precision(17);
    auto num = [](double d) {
        std::ostringstream s;
        s.precision(17);
        s << d;
        return s.str();
    };
    o << "[run]\n";
    o << "env = " << cfg.env << "\n";
    o << "trainer = " << cfg.trainer << "\n";
    o << "scheme = " << cfg.scheme << "\n";
    o << "seeds = ";
    for (size_t i = 0; i < cfg.seeds.size(); ++i) o << (i ? "," : "") << cfg.seeds[i];
    o << "\n";
    o << "total_steps = " << cfg.total_steps << "\n";
    o << "eval_interval = " << cfg.eval_interval << "\n";
    o << "eval_episodes = " << cfg.eval_episodes << "\n";
    o << "batch_size = " << cfg.batch_size << "\n";
    o << "buffer_capacity = " << cfg.buffer_capacity << "\n";
    o << "warmup_steps = " << cfg.warmup_steps << "\n";
    o << "precision = " << cfg.precision << "\n";
    o << "n_workers = " << cfg.n_workers << "\n";
    o << "out_dir = " << cfg.out_dir << "\n";
    o << "\n[masking]\n";
    o << "mode = " << cfg.mask_mode << "\n";
    o << "threshold_init = " << num(cfg.threshold_init) << "\n";
    o << "alpha = " << num(cfg.alpha) << "\n";
    o << "beta = " << num(cfg.beta) << "\n";
    o << "rho = " << num(cfg.rho) << "\n";
    o << "actor_reset_interval = " << cfg.actor_reset_interval << "\n";
    o << "critic_reset_interval = " << cfg.critic_reset_interval << "\n";
    o << "layer_weight_base = " << num(cfg.layer_weight_base) << "\n";
    o << "ensemble_k = " << cfg.ensemble_k << "\n";
    o << "fixed_keep_prob = " << num(cfg.fixed_keep_prob) << "\n";
    o << "\n[qmix]\n";
    o << "lr = " << num(cfg.qmix_lr) << "\n";
    o << "gamma = " << num(cfg.qmix_gamma) << "\n";
    o << "eps_start = " << num(cfg.eps_start) << "\n";
    o << "eps_end = " << num(cfg.eps_end) << "\n";
    o << "eps_anneal_steps = " << cfg.eps_anneal_steps << "\n";
    o << "target_update_interval = " << cfg.target_update_interval << "\n";
    o << "double_q = " << (cfg.double_q ? "true" : "false") << "\n";
    o << "hidden = " << cfg.qmix_hidden << "\n";
    o << "mixer_embed = " << cfg.mixer_embed << "\n";
    o << "update_interval = " << cfg.qmix_update_interval << "\n";
    o << "\n[matd3]\n";
    o << "actor_lr = " << num(cfg.actor_lr) << "\n";
    o << "critic_lr = " << num(cfg.critic_lr) << "\n";
    o << "gamma = " << num(cfg.matd3_gamma) << "\n";
    o << "tau = " << num(cfg.tau) << "\n";
    o << "policy_delay = " << cfg.policy_delay << "\n";
    o << "exploration_noise = " << num(cfg.exploration_noise) << "\n";
    o << "target_noise = " << num(cfg.target_noise) << "\n";
    o << "target_noise_clip = " << num(cfg.target_noise_clip) << "\n";
    o << "hidden = " << cfg.matd3_hidden << "\n";
    o << "update_interval = " << cfg.matd3_update_interval << "\n";
    return o.str();
}

}  // namespace kaleido
