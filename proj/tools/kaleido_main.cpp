#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kaleido/config.hpp"
#include "kaleido/env.hpp"
#include "kaleido/experiment.hpp"
#include "kaleido/flops.hpp"

namespace {

// KALEIDO_SEED narrows the configured seed list to a single seed.
void apply_seed_override(kaleido::RunConfig& cfg) {
    const char* env = std::getenv("KALEIDO_SEED");
    if (!env || !*env) return;
    try {
        size_t pos = 0;
        const uint64_t seed = std::stoull(env, &pos);
        if (pos != std::string(env).size()) throw std::invalid_argument("trailing");
        cfg.seeds = {seed};
    } catch (const std::exception&) {
        throw kaleido::ConfigError(std::string("KALEIDO_SEED is not an integer: ") + env);
    }
}

int cmd_run(const std::string& config_path, const std::string& out_override, bool force) {
    kaleido::RunConfig cfg = kaleido::parse_config_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    apply_seed_override(cfg);
    const kaleido::ExperimentResult res = kaleido::run_experiment(cfg, force);
    std::cout << "wrote " << res.out_dir << "/metrics.csv (" << res.rows.size() << " rows), resolved.cfg, masks_final.json\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs) {
    const auto rows = kaleido::compare_runs(dirs);
    std::cout << kaleido::format_compare(rows);
    return 0;
}

int cmd_flops(const std::string& arch, double sparsity) {
    std::string env_name;
    std::vector<int> dims;
    int n_agents = 0;
    if (arch == "qmix") {
        env_name = "hetero_spread";
        const auto env = kaleido::make_env(env_name);
        dims = {env->spec().obs_dim, 64, 64, env->spec().n_actions};
        n_agents = env->spec().n_agents;
    } else if (arch == "matd3") {
        env_name = "hetero_reach";
        const auto env = kaleido::make_env(env_name);
        dims = {env->spec().obs_dim, 256, 256, env->spec().act_dim};
        n_agents = env->spec().n_agents;
    } else {
        std::cerr << "unknown arch '" << arch << "' (expected qmix or matd3)\n";
        return 1;
    }
    std::cout << "arch " << arch << " on " << env_name << ", dims";
    for (int d : dims) std::cout << " " << d;
    std::cout << ", sparsity " << sparsity << "\n";
    int64_t total = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int64_t fl = kaleido::flops_fc(dims[l], dims[l + 1], sparsity);
        total += fl;
        std::cout << "  layer " << l + 1 << ": fc " << dims[l] << "x" << dims[l + 1] << " -> " << fl << " flops\n";
    }
    std::cout << "  per-agent forward: " << total << " flops\n";
    std::cout << "  all " << n_agents << " agents: " << total * n_agents << " flops\n";
    std::cout << "  reference gru(64,64): " << kaleido::flops_gru(64, 64) << " flops\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kaleido: adaptive partial parameter sharing trainers"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    bool force = false;
    auto* run = app.add_subcommand("run", "train every configured seed and write metrics");
    run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_override, "override out_dir from the config");
    run->add_flag("--force", force, "overwrite an existing metrics.csv");

    std::vector<std::string> dirs;
    auto* compare = app.add_subcommand("compare", "summarize finished runs side by side");
    compare->add_option("dirs", dirs, "run output directories")->required()->expected(-1);

    std::string arch;
    double sparsity = 0.0;
    auto* flops = app.add_subcommand("flops", "forward-pass flop accounting for a trainer architecture");
    flops->add_option("--arch", arch, "qmix or matd3")->required();
    flops->add_option("--sparsity", sparsity, "masked-out weight fraction")->check(CLI::Range(0.0, 1.0));

    auto* selftest = app.add_subcommand("selftest", "run the built-in smoke checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_override, force);
        if (compare->parsed()) return cmd_compare(dirs);
        if (flops->parsed()) return cmd_flops(arch, sparsity);
        if (selftest->parsed()) {
            const int failed = kaleido::run_selftest();
            std::cout << (failed == 0 ? "selftest passed\n" : "selftest FAILED\n");
            return failed == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
