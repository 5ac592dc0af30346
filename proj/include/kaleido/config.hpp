#pragma once

// INI-style run configuration: `key = value` lines under [run], [masking],
// [qmix], [matd3] sections, `#` comments. Unknown sections or keys are hard
// errors. Values of -1 on the auto-resolvable keys (beta, rho, the reset
// intervals) are filled in from the trainer and step budget; serialize()
// always emits the fully resolved form.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace kaleido {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // [run]
    std::string env = "hetero_spread";
    std::string trainer = "qmix";
    std::string scheme = "kaleidoscope";
    std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
    int64_t total_steps = 200000;
    int64_t eval_interval = 5000;
    int eval_episodes = 32;
    int batch_size = 128;
    int64_t buffer_capacity = 50000;
    int64_t warmup_steps = 1000;
    std::string precision = "f32";
    int n_workers = 0;  // 0: hardware concurrency
    std::string out_dir = "runs/out";

    // [masking]
    std::string mask_mode = "soft";  // soft | hard
    double threshold_init = -5.0;
    double alpha = 0.1;                 // critic-ensemble diversity ratio
    double beta = -1.0;                 // agent/actor diversity ratio; -1: 0.5 qmix, 0.1 matd3
    double rho = -1.0;                  // reset probability; -1: 0.1 qmix, 0.5 matd3
    int64_t actor_reset_interval = -1;  // -1: total_steps / 10
    int64_t critic_reset_interval = -1; // -1: total_steps * 2 / 25
    double layer_weight_base = 2.0;
    int ensemble_k = 5;
    double fixed_keep_prob = 0.9;

    // [qmix]
    double qmix_lr = 5e-4;
    double qmix_gamma = 0.99;
    double eps_start = 1.0;
    double eps_end = 0.05;
    int64_t eps_anneal_steps = 50000;
    int64_t target_update_interval = 200;  // in updates
    bool double_q = true;
    int qmix_hidden = 64;
    int mixer_embed = 32;
    int qmix_update_interval = 10;  // env steps per gradient step

    // [matd3]
    double actor_lr = 5e-4;
    double critic_lr = 1e-3;
    double matd3_gamma = 0.99;
    double tau = 0.005;
    int policy_delay = 2;
    double exploration_noise = 0.1;
    double target_noise = 0.2;
    double target_noise_clip = 0.5;
    int matd3_hidden = 256;
    int matd3_update_interval = 4;
};

extern const std::vector<std::string> kSchemeNames;

// Parse + resolve + validate; throws ConfigError with a line reference.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig parse_config_file(const std::string& path);

// Fill auto (-1) values from trainer and step budget.
void resolve_config(RunConfig& cfg);

// Throws ConfigError on any out-of-range or inconsistent setting.
void validate_config(const RunConfig& cfg);

// Fully resolved round-trippable text.
std::string serialize_config(const RunConfig& cfg);

}  // namespace kaleido
