#pragma once

// Experiment driver: runs every configured seed (worker pool, one seed per
// task), merges metrics deterministically, writes resolved.cfg, metrics.csv
// and masks_final.json into the output directory. Also the cross-run
// comparison used by the CLI.

#include <cstdint>
#include <string>
#include <vector>

#include "kaleido/config.hpp"
#include "kaleido/metrics.hpp"

namespace kaleido {

struct SeedOutcome {
    uint64_t seed = 0;
    std::vector<MetricsRow> rows;
    bool masked = false;
    std::vector<std::vector<double>> sparsity;  // [agent][layer]
    std::vector<std::vector<double>> hamming;   // [agent][agent]
    double overall_sparsity = 0.0;
    double mean_hamming = 0.0;
};

struct ExperimentResult {
    std::string out_dir;
    std::vector<MetricsRow> rows;  // merged, sorted as written
};

// Throws if out_dir already holds a metrics.csv unless force is set.
ExperimentResult run_experiment(const RunConfig& cfg, bool force);

struct CompareRow {
    std::string scheme;
    int n_seeds = 0;
    double mean_return = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double mean_flops = 0.0;
    double norm_flops = 0.0;  // relative to the fups_id entry when present
};

// One row per directory, in input order; final eval return per seed with a
// Student-t 95% interval over seeds.
std::vector<CompareRow> compare_runs(const std::vector<std::string>& dirs);

std::string format_compare(const std::vector<CompareRow>& rows);

// Two-sided 95% critical value of Student's t.
double t_critical_975(int df);

// Fast smoke battery used by the CLI; prints one line per check, returns the
// number of failed checks.
int run_selftest();

}  // namespace kaleido
