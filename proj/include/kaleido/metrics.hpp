#pragma once

// Run metrics and their on-disk CSV form. The header line and the row sort
// order (seed, step, split) are part of the file format contract; writers emit
// identical bytes for identical inputs.

#include <cstdint>
#include <string>
#include <vector>

namespace kaleido {

struct MetricsRow {
    int64_t step = 0;
    uint64_t seed = 0;
    std::string scheme;
    std::string split;  // "train" | "eval"
    double ret = 0.0;
    double td_loss = 0.0;
    double div_loss = 0.0;
    double sparsity = 0.0;
    double mean_hamming = 0.0;
    int64_t flops_fwd = 0;
};

std::string metrics_header();

// Sorts a copy by (seed, step, split) and writes header + rows.
void write_metrics_csv(const std::string& path, std::vector<MetricsRow> rows);

std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace kaleido
