#pragma once

// Forward-pass FLOP accounting. Fully-connected cost counts multiply-adds over
// the surviving weights only; sparsity is the masked-out fraction.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kaleido {

inline int64_t flops_fc(int in, int out, double sparsity) {
    if (in < 0 || out < 0) throw std::invalid_argument("flops_fc: negative dims");
    if (sparsity < 0.0 || sparsity > 1.0) throw std::invalid_argument("flops_fc: sparsity out of [0,1]");
    return static_cast<int64_t>(std::floor(2.0 * (1.0 - sparsity) * in * out));
}

inline int64_t flops_gru(int in, int hidden) {
    if (in < 0 || hidden < 0) throw std::invalid_argument("flops_gru: negative dims");
    const int64_t h = hidden, i = in;
    return 2 * (3 * h * h + 3 * i * h + 13 * h);
}

// Per-layer sparsities; one entry per weight matrix.
inline int64_t mlp_fwd_flops(const std::vector<int>& dims, const std::vector<double>& sparsity) {
    if (dims.size() < 2) throw std::invalid_argument("mlp_fwd_flops: need at least one layer");
    if (sparsity.size() != dims.size() - 1) throw std::invalid_argument("mlp_fwd_flops: sparsity count mismatch");
    int64_t total = 0;
    for (size_t l = 0; l + 1 < dims.size(); ++l) total += flops_fc(dims[l], dims[l + 1], sparsity[l]);
    return total;
}

}  // namespace kaleido
