#pragma once

// Pieces shared by both trainers: the metrics snapshot handed to the
// experiment driver and small batch-assembly helpers.

#include <cstdint>
#include <vector>

#include "kaleido/replay.hpp"
#include "kaleido/tensor.hpp"

namespace kaleido {

struct TrainSnapshot {
    double train_return = 0.0;  // mean completed-episode return in the window
    double td_loss = 0.0;
    double div_loss = 0.0;
    double sparsity = 0.0;
    double mean_hamming = 0.0;
    int64_t flops_fwd = 0;
};

// Gathers rows from per-transition vectors: accessor(transition) returns the
// source vector, offset selects the first of dim contiguous values.
template <class T, class Accessor>
Tensor<T> gather_batch(const ReplayBuffer& buf, const std::vector<size_t>& idx, Accessor accessor, size_t offset,
                       int dim) {
    Tensor<T> out(static_cast<int>(idx.size()), dim);
    for (size_t b = 0; b < idx.size(); ++b) {
        const std::vector<double>& src = accessor(buf.at(idx[b]));
        for (int k = 0; k < dim; ++k) out.at(static_cast<int>(b), k) = static_cast<T>(src[offset + k]);
    }
    return out;
}

template <class T>
Tensor<T> concat_cols_eval(const std::vector<const Tensor<T>*>& parts) {
    int total = 0;
    for (const auto* p : parts) total += p->cols;
    Tensor<T> out(parts[0]->rows, total);
    int off = 0;
    for (const auto* p : parts) {
        for (int i = 0; i < p->rows; ++i)
            for (int j = 0; j < p->cols; ++j) out.at(i, off + j) = p->at(i, j);
        off += p->cols;
    }
    return out;
}

}  // namespace kaleido
