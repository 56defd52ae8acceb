#pragma once

#include <span>

#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Gated recurrent cell:
//   z = sigmoid(Wu [x; h] + bu)
//   r = sigmoid(Wr [x; h] + br)
//   n = tanh(Wc [x; r*h] + bc)
//   h' = (1 - z) * h + z * n
// Weight rows are the hidden dimension, columns the concatenated
// [input; hidden]. Bias pointers may be null (bias-free cell).
struct GruParamRefs {
    const Tensor* w_update = nullptr;
    const Tensor* w_reset = nullptr;
    const Tensor* w_cand = nullptr;
    const Tensor* b_update = nullptr;
    const Tensor* b_reset = nullptr;
    const Tensor* b_cand = nullptr;

    int hidden_size() const { return w_update->rows(); }
    int input_size() const { return w_update->cols() - w_update->rows(); }
};

struct GruGradRefs {
    Tensor* w_update = nullptr;
    Tensor* w_reset = nullptr;
    Tensor* w_cand = nullptr;
    Tensor* b_update = nullptr;
    Tensor* b_reset = nullptr;
    Tensor* b_cand = nullptr;
};

// Activations the backward pass needs.
struct GruCache {
    Vec update;      // z
    Vec reset;       // r
    Vec cand;        // n
    Vec gated_prev;  // r * h_prev
};

Vec gru_cell(const GruParamRefs& p, std::span<const double> x, std::span<const double> h_prev,
             GruCache* cache = nullptr);

// Accumulates parameter gradients and the gradients w.r.t. the cell inputs.
// dx_acc and dh_prev_acc are += targets sized like x and h_prev.
void gru_cell_backward(const GruParamRefs& p, const GruGradRefs& g, std::span<const double> x,
                       std::span<const double> h_prev, const GruCache& cache,
                       std::span<const double> dh_out, std::span<double> dx_acc,
                       std::span<double> dh_prev_acc);

}  // namespace seqcopy
