#pragma once

#include <span>
#include <vector>

#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Decoder recurrent state. c is the attention context fed into the next
// GRU update; at t == 0 it is all zeros and y_prev is the BOS id.
struct DecoderState {
    Vec s;
    Vec c;
    int y_prev = -1;
    int t = 0;
};

// Concatenation [embedding(y_prev); s_t; c_t] with slice access.
struct MemoryVector {
    Vec m;
    int emb_size = 0;
    int hidden = 0;

    static MemoryVector make(std::span<const double> prev_embed, std::span<const double> state,
                             std::span<const double> context);

    std::span<const double> prev_embed() const { return {m.data(), static_cast<std::size_t>(emb_size)}; }
    std::span<const double> state() const {
        return {m.data() + emb_size, static_cast<std::size_t>(hidden)};
    }
    std::span<const double> context() const {
        return {m.data() + emb_size + hidden, static_cast<std::size_t>(2 * hidden)};
    }
};

// out[j] = max(in[2j], in[2j+1]); even-length input required. Ties pick the
// lower index so the backward routing is deterministic.
Vec maxout_pairs(std::span<const double> in, std::vector<int>* argmax = nullptr);

void maxout_pairs_backward(const std::vector<int>& argmax, std::span<const double> dout,
                           std::span<double> din_acc);

// Numerically stable softmax (max subtraction) over a full vector.
Vec softmax(const Vec& logits);

}  // namespace seqcopy
