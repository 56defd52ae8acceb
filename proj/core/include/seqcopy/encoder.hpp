#pragma once

#include <span>
#include <vector>

#include "seqcopy/gru.hpp"
#include "seqcopy/rng.hpp"
#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Bidirectional encoder output. states[i] is the concatenation
// [forward_i; backward_i] (length 2d). backward_first is the backward half
// of states[0]; the decoder is initialized from it.
struct EncoderOutput {
    std::vector<Vec> states;
    Vec backward_first;

    int n() const { return static_cast<int>(states.size()); }
};

// Per-position activations kept for the training backward pass.
struct EncoderTrace {
    std::vector<Vec> inputs;     // embeddings after dropout
    std::vector<Vec> emb_masks;  // empty when dropout is off
    std::vector<GruCache> fwd_caches, bwd_caches;
    std::vector<Vec> fwd_states, bwd_states;
};

// Runs the forward GRU left to right and the backward GRU right to left,
// both from zero initial states, and concatenates per position. Dropout
// (train time only) applies one mask per source position, shared by both
// directions.
EncoderOutput encode_sentence(std::span<const int> token_ids, const Tensor& embeddings,
                              const GruParamRefs& fwd, const GruParamRefs& bwd,
                              EncoderTrace* trace = nullptr, double dropout_p = 0.0,
                              Rng* rng = nullptr);

struct EncoderGradRefs {
    GruGradRefs fwd;
    GruGradRefs bwd;
    Tensor* embeddings = nullptr;
};

// dstates are gradients w.r.t. the concatenated states; dbackward_first
// (may be empty) adds to the backward state at position 0.
void encoder_backward(std::span<const int> token_ids, const GruParamRefs& fwd,
                      const GruParamRefs& bwd, const EncoderGradRefs& grads,
                      const EncoderTrace& trace, const std::vector<Vec>& dstates,
                      const Vec& dbackward_first);

}  // namespace seqcopy
