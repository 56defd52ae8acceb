#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqcopy/attention.hpp"
#include "seqcopy/gru.hpp"
#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Copy switch gate: p_c = sigmoid(w2 . tanh(W1 m + b1) + b2).
struct GateParamRefs {
    const Tensor* w1 = nullptr;
    const Tensor* b1 = nullptr;
    const Tensor* w2 = nullptr;  // 1 x gate_hidden
    const Tensor* b2 = nullptr;  // 1
};

struct GateGradRefs {
    Tensor* w1 = nullptr;
    Tensor* b1 = nullptr;
    Tensor* w2 = nullptr;
    Tensor* b2 = nullptr;
};

// Returns p_c; logit_out (when given) receives the pre-sigmoid activation so
// callers can form log p_c / log p_g without cancellation.
double copy_gate(const GateParamRefs& p, std::span<const double> memory, Vec* hidden_cache = nullptr,
                 double* logit_out = nullptr);

// Backward from the gate logit; accumulates into parameter grads and dmemory.
void copy_gate_backward(const GateParamRefs& p, const GateGradRefs& g,
                        std::span<const double> memory, const Vec& hidden, double dlogit,
                        std::span<double> dmemory_acc);

// Span predictor parameters: the start query projection, the end-query
// initial-state projection, the recurrent transducer (input 2d, hidden =
// query dim) and the pointer scorer shared by start and end.
struct CopyParamRefs {
    const Tensor* w_start = nullptr;
    const Tensor* b_start = nullptr;
    const Tensor* w_end_init = nullptr;
    const Tensor* b_end_init = nullptr;
    GruParamRefs trans;
    AttentionParamRefs pointer;
};

struct CopyGradRefs {
    Tensor* w_start = nullptr;
    Tensor* b_start = nullptr;
    Tensor* w_end_init = nullptr;
    Tensor* b_end_init = nullptr;
    GruGradRefs trans;
    AttentionGradRefs pointer;
};

// Everything the copy branch derives from one memory vector. The start
// distribution is unmasked; end scores are raw (the end distribution depends
// on the chosen start only through its mask, so one score pass serves every
// candidate start).
struct SpanScores {
    Vec start_scores;
    Vec start_weights;
    Vec start_context;  // c_s
    Vec end_scores;

    // caches for the backward pass
    Vec start_query;  // q_s
    Vec end_init;     // cst
    Vec end_query;    // q_e
    AttnScoreCache start_cache, end_cache;
    GruCache trans_cache;
};

SpanScores compute_span_scores(const CopyParamRefs& p, std::span<const double> memory,
                               const std::vector<Vec>& states, const std::vector<Vec>& ptr_keys);

// Allowed end positions for a given start: [start, start + max_copy_len - 1],
// clipped to the sentence.
std::vector<std::uint8_t> end_mask(int start, int max_copy_len, int n);

struct SpanPrediction {
    int start = 0;
    int end = 0;
    double p_start = 0.0;
    double p_end = 0.0;
    Vec start_weights;
    Vec end_weights;
    Vec start_context;
};

SpanPrediction pick_best_span(const SpanScores& scores, int max_copy_len, int n);

// Stand-alone pointer attention (computes keys itself): masked weights,
// argmax position (lowest index on ties) and the weighted context.
struct PointerResult {
    Vec weights;
    int best = 0;
    Vec context;
};

PointerResult pointer_attend(const AttentionParamRefs& p, std::span<const double> query,
                             const std::vector<Vec>& states,
                             const std::vector<std::uint8_t>* mask);

// p_copy * p_start * p_end with domain checks.
double span_probability(double p_copy, double p_start, double p_end);

int argmax_lowest(const Vec& v);

}  // namespace seqcopy
