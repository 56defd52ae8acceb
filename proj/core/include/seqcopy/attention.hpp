#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Additive scoring over encoder states, shared by the decoder attention and
// the span pointer:
//   e_i = v . tanh(Wq q + Wk h_i)
// Keys (Wk h_i) are computed once per source sentence and passed in.
struct AttentionParamRefs {
    const Tensor* w_query = nullptr;
    const Tensor* w_key = nullptr;
    const Tensor* v_score = nullptr;
};

struct AttentionGradRefs {
    Tensor* w_query = nullptr;
    Tensor* w_key = nullptr;
    Tensor* v_score = nullptr;
};

struct AttnScoreCache {
    std::vector<Vec> pre;  // tanh(Wq q + Wk h_i) per position
};

// Raw scores for every source position.
Vec attention_scores(const AttentionParamRefs& p, std::span<const double> query,
                     const std::vector<Vec>& keys, AttnScoreCache* cache = nullptr);

// Softmax over the allowed positions (all when `allowed` is null), computed
// with max subtraction. Disallowed positions get weight exactly 0. Throws
// EmptySupport when nothing is allowed.
Vec masked_softmax(const Vec& scores, const std::vector<std::uint8_t>* allowed);

// context = sum_i weights[i] * states[i]
Vec weighted_sum(const Vec& weights, const std::vector<Vec>& states);

// Backward from the softmax outputs to the raw scores, also accumulating the
// state gradients contributed by a weighted-sum context. Any of dweights /
// dcontext may be empty; nll_index >= 0 adds the gradient of
// -log(weights[nll_index]) directly at the score level.
Vec softmax_context_backward(const Vec& weights, const std::vector<Vec>& states,
                             const std::vector<std::uint8_t>* allowed, const Vec& dweights,
                             int nll_index, const Vec& dcontext,
                             std::vector<Vec>* dstates_acc);

// Backward from raw scores to the query, the states (through the keys), and
// the attention parameters.
void attention_scores_backward(const AttentionParamRefs& p, const AttentionGradRefs& g,
                               std::span<const double> query, const std::vector<Vec>& states,
                               const AttnScoreCache& cache, const Vec& descores,
                               std::span<double> dquery_acc, std::vector<Vec>* dstates_acc);

}  // namespace seqcopy
