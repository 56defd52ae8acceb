#include "seqcopy/copy_module.hpp"

#include <algorithm>
#include <cmath>

#include "seqcopy/error.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

int argmax_lowest(const Vec& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double copy_gate(const GateParamRefs& p, std::span<const double> memory, Vec* hidden_cache,
                 double* logit_out) {
    if (static_cast<int>(memory.size()) != p.w1->cols())
        throw ShapeError("gate input size mismatch");
    if (p.w2->rows() != 1) throw ShapeError("gate output layer must have one unit");

    Vec hidden(p.w1->rows());
    la::matvec(*p.w1, memory, hidden);
    la::add_to(p.b1->values(), hidden);
    for (double& h : hidden) h = std::tanh(h);

    const double logit = la::dot(p.w2->row(0), hidden) + (*p.b2)[0];
    if (hidden_cache) *hidden_cache = std::move(hidden);
    if (logit_out) *logit_out = logit;
    return sigmoid(logit);
}

void copy_gate_backward(const GateParamRefs& p, const GateGradRefs& g,
                        std::span<const double> memory, const Vec& hidden, double dlogit,
                        std::span<double> dmemory_acc) {
    la::axpy(dlogit, hidden, g.w2->row(0));
    (*g.b2)[0] += dlogit;

    Vec dhidden(hidden.size());
    for (std::size_t i = 0; i < hidden.size(); ++i)
        dhidden[i] = dlogit * p.w2->row(0)[i] * (1.0 - hidden[i] * hidden[i]);

    la::outer_add(*g.w1, dhidden, memory);
    la::add_to(dhidden, g.b1->values());
    la::matvec_t_add(*p.w1, dhidden, dmemory_acc);
}

SpanScores compute_span_scores(const CopyParamRefs& p, std::span<const double> memory,
                               const std::vector<Vec>& states, const std::vector<Vec>& ptr_keys) {
    SpanScores s;

    // start query
    s.start_query.resize(p.w_start->rows());
    la::matvec(*p.w_start, memory, s.start_query);
    la::add_to(p.b_start->values(), s.start_query);
    for (double& x : s.start_query) x = std::tanh(x);

    s.start_scores = attention_scores(p.pointer, s.start_query, ptr_keys, &s.start_cache);
    s.start_weights = masked_softmax(s.start_scores, nullptr);
    s.start_context = weighted_sum(s.start_weights, states);

    // transducer: initial state from the memory vector, one update on c_s
    s.end_init.resize(p.w_end_init->rows());
    la::matvec(*p.w_end_init, memory, s.end_init);
    la::add_to(p.b_end_init->values(), s.end_init);
    for (double& x : s.end_init) x = std::tanh(x);

    s.end_query = gru_cell(p.trans, s.start_context, s.end_init, &s.trans_cache);
    s.end_scores = attention_scores(p.pointer, s.end_query, ptr_keys, &s.end_cache);
    return s;
}

std::vector<std::uint8_t> end_mask(int start, int max_copy_len, int n) {
    std::vector<std::uint8_t> mask(n, 0);
    const int hi = std::min(n - 1, start + max_copy_len - 1);
    for (int i = start; i <= hi; ++i) mask[i] = 1;
    return mask;
}

SpanPrediction pick_best_span(const SpanScores& scores, int max_copy_len, int n) {
    SpanPrediction out;
    out.start_weights = scores.start_weights;
    out.start_context = scores.start_context;
    out.start = argmax_lowest(scores.start_weights);
    out.p_start = scores.start_weights[out.start];

    const auto mask = end_mask(out.start, max_copy_len, n);
    out.end_weights = masked_softmax(scores.end_scores, &mask);
    out.end = argmax_lowest(out.end_weights);
    out.p_end = out.end_weights[out.end];
    return out;
}

PointerResult pointer_attend(const AttentionParamRefs& p, std::span<const double> query,
                             const std::vector<Vec>& states,
                             const std::vector<std::uint8_t>* mask) {
    std::vector<Vec> keys(states.size(), Vec(p.w_key->rows()));
    for (std::size_t i = 0; i < states.size(); ++i) la::matvec(*p.w_key, states[i], keys[i]);

    PointerResult r;
    const Vec scores = attention_scores(p, query, keys, nullptr);
    r.weights = masked_softmax(scores, mask);
    r.best = argmax_lowest(r.weights);
    r.context = weighted_sum(r.weights, states);
    return r;
}

double span_probability(double p_copy, double p_start, double p_end) {
    for (double x : {p_copy, p_start, p_end})
        if (!(x >= 0.0 && x <= 1.0))
            throw InvalidArgument("span probability factors must be in [0, 1]");
    return p_copy * p_start * p_end;
}

}  // namespace seqcopy
