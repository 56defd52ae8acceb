#include "seqcopy/attention.hpp"

#include <cmath>
#include <limits>

#include "seqcopy/error.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

Vec attention_scores(const AttentionParamRefs& p, std::span<const double> query,
                     const std::vector<Vec>& keys, AttnScoreCache* cache) {
    const int attn_dim = p.w_query->rows();
    if (static_cast<int>(query.size()) != p.w_query->cols())
        throw ShapeError("attention query size mismatch");

    Vec query_proj(attn_dim);
    la::matvec(*p.w_query, query, query_proj);

    const std::size_t n = keys.size();
    Vec scores(n);
    if (cache) cache->pre.assign(n, Vec());
    Vec pre(attn_dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < attn_dim; ++j) pre[j] = std::tanh(query_proj[j] + keys[i][j]);
        scores[i] = la::dot(p.v_score->values(), pre);
        if (cache) cache->pre[i] = pre;
    }
    return scores;
}

Vec masked_softmax(const Vec& scores, const std::vector<std::uint8_t>* allowed) {
    const std::size_t n = scores.size();
    double max_score = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (allowed && !(*allowed)[i]) continue;
        any = true;
        max_score = std::max(max_score, scores[i]);
    }
    if (!any) throw EmptySupport("all positions masked out");

    Vec w(n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (allowed && !(*allowed)[i]) continue;
        w[i] = std::exp(scores[i] - max_score);
        z += w[i];
    }
    for (std::size_t i = 0; i < n; ++i) w[i] /= z;
    return w;
}

Vec weighted_sum(const Vec& weights, const std::vector<Vec>& states) {
    Vec out(states.empty() ? 0 : states[0].size(), 0.0);
    for (std::size_t i = 0; i < states.size(); ++i)
        if (weights[i] != 0.0) la::axpy(weights[i], states[i], out);
    return out;
}

Vec softmax_context_backward(const Vec& weights, const std::vector<Vec>& states,
                             const std::vector<std::uint8_t>* allowed, const Vec& dweights,
                             int nll_index, const Vec& dcontext,
                             std::vector<Vec>* dstates_acc) {
    const std::size_t n = weights.size();
    Vec dw(n, 0.0);
    if (!dweights.empty())
        for (std::size_t i = 0; i < n; ++i) dw[i] = dweights[i];

    if (!dcontext.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            if (allowed && !(*allowed)[i]) continue;
            dw[i] += la::dot(dcontext, states[i]);
            if (dstates_acc) la::axpy(weights[i], dcontext, (*dstates_acc)[i]);
        }
    }

    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) inner += weights[i] * dw[i];

    Vec descores(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (allowed && !(*allowed)[i]) continue;
        descores[i] = weights[i] * (dw[i] - inner);
        if (nll_index >= 0)
            descores[i] += weights[i] - (static_cast<int>(i) == nll_index ? 1.0 : 0.0);
    }
    return descores;
}

void attention_scores_backward(const AttentionParamRefs& p, const AttentionGradRefs& g,
                               std::span<const double> query, const std::vector<Vec>& states,
                               const AttnScoreCache& cache, const Vec& descores,
                               std::span<double> dquery_acc, std::vector<Vec>* dstates_acc) {
    const int attn_dim = p.w_query->rows();
    Vec dquery_proj(attn_dim, 0.0);
    Vec dpre(attn_dim);

    for (std::size_t i = 0; i < descores.size(); ++i) {
        if (descores[i] == 0.0) continue;
        const Vec& pre = cache.pre[i];
        for (int j = 0; j < attn_dim; ++j)
            dpre[j] = descores[i] * (*p.v_score)[j] * (1.0 - pre[j] * pre[j]);
        la::axpy(descores[i], pre, g.v_score->values());
        la::add_to(dpre, dquery_proj);
        la::outer_add(*g.w_key, dpre, states[i]);
        if (dstates_acc) la::matvec_t_add(*p.w_key, dpre, (*dstates_acc)[i]);
    }

    la::outer_add(*g.w_query, dquery_proj, query);
    la::matvec_t_add(*p.w_query, dquery_proj, dquery_acc);
}

}  // namespace seqcopy
