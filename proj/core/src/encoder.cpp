#include "seqcopy/encoder.hpp"

#include <algorithm>

#include "seqcopy/error.hpp"
#include "seqcopy/init.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

EncoderOutput encode_sentence(std::span<const int> token_ids, const Tensor& embeddings,
                              const GruParamRefs& fwd, const GruParamRefs& bwd,
                              EncoderTrace* trace, double dropout_p, Rng* rng) {
    const int n = static_cast<int>(token_ids.size());
    if (n == 0) throw EmptyInput("cannot encode an empty sentence");
    for (int id : token_ids)
        if (id < 0 || id >= embeddings.rows())
            throw OovError("token id " + std::to_string(id) + " outside embedding table");

    const int d = fwd.hidden_size();
    const bool use_dropout = dropout_p > 0.0;

    std::vector<Vec> inputs(n);
    std::vector<Vec> masks;
    if (use_dropout) masks.resize(n);
    for (int i = 0; i < n; ++i) {
        auto row = embeddings.row(token_ids[i]);
        inputs[i].assign(row.begin(), row.end());
        if (use_dropout) {
            masks[i] = dropout_vec(inputs[i].size(), dropout_p, *rng, true);
            for (std::size_t j = 0; j < inputs[i].size(); ++j) inputs[i][j] *= masks[i][j];
        }
    }

    std::vector<Vec> fwd_states(n), bwd_states(n);
    std::vector<GruCache> fwd_caches, bwd_caches;
    if (trace) {
        fwd_caches.resize(n);
        bwd_caches.resize(n);
    }

    const Vec zero(d, 0.0);
    for (int i = 0; i < n; ++i) {
        const Vec& prev = i == 0 ? zero : fwd_states[i - 1];
        fwd_states[i] = gru_cell(fwd, inputs[i], prev, trace ? &fwd_caches[i] : nullptr);
    }
    for (int i = n - 1; i >= 0; --i) {
        const Vec& prev = i == n - 1 ? zero : bwd_states[i + 1];
        bwd_states[i] = gru_cell(bwd, inputs[i], prev, trace ? &bwd_caches[i] : nullptr);
    }

    EncoderOutput out;
    out.states.resize(n);
    for (int i = 0; i < n; ++i) {
        out.states[i].resize(2 * d);
        std::copy(fwd_states[i].begin(), fwd_states[i].end(), out.states[i].begin());
        std::copy(bwd_states[i].begin(), bwd_states[i].end(), out.states[i].begin() + d);
    }
    out.backward_first = bwd_states[0];

    if (trace) {
        trace->inputs = std::move(inputs);
        trace->emb_masks = std::move(masks);
        trace->fwd_caches = std::move(fwd_caches);
        trace->bwd_caches = std::move(bwd_caches);
        trace->fwd_states = std::move(fwd_states);
        trace->bwd_states = std::move(bwd_states);
    }
    return out;
}

void encoder_backward(std::span<const int> token_ids, const GruParamRefs& fwd,
                      const GruParamRefs& bwd, const EncoderGradRefs& grads,
                      const EncoderTrace& trace, const std::vector<Vec>& dstates,
                      const Vec& dbackward_first) {
    const int n = static_cast<int>(token_ids.size());
    const int d = fwd.hidden_size();
    const std::size_t emb = trace.inputs[0].size();
    const Vec zero(d, 0.0);

    std::vector<Vec> dinputs(n, Vec(emb, 0.0));

    // forward direction: chain runs from the last position to the first
    Vec chain(d, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        Vec dh(dstates[i].begin(), dstates[i].begin() + d);
        la::add_to(chain, dh);
        Vec dprev(d, 0.0);
        const Vec& prev = i == 0 ? zero : trace.fwd_states[i - 1];
        gru_cell_backward(fwd, grads.fwd, trace.inputs[i], prev, trace.fwd_caches[i], dh,
                          dinputs[i], dprev);
        chain = std::move(dprev);
    }

    // backward direction: computed right-to-left, so reverse-mode runs
    // left-to-right
    chain.assign(d, 0.0);
    for (int i = 0; i < n; ++i) {
        Vec dh(dstates[i].begin() + d, dstates[i].end());
        la::add_to(chain, dh);
        if (i == 0 && !dbackward_first.empty()) la::add_to(dbackward_first, dh);
        Vec dprev(d, 0.0);
        const Vec& prev = i == n - 1 ? zero : trace.bwd_states[i + 1];
        gru_cell_backward(bwd, grads.bwd, trace.inputs[i], prev, trace.bwd_caches[i], dh,
                          dinputs[i], dprev);
        chain = std::move(dprev);
    }

    for (int i = 0; i < n; ++i) {
        auto grad_row = grads.embeddings->row(token_ids[i]);
        if (trace.emb_masks.empty()) {
            la::add_to(dinputs[i], grad_row);
        } else {
            for (std::size_t j = 0; j < emb; ++j) grad_row[j] += dinputs[i][j] * trace.emb_masks[i][j];
        }
    }
}

}  // namespace seqcopy
