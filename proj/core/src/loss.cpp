#include "seqcopy/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "seqcopy/error.hpp"
#include "seqcopy/init.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

namespace {

enum class StepKind { Generate, SpanStart, Interior };

// log(1 + e^x) without overflow
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

struct SoftmaxParts {
    Vec weights;
    double max = 0.0;
    double logz = 0.0;
};

SoftmaxParts softmax_parts(const Vec& scores, const std::vector<std::uint8_t>* allowed) {
    SoftmaxParts out;
    const std::size_t n = scores.size();
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (allowed && !(*allowed)[i]) continue;
        m = std::max(m, scores[i]);
    }
    out.max = m;
    out.weights.assign(n, 0.0);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (allowed && !(*allowed)[i]) continue;
        out.weights[i] = std::exp(scores[i] - m);
        z += out.weights[i];
    }
    for (double& w : out.weights) w /= z;
    out.logz = std::log(z);
    return out;
}

inline double log_weight(const SoftmaxParts& sm, const Vec& scores, int idx) {
    return scores[idx] - sm.max - sm.logz;
}

struct StepTrace {
    StepKind kind = StepKind::Generate;
    int input_id = 0;
    int target_word = -1;
    int span_index = -1;

    Vec emb_raw;
    Vec emb_mask;  // empty = no dropout
    Vec input;     // [emb * mask; c_prev]
    GruCache gru;

    AttnScoreCache attn_cache;
    Vec attn_weights;

    Vec memory_raw;
    Vec memory_mask;  // empty = no dropout
    Vec memory;       // masked

    Vec gate_hidden;
    double gate_logit = 0.0;
    double p_c = 0.0;

    // generate steps
    Vec readout_pre;
    std::vector<int> maxout_arg;
    Vec maxout_out;
    Vec probs;

    // span-start steps
    SpanScores span;
    std::vector<std::uint8_t> end_allowed;
    Vec end_weights;
};

}  // namespace

LossBreakdown instance_loss(SeqCopyModel& model, const TrainingInstance& inst, double dropout_p,
                            Rng* rng, bool accumulate_grads) {
    const ModelDims& dims = model.dims();
    validate_instance(inst, dims.max_copy_len);
    if (dropout_p > 0.0 && rng == nullptr)
        throw InvalidArgument("dropout requires an rng");

    const int n = static_cast<int>(inst.x.size());
    const int steps = static_cast<int>(inst.y.size());
    const int d = dims.hidden;
    const int e = dims.emb_size;
    const bool drop = dropout_p > 0.0;

    // --- supervision layout ---
    std::vector<StepKind> kinds(steps, StepKind::Generate);
    std::vector<int> span_at(steps, -1);
    for (std::size_t si = 0; si < inst.spans.size(); ++si) {
        const CopySpan& s = inst.spans[si];
        kinds[s.tgt_start] = StepKind::SpanStart;
        span_at[s.tgt_start] = static_cast<int>(si);
        for (int t = s.tgt_start + 1; t <= s.tgt_end; ++t) kinds[t] = StepKind::Interior;
    }

    // --- encoder ---
    EncoderTrace enc_trace;
    EncoderOutput enc = encode_sentence(inst.x, *model.src_embed.table, model.enc_fwd.p,
                                        model.enc_bwd.p, &enc_trace, drop ? dropout_p : 0.0, rng);

    std::vector<Vec> attn_keys(n, Vec(d)), ptr_keys(n, Vec(d));
    for (int i = 0; i < n; ++i) {
        la::matvec(*model.attn.p.w_key, enc.states[i], attn_keys[i]);
        la::matvec(*model.copy.p.pointer.w_key, enc.states[i], ptr_keys[i]);
    }

    // --- decoder initial state ---
    Vec s0(d);
    la::matvec(*model.dec_init.w, enc.backward_first, s0);
    la::add_to(model.dec_init.b->values(), s0);
    for (double& x : s0) x = std::tanh(x);

    // --- teacher-forced pass ---
    LossBreakdown loss;
    std::vector<StepTrace> trace(steps);
    std::vector<Vec> dec_states(steps), dec_contexts(steps);
    const Vec zero_ctx(2 * d, 0.0);

    for (int t = 0; t < steps; ++t) {
        StepTrace& st = trace[t];
        st.kind = kinds[t];
        st.input_id = t == 0 ? special::bos : inst.y[t - 1];
        st.target_word = inst.y[t];
        st.span_index = span_at[t];

        st.emb_raw = model.embed_tgt(st.input_id);
        const Vec& c_prev = t == 0 ? zero_ctx : dec_contexts[t - 1];
        const Vec& s_prev = t == 0 ? s0 : dec_states[t - 1];

        st.input.resize(e + 2 * d);
        if (drop) {
            st.emb_mask = dropout_vec(e, dropout_p, *rng, true);
            for (int j = 0; j < e; ++j) st.input[j] = st.emb_raw[j] * st.emb_mask[j];
        } else {
            std::copy(st.emb_raw.begin(), st.emb_raw.end(), st.input.begin());
        }
        std::copy(c_prev.begin(), c_prev.end(), st.input.begin() + e);

        dec_states[t] = gru_cell(model.dec_gru.p, st.input, s_prev, &st.gru);

        const Vec attn_scores_t =
            attention_scores(model.attn.p, dec_states[t], attn_keys, &st.attn_cache);
        st.attn_weights = masked_softmax(attn_scores_t, nullptr);
        dec_contexts[t] = weighted_sum(st.attn_weights, enc.states);

        if (st.kind == StepKind::Interior) {
            ++loss.interior_tokens;
            continue;
        }

        // memory vector and its dropout mask, shared by every consumer
        st.memory_raw.resize(e + 3 * d);
        std::copy(st.emb_raw.begin(), st.emb_raw.end(), st.memory_raw.begin());
        std::copy(dec_states[t].begin(), dec_states[t].end(), st.memory_raw.begin() + e);
        std::copy(dec_contexts[t].begin(), dec_contexts[t].end(), st.memory_raw.begin() + e + d);
        if (drop) {
            st.memory_mask = dropout_vec(st.memory_raw.size(), dropout_p, *rng, true);
            st.memory.resize(st.memory_raw.size());
            for (std::size_t j = 0; j < st.memory_raw.size(); ++j)
                st.memory[j] = st.memory_raw[j] * st.memory_mask[j];
        } else {
            st.memory = st.memory_raw;
        }

        st.p_c = copy_gate(model.gate.p, st.memory, &st.gate_hidden, &st.gate_logit);

        if (st.kind == StepKind::Generate) {
            st.readout_pre.assign(2 * d, 0.0);
            la::matvec(*model.readout.w_prev,
                       std::span<const double>(st.memory.data(), e), st.readout_pre);
            la::matvec_add(*model.readout.w_ctx,
                           std::span<const double>(st.memory.data() + e + d, 2 * (std::size_t)d),
                           st.readout_pre);
            la::matvec_add(*model.readout.w_state,
                           std::span<const double>(st.memory.data() + e, (std::size_t)d),
                           st.readout_pre);
            st.maxout_out = maxout_pairs(st.readout_pre, &st.maxout_arg);

            Vec logits(dims.tgt_vocab);
            la::matvec(*model.readout.w_out, st.maxout_out, logits);
            const SoftmaxParts sm = softmax_parts(logits, nullptr);
            st.probs = sm.weights;

            const double log_p_word = log_weight(sm, logits, st.target_word);
            const double log_p_g = -softplus(st.gate_logit);
            loss.gen_term += -(log_p_g + log_p_word);
            ++loss.gen_tokens;
        } else {
            const CopySpan& span = inst.spans[st.span_index];
            st.span = compute_span_scores(model.copy.p, st.memory, enc.states, ptr_keys);

            const SoftmaxParts start_sm = softmax_parts(st.span.start_scores, nullptr);

            st.end_allowed = end_mask(span.src_start, dims.max_copy_len, n);
            const SoftmaxParts end_sm = softmax_parts(st.span.end_scores, &st.end_allowed);
            st.end_weights = end_sm.weights;

            const double log_p_c = -softplus(-st.gate_logit);
            const double log_p_start = log_weight(start_sm, st.span.start_scores, span.src_start);
            const double log_p_end = log_weight(end_sm, st.span.end_scores, span.src_end);
            loss.copy_term += -(log_p_c + log_p_start + log_p_end);
            ++loss.copy_spans;
        }
    }
    loss.total = loss.gen_term + loss.copy_term;

    if (!accumulate_grads) return loss;

    // ------------------------------------------------------------------
    // backward
    // ------------------------------------------------------------------
    std::vector<Vec> denc_states(n, Vec(2 * d, 0.0));
    Vec ds_next(d, 0.0), dc_next(2 * d, 0.0);

    for (int t = steps - 1; t >= 0; --t) {
        StepTrace& st = trace[t];
        Vec ds = ds_next;
        Vec dc = dc_next;

        if (st.kind != StepKind::Interior) {
            Vec dmem(st.memory.size(), 0.0);

            if (st.kind == StepKind::Generate) {
                Vec dlogits = st.probs;
                dlogits[st.target_word] -= 1.0;

                la::outer_add(*model.readout.w_out_grad, dlogits, st.maxout_out);
                Vec dmax(d, 0.0);
                la::matvec_t_add(*model.readout.w_out, dlogits, dmax);

                Vec dpre(2 * d, 0.0);
                maxout_pairs_backward(st.maxout_arg, dmax, dpre);

                const std::span<const double> mem_emb(st.memory.data(), e);
                const std::span<const double> mem_state(st.memory.data() + e, (std::size_t)d);
                const std::span<const double> mem_ctx(st.memory.data() + e + d, 2 * (std::size_t)d);
                la::outer_add(*model.readout.w_prev_grad, dpre, mem_emb);
                la::outer_add(*model.readout.w_state_grad, dpre, mem_state);
                la::outer_add(*model.readout.w_ctx_grad, dpre, mem_ctx);
                la::matvec_t_add(*model.readout.w_prev, dpre,
                                 std::span<double>(dmem.data(), e));
                la::matvec_t_add(*model.readout.w_state, dpre,
                                 std::span<double>(dmem.data() + e, (std::size_t)d));
                la::matvec_t_add(*model.readout.w_ctx, dpre,
                                 std::span<double>(dmem.data() + e + d, 2 * (std::size_t)d));

                copy_gate_backward(model.gate.p, model.gate.g, st.memory, st.gate_hidden,
                                   st.p_c, dmem);
            } else {
                const CopySpan& span = inst.spans[st.span_index];
                copy_gate_backward(model.gate.p, model.gate.g, st.memory, st.gate_hidden,
                                   st.p_c - 1.0, dmem);

                // end pointer
                const Vec dscores_end = softmax_context_backward(
                    st.end_weights, enc.states, &st.end_allowed, Vec(), span.src_end, Vec(),
                    nullptr);
                Vec dq_e(d, 0.0);
                attention_scores_backward(model.copy.p.pointer, model.copy.g.pointer,
                                          st.span.end_query, enc.states, st.span.end_cache,
                                          dscores_end, dq_e, &denc_states);

                // transducer cell: input c_s, state cst
                Vec dc_s(2 * d, 0.0), dcst(d, 0.0);
                gru_cell_backward(model.copy.p.trans, model.copy.g.trans, st.span.start_context,
                                  st.span.end_init, st.span.trans_cache, dq_e, dc_s, dcst);

                // cst = tanh(W m + b)
                Vec dcst_pre(d);
                for (int j = 0; j < d; ++j)
                    dcst_pre[j] = dcst[j] * (1.0 - st.span.end_init[j] * st.span.end_init[j]);
                la::outer_add(*model.copy.g.w_end_init, dcst_pre, st.memory);
                la::add_to(dcst_pre, model.copy.g.b_end_init->values());
                la::matvec_t_add(*model.copy.p.w_end_init, dcst_pre, dmem);

                // start pointer (context feeds the transducer input)
                const Vec dscores_start = softmax_context_backward(
                    st.span.start_weights, enc.states, nullptr, Vec(), span.src_start, dc_s,
                    &denc_states);
                Vec dq_s(d, 0.0);
                attention_scores_backward(model.copy.p.pointer, model.copy.g.pointer,
                                          st.span.start_query, enc.states, st.span.start_cache,
                                          dscores_start, dq_s, &denc_states);

                // q_s = tanh(W m + b)
                Vec dqs_pre(d);
                for (int j = 0; j < d; ++j)
                    dqs_pre[j] = dq_s[j] * (1.0 - st.span.start_query[j] * st.span.start_query[j]);
                la::outer_add(*model.copy.g.w_start, dqs_pre, st.memory);
                la::add_to(dqs_pre, model.copy.g.b_start->values());
                la::matvec_t_add(*model.copy.p.w_start, dqs_pre, dmem);
            }

            // through the memory dropout mask, then split into sources
            if (!st.memory_mask.empty())
                for (std::size_t j = 0; j < dmem.size(); ++j) dmem[j] *= st.memory_mask[j];
            auto grad_row = model.tgt_embed.grad->row(st.input_id);
            for (int j = 0; j < e; ++j) grad_row[j] += dmem[j];
            for (int j = 0; j < d; ++j) ds[j] += dmem[e + j];
            for (int j = 0; j < 2 * d; ++j) dc[j] += dmem[e + d + j];
        }

        // decoder attention: context gradient flows to scores, states, query
        const Vec dscores = softmax_context_backward(st.attn_weights, enc.states, nullptr, Vec(),
                                                     -1, dc, &denc_states);
        attention_scores_backward(model.attn.p, model.attn.g, dec_states[t], enc.states,
                                  st.attn_cache, dscores, ds, &denc_states);

        // decoder GRU
        const Vec& s_prev = t == 0 ? s0 : dec_states[t - 1];
        Vec dinput(e + 2 * d, 0.0);
        Vec dprev(d, 0.0);
        gru_cell_backward(model.dec_gru.p, model.dec_gru.g, st.input, s_prev, st.gru, ds, dinput,
                          dprev);

        // embedding gradient through the input dropout mask
        auto grad_row = model.tgt_embed.grad->row(st.input_id);
        if (st.emb_mask.empty()) {
            for (int j = 0; j < e; ++j) grad_row[j] += dinput[j];
        } else {
            for (int j = 0; j < e; ++j) grad_row[j] += dinput[j] * st.emb_mask[j];
        }

        ds_next = std::move(dprev);
        std::copy(dinput.begin() + e, dinput.end(), dc_next.begin());
    }

    // initial state: s0 = tanh(W hb + b)
    Vec ds0_pre(d);
    for (int j = 0; j < d; ++j) ds0_pre[j] = ds_next[j] * (1.0 - s0[j] * s0[j]);
    la::outer_add(*model.dec_init.w_grad, ds0_pre, enc.backward_first);
    la::add_to(ds0_pre, model.dec_init.b_grad->values());
    Vec dbackward_first(d, 0.0);
    la::matvec_t_add(*model.dec_init.w, ds0_pre, dbackward_first);

    EncoderGradRefs enc_grads{model.enc_fwd.g, model.enc_bwd.g, model.src_embed.grad};
    encoder_backward(inst.x, model.enc_fwd.p, model.enc_bwd.p, enc_grads, enc_trace, denc_states,
                     dbackward_first);

    return loss;
}

}  // namespace seqcopy
