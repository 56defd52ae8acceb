#include "seqcopy/search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqcopy/error.hpp"

namespace seqcopy {

namespace {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// Everything one step computes before an action is chosen.
struct StepScores {
    StepResult res;
    double gate_logit = 0.0;
    double log_p_c = 0.0;
    double log_p_g = 0.0;
    Vec word_probs;
    SpanScores span;
};

StepScores score_step(const SeqCopyModel& model, const EncoderContext& ctx,
                      const DecoderState& state, int input_id) {
    StepScores s;
    s.res = model.step(state, ctx, input_id);
    copy_gate(model.gate.p, s.res.memory.m, nullptr, &s.gate_logit);
    s.log_p_c = -softplus(-s.gate_logit);
    s.log_p_g = -softplus(s.gate_logit);
    s.word_probs = model.output_distribution(s.res.memory);
    s.span = model.span_scores(s.res.memory, ctx);
    return s;
}

// Indices of the k largest values, ordered by (value desc, index asc).
std::vector<int> top_k(const Vec& v, int k) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    const int take = std::min<int>(k, static_cast<int>(v.size()));
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                      [&](int a, int b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
    idx.resize(take);
    return idx;
}

std::vector<int> copied_ids(std::span<const int> src_to_tgt, int start, int end) {
    std::vector<int> ids;
    ids.reserve(end - start + 1);
    for (int i = start; i <= end; ++i) ids.push_back(src_to_tgt[i]);
    return ids;
}

void apply_generate(Hypothesis& hyp, const StepScores& s, int word, double logp) {
    hyp.actions.push_back({Action::Kind::Generate, word, -1, -1, logp});
    hyp.raw_score += logp;
    hyp.action_count += 1;
    hyp.attention_trace.push_back(s.res.attn_weights);
    hyp.state = s.res.state;
    hyp.next_input = word;
    if (word == special::eos) hyp.finished = true;
}

void apply_copy(Hypothesis& hyp, const SeqCopyModel& model, const EncoderContext& ctx,
                const StepScores& s, std::span<const int> src_to_tgt, int start, int end,
                double logp) {
    hyp.actions.push_back({Action::Kind::Copy, -1, start, end, logp});
    hyp.raw_score += logp;
    hyp.action_count += 1;
    hyp.attention_trace.emplace_back();
    const std::vector<int> ids = copied_ids(src_to_tgt, start, end);
    hyp.state = model.copy_run(s.res.state, ctx, ids);
    hyp.next_input = ids.back();
}

void check_inputs(std::span<const int> src_ids, std::span<const int> src_to_tgt,
                  const DecodeOptions& opts) {
    if (src_ids.empty()) throw EmptyInput("cannot decode an empty source");
    if (src_to_tgt.size() != src_ids.size())
        throw InvalidArgument("src_to_tgt must align with the source");
    if (opts.max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
    if (opts.beam_size < 1) throw InvalidArgument("beam_size must be at least 1");
}

}  // namespace

Hypothesis greedy_decode(const SeqCopyModel& model, std::span<const int> src_ids,
                         std::span<const int> src_to_tgt, const DecodeOptions& opts) {
    check_inputs(src_ids, src_to_tgt, opts);
    const EncoderContext ctx = model.encode_ctx(src_ids);
    const int n = ctx.n();

    Hypothesis hyp;
    hyp.state = model.initial_state(ctx.out);
    hyp.next_input = special::bos;

    for (int step = 0; step < opts.max_steps && !hyp.finished; ++step) {
        const StepScores s = score_step(model, ctx, hyp.state, hyp.next_input);

        const int best_word = argmax_lowest(s.word_probs);
        const double log_gen = s.log_p_g + std::log(s.word_probs[best_word]);

        const int best_start = argmax_lowest(s.span.start_weights);
        const auto mask = end_mask(best_start, opts.max_copy_len, n);
        const Vec end_w = masked_softmax(s.span.end_scores, &mask);
        const int best_end = argmax_lowest(end_w);
        const double log_copy = s.log_p_c + std::log(s.span.start_weights[best_start]) +
                                std::log(end_w[best_end]);

        if (log_gen >= log_copy)
            apply_generate(hyp, s, best_word, log_gen);
        else
            apply_copy(hyp, model, ctx, s, src_to_tgt, best_start, best_end, log_copy);
    }
    return hyp;
}

BeamResult beam_decode(const SeqCopyModel& model, std::span<const int> src_ids,
                       std::span<const int> src_to_tgt, const DecodeOptions& opts) {
    check_inputs(src_ids, src_to_tgt, opts);
    const EncoderContext ctx = model.encode_ctx(src_ids);
    const int n = ctx.n();

    struct Candidate {
        int parent = 0;
        bool copy = false;
        int word = -1;
        int start = -1;
        int end = -1;
        double action_logp = 0.0;
        double new_raw = 0.0;
    };

    BeamResult result;
    std::vector<Hypothesis> live(1);
    live[0].state = model.initial_state(ctx.out);
    live[0].next_input = special::bos;

    for (int step = 0; step < opts.max_steps && !live.empty(); ++step) {
        std::vector<StepScores> scored;
        scored.reserve(live.size());
        std::vector<Candidate> cands;

        for (int p = 0; p < static_cast<int>(live.size()); ++p) {
            scored.push_back(score_step(model, ctx, live[p].state, live[p].next_input));
            const StepScores& s = scored.back();

            for (int w : top_k(s.word_probs, opts.beam_size)) {
                Candidate c;
                c.parent = p;
                c.word = w;
                c.action_logp = s.log_p_g + std::log(s.word_probs[w]);
                c.new_raw = live[p].raw_score + c.action_logp;
                cands.push_back(c);
            }
            for (int st : top_k(s.span.start_weights, opts.beam_size)) {
                const auto mask = end_mask(st, opts.max_copy_len, n);
                const Vec end_w = masked_softmax(s.span.end_scores, &mask);
                const int en = argmax_lowest(end_w);
                Candidate c;
                c.parent = p;
                c.copy = true;
                c.start = st;
                c.end = en;
                c.action_logp = s.log_p_c + std::log(s.span.start_weights[st]) +
                                std::log(end_w[en]);
                c.new_raw = live[p].raw_score + c.action_logp;
                cands.push_back(c);
            }
        }

        // raw score decides; ties prefer generate, then the smaller ids, so
        // the expansion order is a total order and runs are reproducible
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.new_raw != b.new_raw) return a.new_raw > b.new_raw;
            if (a.copy != b.copy) return !a.copy;
            if (a.word != b.word) return a.word < b.word;
            if (a.start != b.start) return a.start < b.start;
            if (a.end != b.end) return a.end < b.end;
            return a.parent < b.parent;
        });
        if (static_cast<int>(cands.size()) > opts.beam_size) cands.resize(opts.beam_size);

        std::vector<Hypothesis> next_live;
        for (const Candidate& c : cands) {
            Hypothesis hyp = live[c.parent];
            if (c.copy)
                apply_copy(hyp, model, ctx, scored[c.parent], src_to_tgt, c.start, c.end,
                           c.action_logp);
            else
                apply_generate(hyp, scored[c.parent], c.word, c.action_logp);

            if (hyp.finished)
                result.finished.push_back(std::move(hyp));
            else
                next_live.push_back(std::move(hyp));
        }
        live = std::move(next_live);
    }

    result.beam = live;

    const auto better = [](const Hypothesis& a, const Hypothesis& b) {
        if (a.normalized_score() != b.normalized_score())
            return a.normalized_score() > b.normalized_score();
        return a.raw_score > b.raw_score;
    };

    const std::vector<Hypothesis>& pool = result.finished.empty() ? result.beam : result.finished;
    if (pool.empty()) throw InternalError("beam search produced no hypotheses");
    const Hypothesis* best = &pool[0];
    for (const Hypothesis& h : pool)
        if (better(h, *best)) best = &h;
    result.best = *best;
    return result;
}

std::vector<std::string> replace_unk(const Hypothesis& hyp,
                                     std::span<const std::string> src_tokens,
                                     const Vocabulary& tgt_vocab) {
    if (hyp.attention_trace.size() != hyp.actions.size())
        throw InternalError("attention trace is not aligned with the actions");

    std::vector<std::string> out;
    for (std::size_t i = 0; i < hyp.actions.size(); ++i) {
        const Action& a = hyp.actions[i];
        if (a.kind == Action::Kind::Copy) {
            for (int p = a.src_start; p <= a.src_end; ++p) out.push_back(src_tokens[p]);
            continue;
        }
        if (a.word == special::eos) continue;
        if (a.word == special::unk) {
            const Vec& w = hyp.attention_trace[i];
            if (w.empty()) throw InternalError("generated unk token lacks attention weights");
            out.push_back(src_tokens[argmax_lowest(w)]);
        } else {
            out.push_back(tgt_vocab.token(a.word));
        }
    }
    return out;
}

std::string trace_line(const Hypothesis& hyp, std::span<const std::string> src_tokens,
                       const Vocabulary& tgt_vocab) {
    std::string out;
    auto append = [&out](const std::string& s) {
        if (!out.empty()) out += ' ';
        out += s;
    };
    for (std::size_t i = 0; i < hyp.actions.size(); ++i) {
        const Action& a = hyp.actions[i];
        if (a.kind == Action::Kind::Copy) {
            std::string chunk = "[";
            for (int p = a.src_start; p <= a.src_end; ++p) {
                if (p > a.src_start) chunk += ' ';
                chunk += src_tokens[p];
            }
            chunk += ']';
            append(chunk);
        } else if (a.word != special::eos) {
            if (a.word == special::unk && i < hyp.attention_trace.size() &&
                !hyp.attention_trace[i].empty())
                append(src_tokens[argmax_lowest(hyp.attention_trace[i])]);
            else
                append(tgt_vocab.token(a.word));
        }
    }
    return out;
}

std::vector<int> map_src_to_tgt(const std::vector<std::string>& src_tokens,
                                const Vocabulary& tgt_vocab) {
    std::vector<int> ids;
    ids.reserve(src_tokens.size());
    for (const auto& t : src_tokens) ids.push_back(tgt_vocab.to_id(t));
    return ids;
}

}  // namespace seqcopy
