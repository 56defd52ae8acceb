#include "seqcopy/model.hpp"

#include <cmath>

#include "seqcopy/error.hpp"
#include "seqcopy/init.hpp"
#include "seqcopy/linalg.hpp"

namespace seqcopy {

SeqCopyModel::SeqCopyModel(ModelDims dims) : dims_(dims) {
    if (dims_.emb_size <= 0 || dims_.hidden <= 0 || dims_.src_vocab <= 0 ||
        dims_.tgt_vocab <= 0 || dims_.max_copy_len <= 0)
        throw InvalidArgument("model dimensions must be positive");
    register_params();
    bind_views();
}

void SeqCopyModel::register_params() {
    const int e = dims_.emb_size;
    const int d = dims_.hidden;
    const int mem = dims_.memory_size();

    store_.add("src_embed", Shape{dims_.src_vocab, e});
    store_.add("tgt_embed", Shape{dims_.tgt_vocab, e});

    auto add_gru = [&](const std::string& prefix, int input) {
        store_.add(prefix + ".w_update", Shape{d, input + d});
        store_.add(prefix + ".w_reset", Shape{d, input + d});
        store_.add(prefix + ".w_cand", Shape{d, input + d});
        store_.add(prefix + ".b_update", Shape{d});
        store_.add(prefix + ".b_reset", Shape{d});
        store_.add(prefix + ".b_cand", Shape{d});
    };

    add_gru("enc_fwd", e);
    add_gru("enc_bwd", e);

    store_.add("dec_init.w", Shape{d, d});
    store_.add("dec_init.b", Shape{d});

    add_gru("dec_gru", e + 2 * d);  // input is [embedding; previous context]

    store_.add("attn.w_query", Shape{d, d});
    store_.add("attn.w_key", Shape{d, 2 * d});
    store_.add("attn.v", Shape{d});

    store_.add("readout.w_prev", Shape{2 * d, e});
    store_.add("readout.w_ctx", Shape{2 * d, 2 * d});
    store_.add("readout.w_state", Shape{2 * d, d});
    store_.add("readout.w_out", Shape{dims_.tgt_vocab, d});

    store_.add("gate.w1", Shape{d, mem});
    store_.add("gate.b1", Shape{d});
    store_.add("gate.w2", Shape{1, d});
    store_.add("gate.b2", Shape{1});

    store_.add("copy.w_start", Shape{d, mem});
    store_.add("copy.b_start", Shape{d});
    store_.add("copy.w_end_init", Shape{d, mem});
    store_.add("copy.b_end_init", Shape{d});
    add_gru("copy.trans", 2 * d);  // transducer consumes the start context

    store_.add("ptr.w_query", Shape{d, d});
    store_.add("ptr.w_key", Shape{d, 2 * d});
    store_.add("ptr.v", Shape{d});
}

void SeqCopyModel::bind_views() {
    auto P = [&](const char* n) -> const Tensor* { return &store_.param(store_.index_of(n)); };
    auto G = [&](const char* n) -> Tensor* { return &store_.grad(store_.index_of(n)); };

    src_embed = {P("src_embed"), G("src_embed")};
    tgt_embed = {P("tgt_embed"), G("tgt_embed")};

    auto bind_gru = [&](const std::string& prefix) {
        GruLayer l;
        l.p = {P((prefix + ".w_update").c_str()), P((prefix + ".w_reset").c_str()),
               P((prefix + ".w_cand").c_str()),   P((prefix + ".b_update").c_str()),
               P((prefix + ".b_reset").c_str()),  P((prefix + ".b_cand").c_str())};
        l.g = {G((prefix + ".w_update").c_str()), G((prefix + ".w_reset").c_str()),
               G((prefix + ".w_cand").c_str()),   G((prefix + ".b_update").c_str()),
               G((prefix + ".b_reset").c_str()),  G((prefix + ".b_cand").c_str())};
        return l;
    };

    enc_fwd = bind_gru("enc_fwd");
    enc_bwd = bind_gru("enc_bwd");
    dec_gru = bind_gru("dec_gru");

    dec_init = {P("dec_init.w"), P("dec_init.b"), G("dec_init.w"), G("dec_init.b")};

    attn.p = {P("attn.w_query"), P("attn.w_key"), P("attn.v")};
    attn.g = {G("attn.w_query"), G("attn.w_key"), G("attn.v")};

    readout = {P("readout.w_prev"),  P("readout.w_ctx"),  P("readout.w_state"),
               P("readout.w_out"),   G("readout.w_prev"), G("readout.w_ctx"),
               G("readout.w_state"), G("readout.w_out")};

    gate.p = {P("gate.w1"), P("gate.b1"), P("gate.w2"), P("gate.b2")};
    gate.g = {G("gate.w1"), G("gate.b1"), G("gate.w2"), G("gate.b2")};

    copy.p.w_start = P("copy.w_start");
    copy.p.b_start = P("copy.b_start");
    copy.p.w_end_init = P("copy.w_end_init");
    copy.p.b_end_init = P("copy.b_end_init");
    copy.p.trans = bind_gru("copy.trans").p;
    copy.p.pointer = {P("ptr.w_query"), P("ptr.w_key"), P("ptr.v")};
    copy.g.w_start = G("copy.w_start");
    copy.g.b_start = G("copy.b_start");
    copy.g.w_end_init = G("copy.w_end_init");
    copy.g.b_end_init = G("copy.b_end_init");
    copy.g.trans = bind_gru("copy.trans").g;
    copy.g.pointer = {G("ptr.w_query"), G("ptr.w_key"), G("ptr.v")};
}

void SeqCopyModel::init_params(Rng& rng) {
    for (int i = 0; i < store_.size(); ++i) {
        const std::string& name = store_.name(i);
        const bool is_bias = name.find(".b") != std::string::npos;
        if (is_bias) continue;  // biases stay zero
        Tensor init = xavier_init(store_.param(i).shape(), rng);
        store_.param(i) = std::move(init);
    }
}

Vec SeqCopyModel::embed_src(int id) const {
    if (id < 0 || id >= src_embed.table->rows()) throw OovError("source id out of range");
    auto row = src_embed.table->row(id);
    return Vec(row.begin(), row.end());
}

Vec SeqCopyModel::embed_tgt(int id) const {
    if (id < 0 || id >= tgt_embed.table->rows()) throw OovError("target id out of range");
    auto row = tgt_embed.table->row(id);
    return Vec(row.begin(), row.end());
}

EncoderOutput SeqCopyModel::encode(std::span<const int> src_ids) const {
    return encode_sentence(src_ids, *src_embed.table, enc_fwd.p, enc_bwd.p);
}

EncoderContext SeqCopyModel::encode_ctx(std::span<const int> src_ids) const {
    EncoderContext ctx;
    ctx.out = encode(src_ids);
    const int n = ctx.out.n();
    ctx.attn_keys.assign(n, Vec(attn.p.w_key->rows()));
    ctx.ptr_keys.assign(n, Vec(copy.p.pointer.w_key->rows()));
    for (int i = 0; i < n; ++i) {
        la::matvec(*attn.p.w_key, ctx.out.states[i], ctx.attn_keys[i]);
        la::matvec(*copy.p.pointer.w_key, ctx.out.states[i], ctx.ptr_keys[i]);
    }
    return ctx;
}

DecoderState SeqCopyModel::initial_state(const EncoderOutput& enc) const {
    DecoderState st;
    st.s.resize(dims_.hidden);
    la::matvec(*dec_init.w, enc.backward_first, st.s);
    la::add_to(dec_init.b->values(), st.s);
    for (double& x : st.s) x = std::tanh(x);
    st.c.assign(dims_.context_size(), 0.0);
    st.y_prev = 1;  // BOS
    st.t = 0;
    return st;
}

StepResult SeqCopyModel::step(const DecoderState& state, const EncoderContext& enc,
                              int input_id) const {
    const Vec emb = embed_tgt(input_id);

    Vec input(emb.size() + state.c.size());
    std::copy(emb.begin(), emb.end(), input.begin());
    std::copy(state.c.begin(), state.c.end(), input.begin() + emb.size());

    StepResult r;
    r.state.s = gru_cell(dec_gru.p, input, state.s);

    const Vec scores = attention_scores(attn.p, r.state.s, enc.attn_keys);
    r.attn_weights = masked_softmax(scores, nullptr);
    r.state.c = weighted_sum(r.attn_weights, enc.out.states);
    r.state.y_prev = input_id;
    r.state.t = state.t + 1;
    r.memory = MemoryVector::make(emb, r.state.s, r.state.c);
    return r;
}

Vec SeqCopyModel::output_distribution(const MemoryVector& memory) const {
    Vec pre(dims_.readout_size());
    la::matvec(*readout.w_prev, memory.prev_embed(), pre);
    la::matvec_add(*readout.w_ctx, memory.context(), pre);
    la::matvec_add(*readout.w_state, memory.state(), pre);

    const Vec hidden = maxout_pairs(pre);
    Vec logits(dims_.tgt_vocab);
    la::matvec(*readout.w_out, hidden, logits);
    return softmax(logits);
}

double SeqCopyModel::gate_prob(const MemoryVector& memory) const {
    return copy_gate(gate.p, memory.m);
}

SpanScores SeqCopyModel::span_scores(const MemoryVector& memory, const EncoderContext& enc) const {
    return compute_span_scores(copy.p, memory.m, enc.out.states, enc.ptr_keys);
}

SpanPrediction SeqCopyModel::predict_span(const MemoryVector& memory, const EncoderContext& enc,
                                          int max_copy_len) const {
    const SpanScores scores = span_scores(memory, enc);
    return pick_best_span(scores, max_copy_len, enc.n());
}

DecoderState SeqCopyModel::copy_run(const DecoderState& state, const EncoderContext& enc,
                                    std::span<const int> copied_tgt_ids) const {
    if (copied_tgt_ids.empty())
        throw InvalidArgument("copy_run requires at least one copied word");
    DecoderState cur = state;
    for (std::size_t i = 0; i + 1 < copied_tgt_ids.size(); ++i)
        cur = step(cur, enc, copied_tgt_ids[i]).state;
    return cur;
}

}  // namespace seqcopy
