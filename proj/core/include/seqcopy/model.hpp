#pragma once

#include <span>
#include <vector>

#include "seqcopy/attention.hpp"
#include "seqcopy/copy_module.hpp"
#include "seqcopy/decoder.hpp"
#include "seqcopy/encoder.hpp"
#include "seqcopy/gru.hpp"
#include "seqcopy/param_store.hpp"
#include "seqcopy/rng.hpp"

namespace seqcopy {

struct ModelDims {
    int emb_size = 300;
    int hidden = 512;
    int src_vocab = 0;
    int tgt_vocab = 0;
    int max_copy_len = 5;

    // derived sizes; attention, gate hidden and pointer query dims all track
    // the hidden size
    int context_size() const { return 2 * hidden; }
    int memory_size() const { return emb_size + 3 * hidden; }
    int readout_size() const { return 2 * hidden; }
};

// Encoder output plus the per-position key projections reused by every
// decoding step (decoder attention keys and pointer keys).
struct EncoderContext {
    EncoderOutput out;
    std::vector<Vec> attn_keys;
    std::vector<Vec> ptr_keys;

    int n() const { return out.n(); }
};

struct StepResult {
    DecoderState state;
    Vec attn_weights;
    MemoryVector memory;
};

// Full model: owns the parameter store and exposes the forward operations
// used at inference time. The training pass (instance_loss) drives the same
// layer primitives with caches retained for backpropagation.
class SeqCopyModel {
public:
    explicit SeqCopyModel(ModelDims dims);

    SeqCopyModel(const SeqCopyModel&) = delete;
    SeqCopyModel& operator=(const SeqCopyModel&) = delete;
    SeqCopyModel(SeqCopyModel&&) = delete;

    // Xavier-initializes every weight matrix and score vector, in
    // registration order; biases stay zero.
    void init_params(Rng& rng);

    const ModelDims& dims() const { return dims_; }
    ParameterStore& store() { return store_; }
    const ParameterStore& store() const { return store_; }

    EncoderOutput encode(std::span<const int> src_ids) const;
    EncoderContext encode_ctx(std::span<const int> src_ids) const;

    DecoderState initial_state(const EncoderOutput& enc) const;
    StepResult step(const DecoderState& state, const EncoderContext& enc, int input_id) const;

    // Softmax over the target vocabulary from a step's memory vector.
    Vec output_distribution(const MemoryVector& memory) const;
    double gate_prob(const MemoryVector& memory) const;
    SpanScores span_scores(const MemoryVector& memory, const EncoderContext& enc) const;
    SpanPrediction predict_span(const MemoryVector& memory, const EncoderContext& enc,
                                int max_copy_len) const;

    // Advances the decoder over the first l-1 words of an l-word copied
    // span; for l == 1 the state is returned unchanged. The caller feeds the
    // final copied word to the next ordinary step.
    DecoderState copy_run(const DecoderState& state, const EncoderContext& enc,
                          std::span<const int> copied_tgt_ids) const;

    Vec embed_src(int id) const;
    Vec embed_tgt(int id) const;

    // --- layer views (stable for the lifetime of the model) ---
    struct EmbeddingLayer {
        const Tensor* table = nullptr;
        Tensor* grad = nullptr;
    };
    struct LinearRefs {
        const Tensor* w = nullptr;
        const Tensor* b = nullptr;
        Tensor* w_grad = nullptr;
        Tensor* b_grad = nullptr;
    };
    struct GruLayer {
        GruParamRefs p;
        GruGradRefs g;
    };
    struct AttentionLayer {
        AttentionParamRefs p;
        AttentionGradRefs g;
    };
    struct ReadoutRefs {
        const Tensor *w_prev = nullptr, *w_ctx = nullptr, *w_state = nullptr, *w_out = nullptr;
        Tensor *w_prev_grad = nullptr, *w_ctx_grad = nullptr, *w_state_grad = nullptr,
               *w_out_grad = nullptr;
    };
    struct GateLayer {
        GateParamRefs p;
        GateGradRefs g;
    };
    struct CopyLayer {
        CopyParamRefs p;
        CopyGradRefs g;
    };

    EmbeddingLayer src_embed;
    EmbeddingLayer tgt_embed;
    GruLayer enc_fwd;
    GruLayer enc_bwd;
    LinearRefs dec_init;
    GruLayer dec_gru;
    AttentionLayer attn;
    ReadoutRefs readout;
    GateLayer gate;
    CopyLayer copy;

private:
    void register_params();
    void bind_views();

    ModelDims dims_;
    ParameterStore store_;
};

}  // namespace seqcopy
