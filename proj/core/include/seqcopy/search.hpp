#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqcopy/model.hpp"
#include "seqcopy/vocab.hpp"

namespace seqcopy {

struct Action {
    enum class Kind { Generate, Copy };
    Kind kind = Kind::Generate;
    int word = -1;       // target id (generate)
    int src_start = -1;  // inclusive source positions (copy)
    int src_end = -1;
    double log_prob = 0.0;
};

// One beam path. `state` is the decoder state after the last action
// (copy-run applied); `next_input` is the token the next step consumes.
// attention_trace holds, per action, the decoder attention of the step that
// emitted it (empty for copy actions, which never need unk replacement).
struct Hypothesis {
    std::vector<Action> actions;
    double raw_score = 0.0;
    int action_count = 0;
    DecoderState state;
    int next_input = special::bos;
    bool finished = false;
    std::vector<Vec> attention_trace;

    double normalized_score() const {
        return action_count == 0 ? raw_score : raw_score / action_count;
    }
};

struct DecodeOptions {
    int beam_size = 8;
    int max_steps = 100;  // maximum number of actions
    int max_copy_len = 5;
};

// Joint greedy rule: at each step compare p_g * max_y p(y) against
// p_c * p_start * p_end for the best span and take the larger (ties pick
// generate). A copy action runs copy_run over the span interior.
// src_to_tgt maps each source position's surface word into the target
// vocabulary (unk when absent); it feeds copied words back into the decoder.
Hypothesis greedy_decode(const SeqCopyModel& model, std::span<const int> src_ids,
                         std::span<const int> src_to_tgt, const DecodeOptions& opts);

struct BeamResult {
    Hypothesis best;
    std::vector<Hypothesis> finished;
    std::vector<Hypothesis> beam;  // live hypotheses when the search stopped
};

// Beam search over mixed generate/copy actions. Each live hypothesis
// proposes its top beam_size words and its top beam_size span starts (each
// completed with the best masked end); the global top beam_size expansions
// by raw score survive. Finished hypotheses are set aside and the winner
// maximizes raw_score / action_count, falling back to live hypotheses when
// nothing finished. beam_size == 1 reproduces greedy_decode exactly.
BeamResult beam_decode(const SeqCopyModel& model, std::span<const int> src_ids,
                       std::span<const int> src_to_tgt, const DecodeOptions& opts);

// Final surface tokens: copied spans keep their source surfaces, generated
// unk tokens are replaced by the source token under the attention argmax,
// other generated tokens come from the target vocabulary. The trailing eos
// is dropped.
std::vector<std::string> replace_unk(const Hypothesis& hyp,
                                     std::span<const std::string> src_tokens,
                                     const Vocabulary& tgt_vocab);

// Same surface sequence with copied spans bracketed: "w1 [w2 w3] w4".
std::string trace_line(const Hypothesis& hyp, std::span<const std::string> src_tokens,
                       const Vocabulary& tgt_vocab);

// Source-position -> target-vocabulary id table for one source sentence.
std::vector<int> map_src_to_tgt(const std::vector<std::string>& src_tokens,
                                const Vocabulary& tgt_vocab);

}  // namespace seqcopy
