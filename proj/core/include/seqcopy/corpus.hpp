#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqcopy/vocab.hpp"

namespace seqcopy {

// Aligned copy span; all positions inclusive.
struct CopySpan {
    int tgt_start = 0;
    int tgt_end = 0;
    int src_start = 0;
    int src_end = 0;

    int length() const { return tgt_end - tgt_start + 1; }
};

// One training pair after id mapping. y carries a trailing eos; spans refer
// to y positions before the eos and never cover it.
struct TrainingInstance {
    std::vector<int> x;
    std::vector<int> y;
    std::vector<CopySpan> spans;
};

struct CorpusStats {
    double fraction_generated = 0.0;
    double fraction_single_copy = 0.0;
    double fraction_multi_copy = 0.0;
};

struct RawPair {
    std::vector<std::string> source;
    std::vector<std::string> target;
};

// Reads `source<TAB>target` lines, whitespace-tokenized.
std::vector<RawPair> read_corpus(const std::string& path);
std::vector<std::string> split_tokens(const std::string& text);

// Derives copy supervision: greedy left-to-right over y, taking at each
// position the longest common substring with x (length capped at
// max_copy_len, earliest source occurrence on ties). A match becomes a span
// when its length is at least 2, or when it is a single token absent from
// the target vocabulary.
std::vector<CopySpan> annotate_spans(const std::vector<std::string>& x_tokens,
                                     const std::vector<std::string>& y_tokens, int max_copy_len,
                                     const Vocabulary& target_vocab);

TrainingInstance make_instance(const RawPair& pair, const Vocabulary& src_vocab,
                               const Vocabulary& tgt_vocab, int max_copy_len);

std::vector<TrainingInstance> make_instances(const std::vector<RawPair>& pairs,
                                             const Vocabulary& src_vocab,
                                             const Vocabulary& tgt_vocab, int max_copy_len);

// Structural checks used before computing a loss: spans sorted, disjoint,
// in bounds, never covering the eos position.
void validate_instance(const TrainingInstance& inst, int max_copy_len);

// Per-token classification over all target tokens (eos excluded): inside a
// span of length >= 2 -> multi copy, inside a length-1 span -> single copy,
// otherwise generated.
CorpusStats corpus_stats(std::span<const TrainingInstance> instances);

}  // namespace seqcopy
