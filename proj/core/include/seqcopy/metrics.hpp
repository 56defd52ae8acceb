#pragma once

#include <string>
#include <vector>

namespace seqcopy {

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

using Tokens = std::vector<std::string>;

// Clipped n-gram overlap; empty n-gram sets on either side yield zeros.
PrfScore rouge_n(const Tokens& candidate, const Tokens& reference, int n);

// Longest common subsequence with beta = 1 F-measure.
PrfScore rouge_l(const Tokens& candidate, const Tokens& reference);

// Corpus-level BLEU with clipped 1..4-gram precisions, geometric mean and
// brevity penalty; one reference per candidate, no smoothing (any zero
// n-gram precision zeroes the score).
double bleu4(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references);

}  // namespace seqcopy
