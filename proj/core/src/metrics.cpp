#include "seqcopy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "seqcopy/error.hpp"

namespace seqcopy {

namespace {

std::unordered_map<std::string, int> ngram_counts(const Tokens& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key += '\x1f';
            key += tokens[i + j];
        }
        counts[key] += 1;
    }
    return counts;
}

PrfScore prf(double overlap, double cand_total, double ref_total) {
    PrfScore s;
    s.precision = cand_total > 0 ? overlap / cand_total : 0.0;
    s.recall = ref_total > 0 ? overlap / ref_total : 0.0;
    s.f1 = s.precision + s.recall > 0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

}  // namespace

PrfScore rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
    if (n < 1) throw InvalidArgument("rouge_n needs n >= 1");
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);

    double overlap = 0.0, cand_total = 0.0, ref_total = 0.0;
    for (const auto& [g, c] : cand) {
        cand_total += c;
        auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    for (const auto& [g, c] : ref) ref_total += c;
    return prf(overlap, cand_total, ref_total);
}

PrfScore rouge_l(const Tokens& candidate, const Tokens& reference) {
    const std::size_t m = candidate.size(), n = reference.size();
    std::vector<int> prev(n + 1, 0), cur(n + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                          : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = prev[n];
    return prf(lcs, static_cast<double>(m), static_cast<double>(n));
}

double bleu4(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references) {
    if (candidates.size() != references.size())
        throw InvalidArgument("bleu4 needs one reference per candidate");

    constexpr int kMaxOrder = 4;
    double match[kMaxOrder] = {0, 0, 0, 0};
    double total[kMaxOrder] = {0, 0, 0, 0};
    double cand_len = 0.0, ref_len = 0.0;

    for (std::size_t k = 0; k < candidates.size(); ++k) {
        cand_len += static_cast<double>(candidates[k].size());
        ref_len += static_cast<double>(references[k].size());
        for (int n = 1; n <= kMaxOrder; ++n) {
            const auto cand = ngram_counts(candidates[k], n);
            const auto ref = ngram_counts(references[k], n);
            for (const auto& [g, c] : cand) {
                total[n - 1] += c;
                auto it = ref.find(g);
                if (it != ref.end()) match[n - 1] += std::min(c, it->second);
            }
        }
    }

    double log_precision_sum = 0.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        if (total[n] == 0.0 || match[n] == 0.0) return 0.0;
        log_precision_sum += std::log(match[n] / total[n]);
    }
    if (cand_len == 0.0) return 0.0;
    const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
    return bp * std::exp(log_precision_sum / kMaxOrder);
}

}  // namespace seqcopy
