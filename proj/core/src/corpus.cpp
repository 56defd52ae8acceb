#include "seqcopy/corpus.hpp"

#include <fstream>
#include <sstream>

#include "seqcopy/error.hpp"

namespace seqcopy {

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

std::vector<RawPair> read_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file: " + path);

    std::vector<RawPair> pairs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("corpus line " + std::to_string(line_no) +
                              " has no tab between source and target");
        RawPair p;
        p.source = split_tokens(line.substr(0, tab));
        p.target = split_tokens(line.substr(tab + 1));
        if (p.source.empty() || p.target.empty())
            throw FormatError("corpus line " + std::to_string(line_no) + " has an empty side");
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw EmptyInput("corpus file is empty: " + path);
    return pairs;
}

namespace {

// Longest match of y[j..] against x starting anywhere, capped at max_len;
// earliest source position wins ties.
struct Match {
    int len = 0;
    int src = -1;
};

Match longest_match_at(const std::vector<std::string>& x, const std::vector<std::string>& y,
                       int j, int max_len) {
    Match best;
    const int nx = static_cast<int>(x.size());
    const int ny = static_cast<int>(y.size());
    for (int i = 0; i < nx; ++i) {
        int l = 0;
        while (l < max_len && i + l < nx && j + l < ny && x[i + l] == y[j + l]) ++l;
        if (l > best.len) {
            best.len = l;
            best.src = i;
        }
    }
    return best;
}

}  // namespace

std::vector<CopySpan> annotate_spans(const std::vector<std::string>& x_tokens,
                                     const std::vector<std::string>& y_tokens, int max_copy_len,
                                     const Vocabulary& target_vocab) {
    if (max_copy_len < 1) throw InvalidArgument("max_copy_len must be at least 1");

    std::vector<CopySpan> spans;
    const int ny = static_cast<int>(y_tokens.size());
    int j = 0;
    while (j < ny) {
        const Match m = longest_match_at(x_tokens, y_tokens, j, max_copy_len);
        const bool take =
            m.len >= 2 || (m.len == 1 && !target_vocab.contains(y_tokens[j]));
        if (take) {
            spans.push_back({j, j + m.len - 1, m.src, m.src + m.len - 1});
            j += m.len;
        } else {
            ++j;
        }
    }
    return spans;
}

TrainingInstance make_instance(const RawPair& pair, const Vocabulary& src_vocab,
                               const Vocabulary& tgt_vocab, int max_copy_len) {
    TrainingInstance inst;
    inst.x = src_vocab.to_ids(pair.source);
    inst.y = tgt_vocab.to_ids(pair.target);
    inst.y.push_back(special::eos);
    inst.spans = annotate_spans(pair.source, pair.target, max_copy_len, tgt_vocab);
    return inst;
}

std::vector<TrainingInstance> make_instances(const std::vector<RawPair>& pairs,
                                             const Vocabulary& src_vocab,
                                             const Vocabulary& tgt_vocab, int max_copy_len) {
    std::vector<TrainingInstance> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back(make_instance(p, src_vocab, tgt_vocab, max_copy_len));
    return out;
}

void validate_instance(const TrainingInstance& inst, int max_copy_len) {
    const int nx = static_cast<int>(inst.x.size());
    const int ny = static_cast<int>(inst.y.size());
    if (nx == 0 || ny < 2) throw InvalidInstance("instance needs a source and a non-empty target");

    int prev_end = -1;
    for (const CopySpan& s : inst.spans) {
        if (s.tgt_start <= prev_end) throw InvalidInstance("spans overlap or are unsorted");
        if (s.tgt_start > s.tgt_end || s.src_start > s.src_end)
            throw InvalidInstance("span bounds are inverted");
        if (s.tgt_end - s.tgt_start != s.src_end - s.src_start)
            throw InvalidInstance("span target/source lengths differ");
        if (s.length() > max_copy_len) throw InvalidInstance("span exceeds max copy length");
        if (s.src_end >= nx) throw InvalidInstance("span exceeds the source");
        if (s.tgt_end >= ny - 1) throw InvalidInstance("span covers the eos position");
        prev_end = s.tgt_end;
    }
}

CorpusStats corpus_stats(std::span<const TrainingInstance> instances) {
    if (instances.empty()) throw EmptyInput("corpus_stats needs at least one instance");

    std::int64_t total = 0, single = 0, multi = 0;
    for (const auto& inst : instances) {
        total += static_cast<std::int64_t>(inst.y.size()) - 1;  // eos excluded
        for (const CopySpan& s : inst.spans) {
            if (s.length() >= 2)
                multi += s.length();
            else
                single += 1;
        }
    }
    if (total <= 0) throw EmptyInput("corpus has no target tokens");

    CorpusStats st;
    st.fraction_single_copy = static_cast<double>(single) / static_cast<double>(total);
    st.fraction_multi_copy = static_cast<double>(multi) / static_cast<double>(total);
    st.fraction_generated = 1.0 - st.fraction_single_copy - st.fraction_multi_copy;
    return st;
}

}  // namespace seqcopy
