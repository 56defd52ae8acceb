#include "seqcopy/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "seqcopy/error.hpp"

namespace seqcopy {

namespace {
const char* kReserved[special::count] = {"<pad>", "<s>", "</s>", "<unk>"};
}

Vocabulary::Vocabulary() {
    for (const char* t : kReserved) push(t, 0);
}

void Vocabulary::push(const std::string& token, std::int64_t count) {
    ids_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(token);
    counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sentences,
                             int min_count) {
    if (sentences.empty()) throw EmptyInput("cannot build a vocabulary from an empty corpus");
    if (min_count < 1) throw InvalidArgument("min_count must be at least 1");

    // std::map keeps the tie order lexicographic without a second sort key
    std::map<std::string, std::int64_t> freq;
    for (const auto& sent : sentences)
        for (const auto& tok : sent) freq[tok] += 1;

    std::vector<std::pair<std::string, std::int64_t>> kept;
    for (const auto& [tok, c] : freq) {
        bool reserved = false;
        for (const char* r : kReserved) reserved |= tok == r;
        if (!reserved && c >= min_count) kept.emplace_back(tok, c);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    for (const auto& [tok, c] : kept) v.push(tok, c);
    return v;
}

int Vocabulary::to_id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? special::unk : it->second;
}

std::vector<int> Vocabulary::to_ids(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(to_id(t));
    return ids;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open vocabulary file for writing: " + path);
    for (int i = 0; i < size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open vocabulary file: " + path);

    Vocabulary v;
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("vocabulary line " + std::to_string(id) + " has no tab separator");
        const std::string tok = line.substr(0, tab);
        const std::int64_t c = std::stoll(line.substr(tab + 1));
        if (id < special::count) {
            if (tok != kReserved[id])
                throw FormatError("vocabulary line " + std::to_string(id) +
                                  " must be the reserved symbol " + kReserved[id]);
        } else {
            if (v.contains(tok)) throw FormatError("duplicate vocabulary token: " + tok);
            v.push(tok, c);
        }
        ++id;
    }
    if (id < special::count) throw FormatError("vocabulary file is missing reserved symbols");
    return v;
}

}  // namespace seqcopy
