#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace seqcopy {

// Reserved token ids, fixed across every vocabulary.
namespace special {
constexpr int pad = 0;
constexpr int bos = 1;
constexpr int eos = 2;
constexpr int unk = 3;
constexpr int count = 4;
}  // namespace special

// Bidirectional token <-> id map with frequency counts. Ids 0..3 are the
// reserved symbols <pad>, <s>, </s>, <unk>; remaining tokens are ordered by
// descending count, ties broken lexicographically, so construction is
// deterministic.
class Vocabulary {
public:
    Vocabulary();

    static Vocabulary build(const std::vector<std::vector<std::string>>& sentences, int min_count);

    int size() const { return static_cast<int>(tokens_.size()); }
    bool contains(const std::string& token) const { return ids_.count(token) != 0; }

    // Unknown tokens map to the unk id.
    int to_id(const std::string& token) const;
    const std::string& token(int id) const { return tokens_[id]; }
    std::int64_t count(int id) const { return counts_[id]; }

    std::vector<int> to_ids(const std::vector<std::string>& tokens) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    void push(const std::string& token, std::int64_t count);

    std::vector<std::string> tokens_;
    std::vector<std::int64_t> counts_;
    std::unordered_map<std::string, int> ids_;
};

}  // namespace seqcopy
