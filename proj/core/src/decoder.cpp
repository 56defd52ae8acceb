#include "seqcopy/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "seqcopy/error.hpp"

namespace seqcopy {

MemoryVector MemoryVector::make(std::span<const double> prev_embed, std::span<const double> state,
                                std::span<const double> context) {
    MemoryVector mv;
    mv.emb_size = static_cast<int>(prev_embed.size());
    mv.hidden = static_cast<int>(state.size());
    if (context.size() != 2 * state.size())
        throw ShapeError("memory vector context must have length 2d");
    mv.m.reserve(prev_embed.size() + state.size() + context.size());
    mv.m.insert(mv.m.end(), prev_embed.begin(), prev_embed.end());
    mv.m.insert(mv.m.end(), state.begin(), state.end());
    mv.m.insert(mv.m.end(), context.begin(), context.end());
    return mv;
}

Vec maxout_pairs(std::span<const double> in, std::vector<int>* argmax) {
    if (in.size() % 2 != 0) throw ShapeError("maxout input must have even length");
    const std::size_t k = in.size() / 2;
    Vec out(k);
    if (argmax) argmax->resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        const int winner = in[2 * j] >= in[2 * j + 1] ? 0 : 1;
        out[j] = in[2 * j + winner];
        if (argmax) (*argmax)[j] = winner;
    }
    return out;
}

void maxout_pairs_backward(const std::vector<int>& argmax, std::span<const double> dout,
                           std::span<double> din_acc) {
    for (std::size_t j = 0; j < argmax.size(); ++j)
        din_acc[2 * j + argmax[j]] += dout[j];
}

Vec softmax(const Vec& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (double& x : p) x /= z;
    return p;
}

}  // namespace seqcopy
