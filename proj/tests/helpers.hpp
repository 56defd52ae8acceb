#pragma once

#include <memory>

#include "seqcopy/model.hpp"
#include "seqcopy/rng.hpp"

namespace seqcopy::test {

inline Tensor random_tensor(Shape shape, Rng& rng, double scale = 0.5) {
    Tensor t(std::move(shape));
    for (double& x : t.values()) x = scale * rng.gaussian();
    return t;
}

inline std::unique_ptr<SeqCopyModel> tiny_model(int emb, int hidden, int src_vocab, int tgt_vocab,
                                                int max_copy_len, std::uint64_t seed) {
    ModelDims dims;
    dims.emb_size = emb;
    dims.hidden = hidden;
    dims.src_vocab = src_vocab;
    dims.tgt_vocab = tgt_vocab;
    dims.max_copy_len = max_copy_len;
    auto model = std::make_unique<SeqCopyModel>(dims);
    Rng rng(seed);
    model->init_params(rng);
    return model;
}

// naive reference kernels, independent of seqcopy::la
inline Vec ref_matvec(const Tensor& w, const Vec& x) {
    Vec y(w.rows(), 0.0);
    for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) y[r] += w(r, c) * x[c];
    return y;
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace seqcopy::test
