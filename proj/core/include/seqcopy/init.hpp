#pragma once

#include "seqcopy/rng.hpp"
#include "seqcopy/tensor.hpp"

namespace seqcopy {

// Gaussian init with variance 2 / (fan_in + fan_out). For rank-2 shapes
// (rows, cols), fan_out = rows and fan_in = cols; for rank-1 shapes both
// fans equal the length. Shapes of rank 0 or rank > 2 are rejected.
Tensor xavier_init(const Shape& shape, Rng& rng);

// Inverted dropout mask: while training each component is 0 with
// probability p and 1/(1-p) otherwise, so inference is a pure identity
// (all ones, no rng draws). p == 0 also draws nothing.
Tensor dropout_mask(const Shape& shape, double p, Rng& rng, bool training);

// Same mask semantics over a flat activation vector.
Vec dropout_vec(std::size_t n, double p, Rng& rng, bool training);

}  // namespace seqcopy
