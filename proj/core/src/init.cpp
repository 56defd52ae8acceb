#include "seqcopy/init.hpp"

#include <cmath>

namespace seqcopy {

Tensor xavier_init(const Shape& shape, Rng& rng) {
    if (shape.empty() || shape.size() > 2)
        throw ShapeError("xavier_init expects a rank-1 or rank-2 shape");
    for (int d : shape)
        if (d <= 0) throw ShapeError("xavier_init dimensions must be positive");

    const double fan_out = static_cast<double>(shape[0]);
    const double fan_in = shape.size() == 2 ? static_cast<double>(shape[1]) : fan_out;
    const double stddev = std::sqrt(2.0 / (fan_in + fan_out));

    Tensor t(shape);
    for (double& x : t.values()) x = stddev * rng.gaussian();
    return t;
}

Vec dropout_vec(std::size_t n, double p, Rng& rng, bool training) {
    if (p < 0.0 || p >= 1.0)
        throw InvalidArgument("dropout probability must be in [0, 1)");
    Vec mask(n, 1.0);
    if (!training || p == 0.0) return mask;
    const double keep_scale = 1.0 / (1.0 - p);
    for (double& m : mask) m = rng.uniform01() < p ? 0.0 : keep_scale;
    return mask;
}

Tensor dropout_mask(const Shape& shape, double p, Rng& rng, bool training) {
    Tensor t(shape);
    Vec mask = dropout_vec(static_cast<std::size_t>(t.size()), p, rng, training);
    std::copy(mask.begin(), mask.end(), t.data());
    return t;
}

}  // namespace seqcopy
