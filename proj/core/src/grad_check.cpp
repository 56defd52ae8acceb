#include "seqcopy/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "seqcopy/error.hpp"

namespace seqcopy {

double check_gradients(const std::function<double(ParameterStore&)>& loss, ParameterStore& store,
                       double epsilon) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");

    const double base_a = loss(store);
    const double base_b = loss(store);
    if (base_a != base_b)
        throw DeterminismError("loss evaluator is not deterministic");

    double max_rel = 0.0;
    for (int i = 0; i < store.size(); ++i) {
        Tensor& p = store.param(i);
        const Tensor& g = store.grad(i);
        for (std::int64_t k = 0; k < p.size(); ++k) {
            const double saved = p[k];
            p[k] = saved + epsilon;
            const double up = loss(store);
            p[k] = saved - epsilon;
            const double down = loss(store);
            p[k] = saved;

            const double numeric = (up - down) / (2.0 * epsilon);
            const double analytic = g[k];
            const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace seqcopy
