#pragma once

#include <functional>

#include "seqcopy/param_store.hpp"

namespace seqcopy {

// Central finite-difference gradient check.
//
// Preconditions: `loss` is a deterministic function of the store's parameter
// values (dropout off or driven by a frozen seed), and the store's gradient
// buffers already hold the analytic gradient of `loss` at the current
// parameters. Each component is perturbed by +/- epsilon and the relative
// error |a - n| / max(|a|, |n|, 1e-8) is collected; the maximum is returned.
//
// Throws DeterminismError when two baseline evaluations of `loss` disagree.
double check_gradients(const std::function<double(ParameterStore&)>& loss, ParameterStore& store,
                       double epsilon);

}  // namespace seqcopy
