#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "seqcopy/loss.hpp"
#include "seqcopy/model.hpp"

namespace seqcopy {

struct TrainConfig {
    int batch_size = 64;
    double lr = 0.001;
    double clip = 5.0;
    double dropout = 0.4;
    int eval_every = 2000;       // batches between dev evaluations
    int decay_patience = 6;      // consecutive non-improving evals before halving lr
    int max_copy_len = 5;
    std::uint64_t seed = 1;
    std::int64_t max_batches = 0;
    bool shuffle = true;
};

struct EvalPoint {
    std::int64_t step = 0;    // batches completed
    double lr = 0.0;          // learning rate in effect after this evaluation
    double train_loss = 0.0;  // mean batch loss since the previous evaluation
    double dev_metric = 0.0;
};

struct TrainHooks {
    // Called at every evaluation, after the dev metric is computed.
    std::function<void(std::int64_t step, SeqCopyModel& model)> checkpoint;
    // Overrides the default dev metric (mean dev loss, lower is better).
    std::function<double(SeqCopyModel& model)> dev_metric;
    bool higher_is_better = false;
    // Early stop, consulted after each evaluation.
    std::function<bool(std::int64_t step, double dev_metric)> should_stop;
};

struct TrainResult {
    std::vector<EvalPoint> log;
    std::int64_t batches_run = 0;
    double final_lr = 0.0;
};

// Mini-batch training loop: per batch the gradient is the mean over
// instances, element-wise clipped, then applied with Adam. Every eval_every
// batches the dev metric is computed, a checkpoint is emitted, and the
// learning rate is halved after decay_patience consecutive evaluations
// without improvement. Deterministic for a fixed seed: each instance draws
// its dropout from a child stream keyed by a global instance counter, and
// shuffling uses a dedicated stream.
//
// Each log entry is also written to `log_out` (when given) as
// `step<TAB>lr<TAB>train_loss<TAB>dev_metric`.
TrainResult train(SeqCopyModel& model, const TrainConfig& cfg,
                  const std::vector<TrainingInstance>& train_set,
                  const std::vector<TrainingInstance>& dev_set, const TrainHooks& hooks = {},
                  std::ostream* log_out = nullptr);

// Mean instance loss over a set, dropout off, no gradients.
double mean_loss(SeqCopyModel& model, const std::vector<TrainingInstance>& set);

}  // namespace seqcopy
