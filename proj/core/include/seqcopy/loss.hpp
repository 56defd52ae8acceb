#pragma once

#include "seqcopy/corpus.hpp"
#include "seqcopy/model.hpp"
#include "seqcopy/rng.hpp"

namespace seqcopy {

struct LossBreakdown {
    double total = 0.0;
    double gen_term = 0.0;
    double copy_term = 0.0;
    int gen_tokens = 0;
    int copy_spans = 0;
    int interior_tokens = 0;
};

// Teacher-forced negative log likelihood of one instance. The decoder runs
// over every target position; a position that starts a gold span contributes
// -log(p_c * p_start * p_end) with the end distribution masked to the span
// window, positions inside a span contribute nothing, and every other
// position contributes -log(p_g * p(y_t)).
//
// dropout_p > 0 applies inverted dropout (masks drawn from rng: per encoder
// position one embedding mask, then per decoder step an embedding mask
// followed, on supervised steps, by a memory-vector mask shared by the gate,
// readout and span predictor). With accumulate_grads the full backward pass
// adds this instance's gradient into the model's store.
LossBreakdown instance_loss(SeqCopyModel& model, const TrainingInstance& inst, double dropout_p,
                            Rng* rng, bool accumulate_grads);

}  // namespace seqcopy
