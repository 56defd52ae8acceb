#include "seqcopy/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>

#include "seqcopy/error.hpp"

namespace seqcopy {

double mean_loss(SeqCopyModel& model, const std::vector<TrainingInstance>& set) {
    if (set.empty()) throw EmptyInput("cannot evaluate on an empty set");
    double sum = 0.0;
    for (const auto& inst : set) sum += instance_loss(model, inst, 0.0, nullptr, false).total;
    return sum / static_cast<double>(set.size());
}

TrainResult train(SeqCopyModel& model, const TrainConfig& cfg,
                  const std::vector<TrainingInstance>& train_set,
                  const std::vector<TrainingInstance>& dev_set, const TrainHooks& hooks,
                  std::ostream* log_out) {
    TrainResult result;
    result.final_lr = cfg.lr;
    if (cfg.max_batches <= 0) return result;
    if (train_set.empty()) throw EmptyInput("training corpus is empty");
    if (dev_set.empty() && !hooks.dev_metric) throw EmptyInput("dev corpus is empty");

    AdamConfig adam;
    adam.alpha = cfg.lr;

    Rng shuffle_rng(Rng::child_seed(cfg.seed, 0x5348554646ull));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    std::uint64_t instance_counter = 0;
    std::size_t cursor = order.size();  // forces a (re)shuffle on first use

    double best_metric = 0.0;
    bool have_best = false;
    int bad_streak = 0;
    double loss_accum = 0.0;
    std::int64_t loss_batches = 0;

    for (std::int64_t batch = 0; batch < cfg.max_batches; ++batch) {
        model.store().zero_grads();

        int in_batch = 0;
        double batch_loss = 0.0;
        for (; in_batch < cfg.batch_size; ++in_batch) {
            if (cursor >= order.size()) {
                if (cfg.shuffle)
                    for (std::size_t i = order.size(); i > 1; --i)
                        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
                cursor = 0;
                if (in_batch > 0) break;  // batches do not span epochs
            }
            const TrainingInstance& inst = train_set[order[cursor++]];
            Rng inst_rng(Rng::child_seed(cfg.seed, instance_counter++));
            batch_loss +=
                instance_loss(model, inst, cfg.dropout, &inst_rng, /*accumulate_grads=*/true)
                    .total;
        }
        batch_loss /= in_batch;
        if (!std::isfinite(batch_loss))
            throw DivergenceError("non-finite loss at batch " + std::to_string(batch + 1));

        model.store().scale_grads(1.0 / in_batch);
        clip_gradients(model.store(), cfg.clip);
        adam_step(model.store(), adam);

        loss_accum += batch_loss;
        ++loss_batches;
        ++result.batches_run;

        if (cfg.eval_every > 0 && (batch + 1) % cfg.eval_every == 0) {
            const double metric =
                hooks.dev_metric ? hooks.dev_metric(model) : mean_loss(model, dev_set);
            const bool improved =
                !have_best || (hooks.higher_is_better ? metric > best_metric : metric < best_metric);
            if (improved) {
                best_metric = metric;
                have_best = true;
                bad_streak = 0;
            } else if (++bad_streak >= cfg.decay_patience) {
                adam.alpha *= 0.5;
                bad_streak = 0;
            }

            EvalPoint pt;
            pt.step = batch + 1;
            pt.lr = adam.alpha;
            pt.train_loss = loss_accum / loss_batches;
            pt.dev_metric = metric;
            result.log.push_back(pt);
            if (log_out)
                (*log_out) << pt.step << '\t' << pt.lr << '\t' << pt.train_loss << '\t'
                           << pt.dev_metric << '\n';
            loss_accum = 0.0;
            loss_batches = 0;

            if (hooks.checkpoint) hooks.checkpoint(pt.step, model);
            if (hooks.should_stop && hooks.should_stop(pt.step, metric)) break;
        }
    }

    result.final_lr = adam.alpha;
    return result;
}

}  // namespace seqcopy
