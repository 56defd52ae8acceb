#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "seqcopy/grad_check.hpp"
#include "seqcopy/loss.hpp"
#include "seqcopy/trainer.hpp"
#include "seqcopy/vocab.hpp"

using namespace seqcopy;
using seqcopy::test::tiny_model;

namespace {

TrainingInstance simple_instance() {
    TrainingInstance inst;
    inst.x = {4, 5, 6, 7};
    inst.y = {5, 6, 4, special::eos};  // span copies x[1..2] to y[0..1]
    inst.spans = {{0, 1, 1, 2}};
    return inst;
}

}  // namespace

TEST_CASE("instance_loss closed forms with zero parameters") {
    // all-zero parameters: p_c = 0.5 and the word distribution is uniform
    ModelDims dims;
    dims.emb_size = 3;
    dims.hidden = 4;
    dims.src_vocab = 6;
    dims.tgt_vocab = 4;  // reserved symbols only -> p(y) = 1/4
    auto model = std::make_unique<SeqCopyModel>(dims);

    SUBCASE("generated steps pay -log(p_g * p(y))") {
        TrainingInstance inst;
        inst.x = {4, 5};
        inst.y = {special::unk, special::eos};
        const LossBreakdown lb = instance_loss(*model, inst, 0.0, nullptr, false);
        CHECK(lb.gen_tokens == 2);
        CHECK(lb.copy_spans == 0);
        CHECK(lb.total == doctest::Approx(2.0 * -std::log(0.5 * 0.25)).epsilon(1e-12));
        CHECK(lb.total == doctest::Approx(lb.gen_term + lb.copy_term).epsilon(1e-12));
    }

    SUBCASE("a span start over a single-position source pays exactly -log p_c") {
        TrainingInstance inst;
        inst.x = {4};
        inst.y = {special::unk, special::eos};
        inst.spans = {{0, 0, 0, 0}};  // p_start = p_end = 1 over one position
        const LossBreakdown lb = instance_loss(*model, inst, 0.0, nullptr, false);
        CHECK(lb.copy_spans == 1);
        CHECK(lb.copy_term == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
        CHECK(lb.gen_term == doctest::Approx(-std::log(0.5 * 0.25)).epsilon(1e-12));
    }
}

TEST_CASE("instance_loss validates the instance and its arguments") {
    auto model = tiny_model(3, 4, 10, 9, 5, 71);
    TrainingInstance bad = simple_instance();
    bad.spans = {{0, 1, 1, 2}, {1, 2, 0, 1}};  // overlapping
    CHECK_THROWS_AS(instance_loss(*model, bad, 0.0, nullptr, false), InvalidInstance);

    TrainingInstance covers_eos = simple_instance();
    covers_eos.spans = {{2, 3, 1, 2}};
    CHECK_THROWS_AS(instance_loss(*model, covers_eos, 0.0, nullptr, false), InvalidInstance);

    CHECK_THROWS_AS(instance_loss(*model, simple_instance(), 0.4, nullptr, false),
                    InvalidArgument);
}

TEST_CASE("instance_loss is deterministic and non-negative") {
    auto model = tiny_model(4, 5, 12, 10, 5, 73);
    const TrainingInstance inst = simple_instance();
    const LossBreakdown a = instance_loss(*model, inst, 0.0, nullptr, false);
    const LossBreakdown b = instance_loss(*model, inst, 0.0, nullptr, false);
    CHECK(a.total == b.total);  // bitwise
    CHECK(a.total >= 0.0);
    CHECK(a.gen_term >= 0.0);
    CHECK(a.copy_term >= 0.0);
}

TEST_CASE("teacher-forced loss agrees with the inference operations") {
    // the training pass and the step-by-step model ops must describe the
    // same function when dropout is off
    auto model = tiny_model(4, 5, 12, 10, 5, 79);
    const TrainingInstance inst = simple_instance();
    const double total = instance_loss(*model, inst, 0.0, nullptr, false).total;

    const EncoderContext ctx = model->encode_ctx(inst.x);
    DecoderState state = model->initial_state(ctx.out);
    double manual = 0.0;
    for (std::size_t t = 0; t < inst.y.size(); ++t) {
        const int input = t == 0 ? special::bos : inst.y[t - 1];
        const StepResult r = model->step(state, ctx, input);
        const double p_c = model->gate_prob(r.memory);
        if (!inst.spans.empty() && static_cast<int>(t) == inst.spans[0].tgt_start) {
            const CopySpan& s = inst.spans[0];
            const SpanScores sc = model->span_scores(r.memory, ctx);
            const auto mask = end_mask(s.src_start, model->dims().max_copy_len, ctx.n());
            const Vec end_w = masked_softmax(sc.end_scores, &mask);
            manual += -std::log(p_c * sc.start_weights[s.src_start] * end_w[s.src_end]);
        } else if (!inst.spans.empty() && static_cast<int>(t) > inst.spans[0].tgt_start &&
                   static_cast<int>(t) <= inst.spans[0].tgt_end) {
            // interior: no loss
        } else {
            const Vec probs = model->output_distribution(r.memory);
            manual += -std::log((1.0 - p_c) * probs[inst.y[t]]);
        }
        state = r.state;
    }
    CHECK(total == doctest::Approx(manual).epsilon(1e-12));
}

namespace {

// Central finite differences can only resolve a derivative down to
// ulp(loss)/(2 eps) ~ 2e-10 here, so components whose true gradient sits
// near zero cannot be compared relatively. Assert absolute agreement
// everywhere plus relative agreement wherever the gradient is resolvable.
void check_against_finite_differences(SeqCopyModel& model,
                                      const std::function<double(ParameterStore&)>& loss) {
    auto& store = model.store();
    const double eps = 1e-5;
    double max_abs = 0.0, max_rel_resolved = 0.0;
    for (int i = 0; i < store.size(); ++i) {
        Tensor& p = store.param(i);
        const Tensor& g = store.grad(i);
        for (std::int64_t k = 0; k < p.size(); ++k) {
            const double saved = p[k];
            p[k] = saved + eps;
            const double up = loss(store);
            p[k] = saved - eps;
            const double dn = loss(store);
            p[k] = saved;
            const double numeric = (up - dn) / (2 * eps);
            const double diff = std::fabs(numeric - g[k]);
            max_abs = std::max(max_abs, diff);
            const double scale = std::max(std::fabs(numeric), std::fabs(g[k]));
            if (scale >= 1e-5) max_rel_resolved = std::max(max_rel_resolved, diff / scale);
        }
    }
    CHECK(max_abs < 1e-8);
    CHECK(max_rel_resolved < 2e-4);
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    auto model = tiny_model(4, 6, 10, 9, 5, 83);
    TrainingInstance inst;
    inst.x = {4, 7, 5, 8};
    inst.y = {6, 7, 5, 4, special::eos};
    inst.spans = {{1, 2, 1, 2}};

    SUBCASE("dropout off") {
        model->store().zero_grads();
        instance_loss(*model, inst, 0.0, nullptr, true);
        auto loss = [&](ParameterStore&) {
            return instance_loss(*model, inst, 0.0, nullptr, false).total;
        };
        check_against_finite_differences(*model, loss);
    }

    SUBCASE("dropout on with a frozen stream") {
        model->store().zero_grads();
        {
            Rng rng(4242);
            instance_loss(*model, inst, 0.4, &rng, true);
        }
        auto loss = [&](ParameterStore&) {
            Rng rng(4242);
            return instance_loss(*model, inst, 0.4, &rng, false).total;
        };
        check_against_finite_differences(*model, loss);
    }
}

TEST_CASE("batch loss equals the mean of per-instance losses") {
    auto model = tiny_model(4, 5, 12, 10, 5, 89);
    std::vector<TrainingInstance> train_set;
    for (int k = 0; k < 3; ++k) {
        TrainingInstance inst = simple_instance();
        inst.x[0] = 4 + k;
        train_set.push_back(inst);
    }

    double mean_before = 0.0;
    for (const auto& inst : train_set)
        mean_before += instance_loss(*model, inst, 0.0, nullptr, false).total;
    mean_before /= 3.0;

    TrainConfig cfg;
    cfg.batch_size = 3;
    cfg.max_batches = 1;
    cfg.eval_every = 1;
    cfg.dropout = 0.0;
    cfg.shuffle = false;
    const TrainResult res = train(*model, cfg, train_set, train_set);
    REQUIRE(res.log.size() == 1);
    CHECK(res.log[0].train_loss == doctest::Approx(mean_before).epsilon(1e-9));
}

TEST_CASE("learning rate halves after six consecutive non-improving evaluations") {
    auto model = tiny_model(3, 4, 10, 9, 5, 97);
    std::vector<TrainingInstance> set{simple_instance()};

    TrainConfig cfg;
    cfg.batch_size = 1;
    cfg.max_batches = 7;
    cfg.eval_every = 1;
    cfg.dropout = 0.0;
    cfg.decay_patience = 6;

    int call = 0;
    TrainHooks hooks;
    hooks.dev_metric = [&call](SeqCopyModel&) { return static_cast<double>(++call); };

    const TrainResult res = train(*model, cfg, set, set, hooks);
    REQUIRE(res.log.size() == 7);
    CHECK(res.log[5].lr == 0.001);    // streak of 5: unchanged
    CHECK(res.log[6].lr == 0.0005);   // sixth consecutive drop halves
    CHECK(res.final_lr == 0.0005);
}

TEST_CASE("zero-length training run changes nothing") {
    auto model = tiny_model(3, 4, 10, 9, 5, 101);
    const Tensor before = model->store().param(0);
    std::vector<TrainingInstance> set{simple_instance()};

    TrainConfig cfg;
    cfg.max_batches = 0;
    const TrainResult res = train(*model, cfg, set, set);
    CHECK(res.batches_run == 0);
    CHECK(res.log.empty());
    for (int i = 0; i < before.size(); ++i) CHECK(model->store().param(0)[i] == before[i]);
}

TEST_CASE("training reduces the dev loss on a small copy task") {
    auto model = tiny_model(6, 8, 14, 12, 3, 103);

    // targets echo a source bigram, plus one generated word
    std::vector<TrainingInstance> train_set;
    Rng rng(11);
    for (int k = 0; k < 48; ++k) {
        TrainingInstance inst;
        const int a = 4 + static_cast<int>(rng.below(10));
        const int b = 4 + static_cast<int>(rng.below(10));
        const int c = 4 + static_cast<int>(rng.below(10));
        inst.x = {a, b, c, 4};
        inst.y = {4, static_cast<int>(4 + rng.below(8)), special::eos};
        inst.spans = {};
        train_set.push_back(inst);
    }

    const double before = mean_loss(*model, train_set);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_batches = 30;
    cfg.eval_every = 10;
    cfg.dropout = 0.1;
    cfg.lr = 0.01;
    cfg.seed = 5;
    const TrainResult res = train(*model, cfg, train_set, train_set);
    REQUIRE(res.log.size() == 3);
    CHECK(res.log.back().dev_metric < before);
}

TEST_CASE("training aborts with a diagnostic on divergence") {
    auto model = tiny_model(3, 4, 10, 9, 5, 107);
    model->store().param(0)[0] = std::numeric_limits<double>::quiet_NaN();
    std::vector<TrainingInstance> set{simple_instance()};

    TrainConfig cfg;
    cfg.batch_size = 1;
    cfg.max_batches = 1;
    cfg.eval_every = 1;
    cfg.dropout = 0.0;
    CHECK_THROWS_AS(train(*model, cfg, set, set), DivergenceError);
}

TEST_CASE("empty corpora are rejected") {
    auto model = tiny_model(3, 4, 10, 9, 5, 109);
    std::vector<TrainingInstance> empty;
    std::vector<TrainingInstance> set{simple_instance()};
    TrainConfig cfg;
    cfg.max_batches = 1;
    CHECK_THROWS_AS(train(*model, cfg, empty, set), EmptyInput);
    CHECK_THROWS_AS(train(*model, cfg, set, empty), EmptyInput);
}
