#include <benchmark/benchmark.h>

#include <memory>

#include "seqcopy/init.hpp"
#include "seqcopy/loss.hpp"
#include "seqcopy/model.hpp"
#include "seqcopy/search.hpp"

using namespace seqcopy;

namespace {

std::unique_ptr<SeqCopyModel> bench_model(int emb, int hidden, int src_vocab, int tgt_vocab) {
    ModelDims dims;
    dims.emb_size = emb;
    dims.hidden = hidden;
    dims.src_vocab = src_vocab;
    dims.tgt_vocab = tgt_vocab;
    dims.max_copy_len = 5;
    auto model = std::make_unique<SeqCopyModel>(dims);
    Rng rng(1);
    model->init_params(rng);
    return model;
}

std::vector<int> bench_source(int n, int vocab) {
    Rng rng(2);
    std::vector<int> src(n);
    for (int& id : src) id = special::count + static_cast<int>(rng.below(vocab - special::count));
    return src;
}

TrainingInstance bench_instance(int n, int t, int src_vocab, int tgt_vocab) {
    Rng rng(3);
    TrainingInstance inst;
    inst.x = bench_source(n, src_vocab);
    for (int i = 0; i < t; ++i)
        inst.y.push_back(special::count + static_cast<int>(rng.below(tgt_vocab - special::count)));
    inst.y.push_back(special::eos);
    inst.spans = {{1, 2, 1, 2}, {4, 6, 5, 7}};
    return inst;
}

}  // namespace

static void BM_GruCell(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    Rng rng(4);
    Tensor wu = xavier_init(Shape{d, 2 * d}, rng), wr = xavier_init(Shape{d, 2 * d}, rng),
           wc = xavier_init(Shape{d, 2 * d}, rng);
    Tensor bu(Shape{d}), br(Shape{d}), bc(Shape{d});
    const GruParamRefs p{&wu, &wr, &wc, &bu, &br, &bc};
    Vec x(d, 0.1), h(d, 0.0);
    for (auto _ : state) {
        h = gru_cell(p, x, h);
        benchmark::DoNotOptimize(h.data());
    }
}
BENCHMARK(BM_GruCell)->Arg(64)->Arg(128)->Arg(512);

static void BM_EncodeSentence(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto model = bench_model(32, 64, 500, 300);
    const auto src = bench_source(n, 500);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model->encode_ctx(src));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EncodeSentence)->Arg(15)->Arg(40);

static void BM_DecodeStep(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto src = bench_source(15, 500);
    const EncoderContext ctx = model->encode_ctx(src);
    const DecoderState s0 = model->initial_state(ctx.out);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model->step(s0, ctx, special::bos));
    }
}
BENCHMARK(BM_DecodeStep);

static void BM_SpanScores(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto src = bench_source(15, 500);
    const EncoderContext ctx = model->encode_ctx(src);
    const StepResult r = model->step(model->initial_state(ctx.out), ctx, special::bos);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model->span_scores(r.memory, ctx));
    }
}
BENCHMARK(BM_SpanScores);

static void BM_InstanceLossForward(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto inst = bench_instance(15, 10, 500, 300);
    for (auto _ : state) {
        benchmark::DoNotOptimize(instance_loss(*model, inst, 0.0, nullptr, false));
    }
}
BENCHMARK(BM_InstanceLossForward);

static void BM_InstanceLossBackward(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto inst = bench_instance(15, 10, 500, 300);
    for (auto _ : state) {
        model->store().zero_grads();
        benchmark::DoNotOptimize(instance_loss(*model, inst, 0.0, nullptr, true));
    }
}
BENCHMARK(BM_InstanceLossBackward);

static void BM_GreedyDecode(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto src = bench_source(15, 500);
    const std::vector<int> map(src.size(), special::unk);
    DecodeOptions opts;
    opts.max_steps = 12;
    for (auto _ : state) {
        benchmark::DoNotOptimize(greedy_decode(*model, src, map, opts));
    }
}
BENCHMARK(BM_GreedyDecode);

static void BM_BeamDecode(benchmark::State& state) {
    auto model = bench_model(32, 64, 500, 300);
    const auto src = bench_source(15, 500);
    const std::vector<int> map(src.size(), special::unk);
    DecodeOptions opts;
    opts.max_steps = 12;
    opts.beam_size = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(beam_decode(*model, src, map, opts));
    }
}
BENCHMARK(BM_BeamDecode)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
