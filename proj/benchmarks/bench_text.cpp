#include <benchmark/benchmark.h>

#include "seqcopy/corpus.hpp"
#include "seqcopy/metrics.hpp"
#include "seqcopy/rng.hpp"

using namespace seqcopy;

namespace {

std::vector<std::string> random_tokens(int n, int alphabet, Rng& rng) {
    std::vector<std::string> out(n);
    for (auto& t : out) t = "tok" + std::to_string(rng.below(alphabet));
    return out;
}

}  // namespace

static void BM_AnnotateSpans(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(11);
    const auto x = random_tokens(n, 40, rng);
    auto y = random_tokens(n / 2, 40, rng);
    // plant a copied run so the matcher exercises the span path
    for (int i = 0; i < 4 && i < n / 2; ++i) y[i] = x[n / 3 + i];
    const Vocabulary tv = Vocabulary::build({y}, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(annotate_spans(x, y, 5, tv));
    }
}
BENCHMARK(BM_AnnotateSpans)->Arg(15)->Arg(40)->Arg(100);

static void BM_RougeL(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(13);
    const auto a = random_tokens(n, 30, rng);
    const auto b = random_tokens(n, 30, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rouge_l(a, b));
    }
}
BENCHMARK(BM_RougeL)->Arg(10)->Arg(30)->Arg(100);

static void BM_Bleu4(benchmark::State& state) {
    Rng rng(17);
    std::vector<Tokens> cands, refs;
    for (int i = 0; i < 100; ++i) {
        cands.push_back(random_tokens(12, 30, rng));
        refs.push_back(random_tokens(12, 30, rng));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(bleu4(cands, refs));
    }
    state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_Bleu4);

BENCHMARK_MAIN();
