#include <benchmark/benchmark.h>

#include "smoothreg/count_table.hpp"
#include "smoothreg/decompose.hpp"
#include "smoothreg/models.hpp"
#include "smoothreg/ngram_eval.hpp"
#include "smoothreg/smoothers.hpp"
#include "smoothreg/synthetic.hpp"
#include "smoothreg/training.hpp"

using namespace smoothreg;

namespace {

const Corpus& corpus() {
  static const Corpus c = [] {
    ZipfBigramConfig cfg;
    cfg.vocab_size = 200;
    cfg.sequences = 5000;
    return make_corpus(zipf_bigram_lines(cfg));
  }();
  return c;
}

void BM_CountNgrams(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(count_ngrams(corpus(), order, workers));
  state.SetItemsProcessed(state.iterations() * corpus().emission_count());
}
BENCHMARK(BM_CountNgrams)->Args({2, 1})->Args({3, 1})->Args({3, 4})->Unit(benchmark::kMillisecond);

void BM_Smooth(benchmark::State& state) {
  static const CountTable table = count_ngrams(corpus(), 2);
  const auto method = static_cast<SmoothingMethod>(state.range(0));
  nlohmann::json params = nlohmann::json::object();
  if (method == SmoothingMethod::kAddLambda) params = {{"lambda", 0.1}};
  if (method == SmoothingMethod::kJelinekMercer) params = {{"lambdas", {0.9, 0.7}}};
  const auto spec = SmootherSpec::make(method, params, 2);
  state.SetLabel(spec.name());
  for (auto _ : state) benchmark::DoNotOptimize(smooth(table, spec));
}
BENCHMARK(BM_Smooth)->DenseRange(0, 5)->Unit(benchmark::kMillisecond);

void BM_BuildRegularizer(benchmark::State& state) {
  static const CountTable table = count_ngrams(corpus(), 2);
  static const ConditionalLM emp = empirical_conditional(table);
  static const ConditionalLM ken = smooth_kneser_essen_ney(table);
  for (auto _ : state) benchmark::DoNotOptimize(build_regularizer(emp, ken, table, 0.5, 0.5));
}
BENCHMARK(BM_BuildRegularizer)->Unit(benchmark::kMillisecond);

void BM_LossAndGrad(benchmark::State& state) {
  static const CountTable table = count_ngrams(corpus(), 2);
  Objective objective;
  objective.kind = ObjectiveKind::kSplitRegularizer;
  objective.smoother = SmootherSpec::make(SmoothingMethod::kJelinekMercer, {{"lambdas", {1.0, 0.7}}}, 2);
  objective.gamma_plus = objective.gamma_minus = 0.5;
  const auto targets = build_targets(table, objective);
  FeedForwardLM ff(2, corpus().vocab, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  ff.initialize(0);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(ff, targets));
}
BENCHMARK(BM_LossAndGrad)->Args({16, 32})->Args({32, 64})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
