// Serial vs OpenMP replicate kernel at 305 scenes.

#include <random>

#include <benchmark/benchmark.h>

#include "quadeval/bootstrap.hpp"

namespace {

quadeval::SceneCorpus make_corpus(std::size_t scenes) {
  using quadeval::AnswerLabel;
  std::mt19937_64 rng(1);
  quadeval::SceneCorpus c;
  for (std::size_t s = 0; s < scenes; ++s) {
    quadeval::OutcomeTally t;
    for (int k = 0; k < 6; ++k) {
      auto draw = [&] { return rng() & 1 ? AnswerLabel::yes : AnswerLabel::no; };
      t += quadeval::tally(quadeval::QuadOutcome{{"s", 0}, draw(), draw(), draw(), draw()});
    }
    c.scene_ids.push_back(std::to_string(s));
    c.tallies.push_back(t);
  }
  return c;
}

void BM_ReplicatesSerial(benchmark::State& state) {
  auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
  quadeval::BootstrapConfig config{2000, 0.95, 1};
  for (auto _ : state) benchmark::DoNotOptimize(quadeval::bootstrap_replicates_serial(corpus, config));
}

void BM_ReplicatesParallel(benchmark::State& state) {
  auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
  quadeval::BootstrapConfig config{2000, 0.95, 1};
  for (auto _ : state) benchmark::DoNotOptimize(quadeval::bootstrap_replicates(corpus, config));
}

}  // namespace

BENCHMARK(BM_ReplicatesSerial)->Arg(305)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicatesParallel)->Arg(305)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
