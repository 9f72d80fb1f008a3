#include <benchmark/benchmark.h>

#include <random>

#include "nmla/decode_eval.hpp"
#include "nmla/monotonic.hpp"
#include "nmla/nonmono.hpp"
#include "nmla/random.hpp"

namespace nmla {
namespace {

constexpr int kWords = 20;

ProbMatrix random_probs(int length, std::uint64_t seed) {
  Rng rng = make_rng(seed, "bench");
  std::normal_distribution<double> normal(0.0, 2.0);
  Matrix logits(length, kWords + 1);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
  return softmax_rows(LogitMatrix(std::move(logits)));
}

Sentence random_sentence(int length, std::uint64_t seed) {
  Rng rng = make_rng(seed, "bench-sentence");
  std::uniform_int_distribution<TokenId> word(0, kWords - 1);
  std::vector<TokenId> ids(static_cast<std::size_t>(length));
  for (auto& id : ids) id = word(rng);
  return Sentence(std::move(ids));
}

// Lattice length is 3x the target length, matching the upsampled model.
void BM_CtcLoss(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const ProbMatrix p = random_probs(3 * t, 1);
  const Sentence y = random_sentence(t, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ctc_loss(p, y).value);
}
BENCHMARK(BM_CtcLoss)->Arg(8)->Arg(16)->Arg(32);

void BM_SctcLoss(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const ProbMatrix p = random_probs(3 * t, 1);
  const Sentence y = random_sentence(t, 2);
  for (auto _ : state) benchmark::DoNotOptimize(sctc_loss(p, y).value);
}
BENCHMARK(BM_SctcLoss)->Arg(8)->Arg(16)->Arg(32);

void BM_NgramCountSctc(benchmark::State& state) {
  const int t_a = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const ProbMatrix p = random_probs(t_a, 3);
  const Sentence g = random_sentence(n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(ngram_count_sctc(p, g.tokens));
}
BENCHMARK(BM_NgramCountSctc)->Args({24, 2})->Args({48, 2})->Args({48, 4});

void BM_F1Loss(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const ProbMatrix p = random_probs(3 * t, 5);
  const NGramCountTable ref = reference_ngram_counts(random_sentence(t, 6), 2);
  for (auto _ : state) benchmark::DoNotOptimize(f1_loss(p, ref, CollapseMode::kCtc).value);
}
BENCHMARK(BM_F1Loss)->Arg(8)->Arg(16);

void BM_BipartiteLoss(benchmark::State& state) {
  const int t = static_cast<int>(state.range(0));
  const ProbMatrix p = random_probs(3 * t, 7);
  const Sentence y = random_sentence(t, 8);
  for (auto _ : state) benchmark::DoNotOptimize(bipartite_loss(p, y).value);
}
BENCHMARK(BM_BipartiteLoss)->Arg(8)->Arg(16)->Arg(32);

void BM_BeamDecode(benchmark::State& state) {
  const ProbMatrix p = random_probs(30, 9);
  std::vector<Sentence> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(random_sentence(8, 100 + i));
  const NGramLM lm = NGramLM::train(corpus, kWords);
  const BeamConfig config{static_cast<int>(state.range(0)), 0.2, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(beam_decode(p, &lm, config));
}
BENCHMARK(BM_BeamDecode)->Arg(5)->Arg(20);

}  // namespace
}  // namespace nmla

BENCHMARK_MAIN();
