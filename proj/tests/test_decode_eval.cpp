#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nmla/decode_eval.hpp"
#include "nmla/oracle.hpp"
#include "test_util.hpp"
#include "verify.hpp"

namespace nmla {
namespace {

using namespace test;

// p1 = {A .9, blank .1}, p2 = {B .3, blank .7}: "A" has .63, "A B" has .27.
ProbMatrix crossover_probs() { return rows({{0.9, 0.0, 0.1}, {0.0, 0.3, 0.7}}); }

TEST(ArgmaxDecode, Examples) {
  const ProbMatrix p = deterministic({A, A, 2, A, B, B}, 3);
  EXPECT_EQ(argmax_decode(p, CollapseMode::kCtc), (Sentence{A, A, B}));
  EXPECT_EQ(argmax_decode(p, CollapseMode::kSctc), (Sentence{A, A, A, B, B}));
  EXPECT_EQ(argmax_decode(rows({{0.4, 0.4, 0.2}}), CollapseMode::kCtc), Sentence{A});
  EXPECT_EQ(argmax_decode(rows({{0.2, 0.4, 0.4}}), CollapseMode::kCtc), Sentence{B});
  EXPECT_EQ(argmax_decode(crossover_probs(), CollapseMode::kCtc), Sentence{A});
}

TEST(NGramLM, LearnsAFixedBigram) {
  std::vector<Sentence> corpus(50, Sentence{A, B});
  const NGramLM lm = NGramLM::train(corpus, 3, 2, 0.01);
  const std::vector<TokenId> history{A};
  EXPECT_GT(std::exp(lm.log_prob(history, B)), 0.99);
  EXPECT_LT(std::exp(lm.log_prob(history, C)), 0.01);
  EXPECT_EQ(lm.eos(), 3);
  EXPECT_EQ(lm.bos(), 4);
  EXPECT_THROW(NGramLM::train(std::vector<Sentence>{}, 3), std::invalid_argument);
  EXPECT_THROW(NGramLM::train(corpus, 3, 0), std::invalid_argument);
  EXPECT_THROW(NGramLM::train(corpus, 3, 2, 0.0), std::invalid_argument);
  EXPECT_THROW(NGramLM::train(std::vector<Sentence>{Sentence{3}}, 3), std::invalid_argument);
}

TEST(NGramLM, ConditionalsSumToOneForAnyHistory) {
  Rng rng = make_rng(31, "lm");
  std::vector<Sentence> corpus;
  for (int i = 0; i < 40; ++i) corpus.push_back(verify::random_sentence(rng, 2 + i % 5, 4));
  const NGramLM lm = NGramLM::train(corpus, 4, 3, 0.1);
  for (int trial = 0; trial < 30; ++trial) {
    const Sentence history = verify::random_sentence(rng, trial % 5, 4);
    double total = 0.0;
    for (TokenId w = 0; w <= lm.eos(); ++w) total += std::exp(lm.log_prob(history.tokens, w));
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(NGramLM, TrainingDataBeatsShuffledData) {
  std::vector<Sentence> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(Sentence{A, B, C, D});
  const NGramLM lm = NGramLM::train(corpus, 4);
  std::vector<Sentence> shuffled(30, Sentence{D, C, B, A});
  EXPECT_LT(perplexity(lm, corpus), perplexity(lm, shuffled));
}

TEST(Perplexity, UniformModelGivesVocabularyPlusOne) {
  // With a huge k every conditional is uniform over the words plus eos.
  const NGramLM lm = NGramLM::train(std::vector<Sentence>{Sentence{A, B}}, 5, 2, 1e12);
  const std::vector<Sentence> corpus{Sentence{C, D, A}, Sentence{}};
  EXPECT_NEAR(perplexity(lm, corpus), 6.0, 1e-6);
}

TEST(Perplexity, AtLeastOne) {
  Rng rng = make_rng(32, "ppl");
  std::vector<Sentence> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(verify::random_sentence(rng, 1 + i % 4, 3));
  const NGramLM lm = NGramLM::train(corpus, 3, 4, 0.01);
  EXPECT_GE(perplexity(lm, corpus), 1.0);
}

TEST(BeamDecode, DeterministicInput) {
  const ProbMatrix p = deterministic({A, 2, A, B, B, 2}, 3);
  EXPECT_EQ(beam_decode(p, nullptr, {5, 0.0, 0.0}), (Sentence{A, A, B}));
  EXPECT_THROW(beam_decode(p, nullptr, {5, 0.5, 0.0}), std::invalid_argument);
}

TEST(BeamDecode, LengthBonusCrossover) {
  const double crossover = std::log(0.63 / 0.27) / std::log(2.0);
  EXPECT_NEAR(crossover, 1.2224, 1e-4);
  const ProbMatrix p = crossover_probs();
  EXPECT_EQ(beam_decode(p, nullptr, {10, 0.0, crossover - 0.05}), Sentence{A});
  EXPECT_EQ(beam_decode(p, nullptr, {10, 0.0, crossover + 0.05}), (Sentence{A, B}));
}

TEST(BeamDecode, PositiveBetaNeverReturnsTheEmptySentence) {
  const ProbMatrix p = rows({{0.05, 0.95}, {0.05, 0.95}});
  EXPECT_EQ(beam_decode(p, nullptr, {10, 0.0, 0.0}), Sentence{});
  EXPECT_EQ(beam_decode(p, nullptr, {10, 0.0, 0.1}), Sentence{A});
}

TEST(BeamDecode, WideBeamFindsTheExactMode) {
  Rng rng = make_rng(33, "beam-exact");
  for (int trial = 0; trial < 100; ++trial) {
    const int t_a = 1 + trial % 6;
    const ProbMatrix p = verify::random_probs(rng, t_a, 2 + trial % 2, 3.0);
    const oracle::BestSentence best = oracle::exact_max_sentence(p, CollapseMode::kCtc);
    const Sentence found = beam_decode(p, nullptr, {1000, 0.0, 0.0});
    EXPECT_NEAR(oracle::exact_likelihood(p, found, CollapseMode::kCtc), best.probability, 1e-12);
  }
}

TEST(BeamDecode, LanguageModelCanOverrideTheAcousticMode) {
  std::vector<Sentence> corpus(20, Sentence{A, B});
  const NGramLM lm = NGramLM::train(corpus, 2, 2, 0.01);
  const ProbMatrix p = crossover_probs();
  EXPECT_EQ(beam_decode(p, &lm, {10, 0.0, 0.0}), Sentence{A});
  EXPECT_EQ(beam_decode(p, &lm, {10, 1.0, 0.0}), (Sentence{A, B}));
}

TEST(GridSearch, SingletonGridReturnsThatPoint) {
  const std::vector<ProbMatrix> dev{deterministic({A, 4, B, 4, C, 4, D}, 5)};
  const std::vector<Sentence> refs{Sentence{A, B, C, D}};
  const NGramLM lm = NGramLM::train(refs, 4);
  const std::vector<GridPoint> grid{{0.3, 0.7}};
  const GridSearchResult r = grid_search_ab(dev, refs, lm, grid, 5);
  EXPECT_EQ(r.best, (GridPoint{0.3, 0.7}));
  EXPECT_DOUBLE_EQ(r.bleu, 100.0);
}

TEST(GridSearch, TiesGoToTheSmallestPoint) {
  const std::vector<ProbMatrix> dev{deterministic({A, 4, B, 4, C, 4, D}, 5)};
  const std::vector<Sentence> refs{Sentence{A, B, C, D}};
  const NGramLM lm = NGramLM::train(refs, 4);
  const std::vector<GridPoint> grid{{0.5, 1.0}, {0.1, 0.0}, {0.0, 2.0}, {0.0, 0.5}};
  EXPECT_EQ(grid_search_ab(dev, refs, lm, grid, 5).best, (GridPoint{0.0, 0.5}));
  EXPECT_THROW(grid_search_ab(dev, refs, lm, std::vector<GridPoint>{}, 5), std::invalid_argument);
  EXPECT_THROW(grid_search_ab(std::vector<ProbMatrix>{}, std::vector<Sentence>{}, lm, grid, 5),
               std::invalid_argument);
}

TEST(GridSearch, IndependentOfWorkerCount) {
  Rng rng = make_rng(34, "grid");
  std::vector<ProbMatrix> dev;
  std::vector<Sentence> refs;
  for (int i = 0; i < 12; ++i) {
    dev.push_back(verify::random_probs(rng, 9, 4, 3.0));
    refs.push_back(verify::random_sentence(rng, 5, 4));
  }
  const NGramLM lm = NGramLM::train(refs, 4);
  const std::vector<GridPoint> grid{{0.0, 0.0}, {0.2, 0.5}, {0.5, 1.0}, {0.1, 2.0}};
  const GridSearchResult one = grid_search_ab(dev, refs, lm, grid, 8, 1);
  const GridSearchResult three = grid_search_ab(dev, refs, lm, grid, 8, 3);
  EXPECT_EQ(one.best, three.best);
  EXPECT_EQ(one.bleu, three.bleu);
}

TEST(Bleu, Examples) {
  const std::vector<Sentence> refs{Sentence{A, B, C, D, A}, Sentence{B, C, D, A}};
  EXPECT_DOUBLE_EQ(bleu(refs, refs), 100.0);
  const std::vector<Sentence> disjoint{Sentence{4, 4, 4, 4}, Sentence{5, 5, 5, 5}};
  EXPECT_DOUBLE_EQ(bleu(disjoint, refs), 0.0);
  EXPECT_THROW(bleu(disjoint, std::vector<Sentence>{refs[0]}), std::invalid_argument);
}

TEST(Bleu, BrevityPenalty) {
  BleuStats stats;
  stats.add(Sentence{A, B}, Sentence{A, B, C});
  EXPECT_NEAR(stats.brevity_penalty(), std::exp(1.0 - 3.0 / 2.0), 1e-15);
  BleuStats longer;
  longer.add(Sentence{A, B, C, D}, Sentence{A, B, C});
  EXPECT_DOUBLE_EQ(longer.brevity_penalty(), 1.0);
  BleuStats empty;
  empty.add(Sentence{}, Sentence{A});
  EXPECT_DOUBLE_EQ(empty.brevity_penalty(), 0.0);
  EXPECT_DOUBLE_EQ(empty.score(), 0.0);
}

TEST(Bleu, ClipsRepeatedMatches) {
  BleuStats stats;
  stats.add(Sentence{A, A, A, A}, Sentence{A, B, C, D});
  EXPECT_DOUBLE_EQ(stats.matches[0], 1.0);
  EXPECT_DOUBLE_EQ(stats.totals[0], 4.0);
  EXPECT_DOUBLE_EQ(stats.totals[3], 1.0);
}

TEST(NgramF1, Examples) {
  const std::vector<Sentence> refs{Sentence{A, B, C}};
  EXPECT_DOUBLE_EQ(ngram_f1(refs, refs, 2), 1.0);
  // hyp bigrams {AB, BD}, ref {AB, BC}: 2 * 1 / (2 + 2).
  EXPECT_DOUBLE_EQ(ngram_f1(std::vector<Sentence>{Sentence{A, B, D}}, refs, 2), 0.5);
  EXPECT_DOUBLE_EQ(ngram_f1(std::vector<Sentence>{Sentence{}}, refs, 2), 0.0);
}

TEST(AvgEntropy, Examples) {
  EXPECT_DOUBLE_EQ(avg_entropy(std::vector<ProbMatrix>{deterministic({A, B}, 3)}), 0.0);
  const ProbMatrix uniform(Matrix::Constant(3, 4, 0.25));
  EXPECT_NEAR(avg_entropy(std::vector<ProbMatrix>{uniform}), std::log(4.0), 1e-15);
  const std::vector<ProbMatrix> mixed{deterministic({A}, 2), rows({{0.5, 0.5}})};
  EXPECT_NEAR(avg_entropy(mixed), std::log(2.0) / 2.0, 1e-15);
  EXPECT_THROW(avg_entropy(std::vector<ProbMatrix>{}), std::invalid_argument);
}

TEST(AvgEntropy, InvariantToPermutingColumns) {
  Rng rng = make_rng(35, "entropy");
  const ProbMatrix p = verify::random_probs(rng, 5, 4);
  Matrix reversed = p.values().rowwise().reverse();
  EXPECT_NEAR(avg_entropy(std::vector<ProbMatrix>{p}),
              avg_entropy(std::vector<ProbMatrix>{ProbMatrix(reversed)}), 1e-12);
}

TEST(LengthBuckets, Examples) {
  const std::vector<Sentence> refs{Sentence{A, B, C, D, A}, Sentence{A, B, C, D, A, B, C, D},
                                   Sentence{A, B, C, D, A, B, C, D, A, B, C, D}};
  const std::vector<int> bounds{0, 7, 9};
  const auto report = length_bucket_report(refs, refs, bounds);
  ASSERT_EQ(report.size(), 4u);
  EXPECT_EQ(report[0].label, "[0,7)");
  EXPECT_EQ(report[1].label, "[7,9)");
  EXPECT_EQ(report[2].label, "[9,inf)");
  EXPECT_EQ(report[3].label, "all");
  for (const auto& row : report) {
    EXPECT_EQ(row.count, row.label == "all" ? 3u : 1u);
    ASSERT_TRUE(row.bleu.has_value());
    EXPECT_DOUBLE_EQ(*row.bleu, 100.0);
  }

  const std::vector<int> sparse{0, 6, 7};
  const auto with_gap = length_bucket_report(refs, refs, sparse);
  EXPECT_EQ(with_gap[1].count, 0u);
  EXPECT_FALSE(with_gap[1].bleu.has_value());

  const std::vector<int> bad{0, 7, 7};
  EXPECT_THROW(length_bucket_report(refs, refs, bad), std::invalid_argument);
}

}  // namespace
}  // namespace nmla
