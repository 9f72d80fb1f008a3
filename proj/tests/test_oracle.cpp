#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "nmla/oracle.hpp"
#include "test_util.hpp"
#include "verify.hpp"

namespace nmla {
namespace {

using namespace test;
using namespace oracle;

TEST(EnumerateAlignments, CountsAndOrder) {
  const auto one = enumerate_alignments(1, 2);
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0], (Alignment{A}));
  EXPECT_EQ(one[1], (Alignment{1}));  // blank of {A}

  EXPECT_EQ(enumerate_alignments(2, 2).size(), 4u);

  const auto all = enumerate_alignments(3, 3);
  EXPECT_EQ(all.size(), 27u);
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(std::set<Alignment>(all.begin(), all.end()).size(), 27u);
}

TEST(EnumerateAlignments, BudgetExceeded) {
  EXPECT_THROW(enumerate_alignments(3, 3, OracleBudget{26}), BudgetExceeded);
  EXPECT_NO_THROW(enumerate_alignments(3, 3, OracleBudget{27}));
  EXPECT_THROW(enumerate_alignments(30, 4), BudgetExceeded);
}

TEST(EnumerateAlignments, ProbabilitiesSumToOne) {
  Rng rng = make_rng(1, "oracle-sum");
  for (int trial = 0; trial < 20; ++trial) {
    const ProbMatrix p = verify::random_probs(rng, 1 + trial % 6, 1 + trial % 3);
    double total = 0.0;
    for_each_alignment(static_cast<int>(p.num_positions()), static_cast<std::size_t>(p.extended_size()), {},
                       [&](const Alignment& a) { total += alignment_probability(p, a); });
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

// Two positions, uniform over {A, blank}: the four alignments AA, A-, -A, --
// each have probability 1/4. SCTC (A) comes from A- and -A; CTC (A) also from AA.
TEST(ExactLikelihood, UniformTwoPositionExample) {
  const ProbMatrix p = rows({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_DOUBLE_EQ(exact_likelihood(p, Sentence{A}, CollapseMode::kSctc), 0.5);
  EXPECT_DOUBLE_EQ(exact_likelihood(p, Sentence{A}, CollapseMode::kCtc), 0.75);
  EXPECT_DOUBLE_EQ(exact_likelihood(deterministic({A, 1}, 2), Sentence{A}, CollapseMode::kSctc), 1.0);
}

// p1 = (A .6, blank .4), p2 = (A .5, blank .5).
// SCTC count of (A): AA gives 2 * .3, A- gives .3, -A gives .2, so 1.1.
// CTC count of (A): AA collapses to one A, so .3 + .3 + .2 = 0.8.
TEST(ExactNgramCount, HandComputedExample) {
  const ProbMatrix p = rows({{0.6, 0.4}, {0.5, 0.5}});
  EXPECT_NEAR(exact_ngram_count(p, {A}, CollapseMode::kSctc), 1.1, 1e-15);
  EXPECT_NEAR(exact_ngram_count(p, {A}, CollapseMode::kCtc), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(exact_ngram_count(deterministic({A, 2, B}, 3), {A, B}, CollapseMode::kSctc), 1.0);
}

TEST(ExactNgramTotal, CountsEveryGram) {
  // Deterministic (A, A, B) under ctc collapses to (A, B): one bigram.
  EXPECT_DOUBLE_EQ(exact_ngram_total(deterministic({A, A, B}, 3), 2, CollapseMode::kCtc), 1.0);
  EXPECT_DOUBLE_EQ(exact_ngram_total(deterministic({A, A, B}, 3), 2, CollapseMode::kSctc), 2.0);
  EXPECT_DOUBLE_EQ(exact_ngram_total(deterministic({2, 2, 2}, 3), 1, CollapseMode::kSctc), 0.0);
}

TEST(ExactLikelihood, SctcBelowCtcForSentencesWithoutRepeats) {
  Rng rng = make_rng(2, "sctc-below-ctc");
  for (int trial = 0; trial < 100; ++trial) {
    const int length = 1 + trial % 6;
    const ProbMatrix p = verify::random_probs(rng, length, 3);
    Sentence y = verify::random_sentence(rng, std::min(3, length), 3);
    y.tokens.erase(std::unique(y.tokens.begin(), y.tokens.end()), y.tokens.end());
    EXPECT_LE(exact_likelihood(p, y, CollapseMode::kSctc), exact_likelihood(p, y, CollapseMode::kCtc) + 1e-15);
  }
}

TEST(SentenceDistribution, SumsToOneAndFindsTheMode) {
  const ProbMatrix p = rows({{0.9, 0.0, 0.1}, {0.0, 0.3, 0.7}});
  const auto dist = exact_sentence_distribution(p, CollapseMode::kCtc);
  double total = 0.0;
  for (const auto& [s, prob] : dist) total += prob;
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(dist.at(Sentence{A}), 0.63, 1e-15);
  EXPECT_NEAR(dist.at(Sentence{A, B}), 0.27, 1e-15);
  const BestSentence best = exact_max_sentence(p, CollapseMode::kCtc);
  EXPECT_EQ(best.sentence, Sentence{A});
  EXPECT_NEAR(best.probability, 0.63, 1e-15);
}

TEST(ExactMaxSentence, TiesGoToTheSmallestSentence) {
  const ProbMatrix p = rows({{0.5, 0.5, 0.0}});
  EXPECT_EQ(exact_max_sentence(p, CollapseMode::kCtc).sentence, Sentence{A});
}

TEST(ExactBestAlignment, Examples) {
  const ProbMatrix cross = deterministic({B, A}, 3);
  const BestAlignment best = exact_best_alignment(cross, Sentence{A, B});
  EXPECT_EQ(best.alignment, (Alignment{B, A}));
  EXPECT_DOUBLE_EQ(best.probability, 1.0);

  const ProbMatrix identity = rows({{0.8, 0.1, 0.05, 0.05}, {0.1, 0.8, 0.05, 0.05}, {0.05, 0.1, 0.8, 0.05}});
  EXPECT_EQ(exact_best_alignment(identity, Sentence{A, B, C}).alignment, (Alignment{A, B, C}));

  EXPECT_THROW(exact_best_alignment(cross, Sentence{A, B, A}), std::invalid_argument);
}

TEST(ExactSumNonmonotonic, Examples) {
  Rng rng = make_rng(3, "sum-nonmono");
  const ProbMatrix p = verify::random_probs(rng, 4, 2);
  const double all_blank = p.blank(0) * p.blank(1) * p.blank(2) * p.blank(3);
  EXPECT_NEAR(exact_sum_nonmonotonic(p, Sentence{}), all_blank, 1e-15);
  EXPECT_DOUBLE_EQ(exact_sum_nonmonotonic(deterministic({B, 2, A}, 3), Sentence{A, B}), 1.0);
  EXPECT_GE(exact_sum_nonmonotonic(p, Sentence{A, B}), exact_best_alignment(p, Sentence{A, B}).probability);
}

TEST(ExactSumNonmonotonic, EqualsSumOverDistinctPermutations) {
  Rng rng = make_rng(4, "sum-perms");
  for (int trial = 0; trial < 50; ++trial) {
    const int length = 1 + trial % 6;
    const ProbMatrix p = verify::random_probs(rng, length, 2);
    Sentence y = verify::random_sentence(rng, std::min(3, length), 2);
    std::sort(y.tokens.begin(), y.tokens.end());
    double total = 0.0;
    do {
      total += exact_likelihood(p, y, CollapseMode::kSctc);
    } while (std::next_permutation(y.tokens.begin(), y.tokens.end()));
    EXPECT_NEAR(exact_sum_nonmonotonic(p, y), total, 1e-12);
    EXPECT_LE(exact_best_alignment(p, y).probability, exact_sum_nonmonotonic(p, y) + 1e-15);
  }
}

TEST(DirectNgramCount, MatchesOracle) {
  Rng rng = make_rng(5, "direct-count");
  for (int trial = 0; trial < 50; ++trial) {
    const int length = 1 + trial % 5;
    const ProbMatrix p = verify::random_probs(rng, length, 2);
    for (int n = 1; n <= 3; ++n) {
      const NGram g = verify::random_sentence(rng, n, 2).tokens;
      EXPECT_NEAR(direct_ngram_count_sctc(p, g), exact_ngram_count(p, g, CollapseMode::kSctc), 1e-12);
    }
  }
}

}  // namespace
}  // namespace nmla
