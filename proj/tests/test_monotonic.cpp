#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nmla/monotonic.hpp"
#include "nmla/oracle.hpp"
#include "test_util.hpp"
#include "verify.hpp"

namespace nmla {
namespace {

using namespace test;

const ProbMatrix& uniform_two_positions() {
  static const ProbMatrix p = rows({{0.5, 0.5}, {0.5, 0.5}});
  return p;
}

TEST(SctcForward, Examples) {
  EXPECT_DOUBLE_EQ(sctc_forward(deterministic({A, 2, B}, 3), Sentence{A, B}).log_likelihood(), 0.0);
  EXPECT_NEAR(std::exp(sctc_forward(uniform_two_positions(), Sentence{A}).log_likelihood()), 0.5, 1e-15);

  const ProbMatrix p = rows({{0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}, {0.6, 0.0, 0.4}});
  EXPECT_NEAR(sctc_forward(p, Sentence{}).log_likelihood(), std::log(0.5 * 0.8 * 0.4), 1e-15);
}

TEST(SctcForward, TableStructure) {
  Rng rng = make_rng(1, "sctc-table");
  const ProbMatrix p = verify::random_probs(rng, 5, 3);
  const ForwardTable table = sctc_forward(p, Sentence{A, B, C});
  ASSERT_EQ(table.log_alpha.rows(), 6);
  ASSERT_EQ(table.log_alpha.cols(), 4);
  EXPECT_EQ(table.log_alpha(0, 0), 0.0);
  for (Eigen::Index s = 1; s < 4; ++s) EXPECT_EQ(table.log_alpha(0, s), kLogZero);
  for (Eigen::Index t = 0; t <= 5; ++t) {
    for (Eigen::Index s = t + 1; s < 4; ++s) EXPECT_EQ(table.log_alpha(t, s), kLogZero);
  }
}

TEST(SctcForward, TargetLongerThanLatticeHasZeroProbability) {
  EXPECT_EQ(sctc_forward(uniform_two_positions(), Sentence{A, A, A}).log_likelihood(), kLogZero);
}

TEST(CtcForward, Examples) {
  EXPECT_DOUBLE_EQ(ctc_forward(deterministic({A, 2, B}, 3), Sentence{A, B}), 0.0);
  EXPECT_NEAR(ctc_forward(uniform_two_positions(), Sentence{A}), std::log(0.75), 1e-15);
  // (A, A) needs a separating blank, so three positions.
  EXPECT_EQ(ctc_forward(uniform_two_positions(), Sentence{A, A}), kLogZero);
  EXPECT_EQ(ctc_forward(ProbMatrix(Matrix(0, 2)), Sentence{}), 0.0);
  EXPECT_EQ(ctc_forward(ProbMatrix(Matrix(0, 2)), Sentence{A}), kLogZero);
}

TEST(MonotonicLoss, Examples) {
  EXPECT_DOUBLE_EQ(sctc_loss(deterministic({A, 2, B}, 3), Sentence{A, B}).value, 0.0);
  EXPECT_DOUBLE_EQ(ctc_loss(deterministic({A, A, B}, 3), Sentence{A, B}).value, 0.0);
  EXPECT_NEAR(sctc_loss(uniform_two_positions(), Sentence{A}).value, -std::log(0.5), 1e-15);
  EXPECT_NEAR(sctc_loss(uniform_two_positions(), Sentence{A}).value, 0.6931471805599453, 1e-15);
  EXPECT_NEAR(ctc_loss(uniform_two_positions(), Sentence{A}).value, -std::log(0.75), 1e-15);
}

TEST(MonotonicLoss, ZeroLikelihoodIsAnError) {
  EXPECT_THROW(ctc_loss(uniform_two_positions(), Sentence{A, A}), ZeroLikelihood);
  EXPECT_THROW(sctc_loss(deterministic({A, 1}, 2), Sentence{A, A}), ZeroLikelihood);
  EXPECT_THROW(sctc_loss(uniform_two_positions(), Sentence{1}), std::invalid_argument);
}

TEST(MonotonicLikelihood, MatchesOracleOnRandomInstances) {
  Rng rng = make_rng(11, "likelihood-oracle");
  std::uniform_int_distribution<int> length(1, 6), words(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int t_a = length(rng);
    const int v = words(rng);
    const ProbMatrix p = verify::random_probs(rng, t_a, v);
    const Sentence y = verify::random_sentence(rng, std::uniform_int_distribution<int>(0, std::min(3, t_a))(rng), v);
    const double sctc = oracle::exact_likelihood(p, y, CollapseMode::kSctc);
    const double ctc = oracle::exact_likelihood(p, y, CollapseMode::kCtc);
    EXPECT_NEAR(std::exp(sctc_forward(p, y).log_likelihood()), sctc, 1e-9 * sctc);
    EXPECT_NEAR(std::exp(ctc_forward(p, y)), ctc, 1e-9 * ctc);
  }
}

TEST(MonotonicLikelihood, SentenceProbabilitiesSumToOne) {
  Rng rng = make_rng(12, "sentence-sum");
  for (int t_a = 1; t_a <= 4; ++t_a) {
    const ProbMatrix p = verify::random_probs(rng, t_a, 2);
    for (const CollapseMode mode : {CollapseMode::kCtc, CollapseMode::kSctc}) {
      double total = 0.0;
      for (const auto& [y, prob] : oracle::exact_sentence_distribution(p, mode)) {
        total += std::exp(mode == CollapseMode::kCtc ? ctc_forward(p, y) : sctc_forward(p, y).log_likelihood());
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(MonotonicLikelihood, SctcIsOrderSensitive) {
  Rng rng = make_rng(13, "order-sensitive");
  bool differs = false;
  for (int trial = 0; trial < 20 && !differs; ++trial) {
    const ProbMatrix p = verify::random_probs(rng, 4, 2);
    const double ab = sctc_forward(p, Sentence{A, B}).log_likelihood();
    const double ba = sctc_forward(p, Sentence{B, A}).log_likelihood();
    differs = std::abs(std::exp(ab) - std::exp(ba)) > 1e-6;
  }
  EXPECT_TRUE(differs);
}

class MonotonicGradient : public ::testing::TestWithParam<CollapseMode> {};

TEST_P(MonotonicGradient, MatchesFiniteDifferences) {
  const CollapseMode mode = GetParam();
  Rng rng = make_rng(14, to_string(mode));
  std::normal_distribution<double> normal(0.0, 1.5);
  int checked = 0;
  while (checked < 20) {
    const int t_a = 4;
    Matrix logits(t_a, 4);
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
    const Sentence y = verify::random_sentence(rng, 1 + checked % 3, 3);
    auto loss = [&](const Matrix& z) { return monotonic_loss(softmax_rows(LogitMatrix(z)), y, mode); };
    LossValueWithGrad analytic;
    try {
      analytic = loss(logits);
    } catch (const ZeroLikelihood&) {
      continue;
    }
    const Matrix numeric = numeric_gradient(logits, [&](const Matrix& z) { return loss(z).value; });
    EXPECT_LT(max_relative_error(analytic.grad, numeric), 1e-4);
    ++checked;
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, MonotonicGradient, ::testing::Values(CollapseMode::kCtc, CollapseMode::kSctc),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(MonotonicGradient, RowsSumToZero) {
  Rng rng = make_rng(15, "grad-rows");
  const ProbMatrix p = verify::random_probs(rng, 5, 3);
  for (const auto& grad : {ctc_loss(p, Sentence{A, B}).grad, sctc_loss(p, Sentence{A, B}).grad}) {
    for (Eigen::Index t = 0; t < grad.rows(); ++t) EXPECT_NEAR(grad.row(t).sum(), 0.0, 1e-12);
  }
}

}  // namespace
}  // namespace nmla
