#pragma once

#include <vector>

#include "nmla/core.hpp"

namespace nmla {

// ---------------------------------------------------------------------------
// Bipartite matching
// ---------------------------------------------------------------------------

// Square weight matrix between the T_a output positions (rows) and the T target
// words followed by T_a - T blank slots (columns). Entries are log-probabilities
// and may be -inf.
struct AssignmentProblem {
  Matrix weight;
  std::vector<TokenId> column_token;  // token each column stands for

  Eigen::Index size() const { return weight.rows(); }
};

// Throws std::invalid_argument if T > T_a.
AssignmentProblem build_assignment(const ProbMatrix& p, const Sentence& y);

struct Matching {
  std::vector<int> column_of_row;
  double total_weight = 0.0;  // -inf if any matched edge is -inf
};

// Maximum-weight perfect matching (Hungarian algorithm, O(n^3)). -inf edges are
// replaced by a finite sentinel low enough that no optimal matching uses one
// unless every perfect matching must.
Matching hungarian_max(const Matrix& weight);
inline Matching hungarian_max(const AssignmentProblem& problem) {
  return hungarian_max(problem.weight);
}

// -log of the best alignment over all reorderings of y. The gradient holds the
// argmax matching fixed. Throws ZeroLikelihood when every matching has zero
// probability.
LossValueWithGrad bipartite_loss(const ProbMatrix& p, const Sentence& y);

// ---------------------------------------------------------------------------
// Probabilistic n-gram counts
// ---------------------------------------------------------------------------

// at(i, j): probability that every position strictly between i and j is blank
// (0-based); zero for j <= i and one for j == i + 1.
struct TransitionMatrix {
  Matrix at;
};

TransitionMatrix transition_matrix(const ProbMatrix& p);

// s_1(i) = p_i(g_1); s_k(i) = sum_j s_{k-1}(j) A(j, i) p_i(g_k).
std::vector<Vector> state_vectors(const ProbMatrix& p, const NGram& g, const TransitionMatrix& a);

// Expected count of g in the blank-removed output, O(n T_a^2). Zero when n > T_a.
double ngram_count_sctc(const ProbMatrix& p, const NGram& g);
double ngram_count_sctc(const ProbMatrix& p, const NGram& g, const TransitionMatrix& a);

// Total SCTC count over every n-gram via the unigram total minus (n - 1). This
// is exact only when the output always has at least n - 1 words.
double sum_ngram_counts_sctc(const ProbMatrix& p, int n);

// Expected number of copies of w removed by merging consecutive repeats:
// sum_t p_t(w) p_{t+1}(w).
double repeat_count(const ProbMatrix& p, TokenId w);

// Expected count of g under the merge-then-drop-blanks collapse. Orders 1 and 2
// only; throws std::invalid_argument otherwise.
double ngram_count_ctc(const ProbMatrix& p, const NGram& g);

// Total CTC count over every n-gram (n in {1, 2}), unigram total minus (n - 1).
double sum_ngram_counts_ctc(const ProbMatrix& p, int n);

// Count and its gradient w.r.t. the probabilities (not the logits).
struct CountWithGrad {
  double value = 0.0;
  Matrix grad;
};

CountWithGrad ngram_count_with_grad(const ProbMatrix& p, const NGram& g, CollapseMode mode);
CountWithGrad sum_ngram_counts_with_grad(const ProbMatrix& p, int n, CollapseMode mode);

// ---------------------------------------------------------------------------
// F1 objectives
// ---------------------------------------------------------------------------

struct F1Terms {
  double matched = 0.0;          // sum_g min(C_g(y), C_g(theta))
  double reference_total = 0.0;  // sum_g C_g(y)
  double model_total = 0.0;      // sum_g C_g(theta), clamped at zero
};

// -2 * matched / (reference_total + model_total), order taken from the table.
// ctc mode accepts orders 1 and 2 only. Loss is 0 when there is nothing to
// match. min() ties give a zero subgradient.
LossValueWithGrad f1_loss(const ProbMatrix& p, const NGramCountTable& ref_counts,
                          CollapseMode mode, F1Terms* terms = nullptr);

// alpha * l1 + (1 - alpha) * l2; throws std::invalid_argument for alpha outside
// [0, 1] or mismatched gradient shapes.
LossValueWithGrad combined_loss(double alpha, const LossValueWithGrad& l1,
                                const LossValueWithGrad& l2);

}  // namespace nmla
