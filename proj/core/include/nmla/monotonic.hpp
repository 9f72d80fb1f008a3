#pragma once

#include "nmla/core.hpp"

namespace nmla {

// log_alpha(t, s): log-probability of emitting y_{1:s} with the first t
// alignment positions. Shape (T_a + 1) x (T + 1).
struct ForwardTable {
  Matrix log_alpha;

  double log_likelihood() const { return log_alpha(log_alpha.rows() - 1, log_alpha.cols() - 1); }
};

// Blank-removal-only lattice. A target longer than T_a yields an all -inf
// table apart from the origin.
ForwardTable sctc_forward(const ProbMatrix& p, const Sentence& y);

// Standard blank-interleaved CTC forward pass; -inf when the target cannot fit
// (T_a < T + number of adjacent repeats).
double ctc_forward(const ProbMatrix& p, const Sentence& y);

// -log p(y). Gradient is w.r.t. the logits behind p. Throws ZeroLikelihood when
// p(y) == 0.
LossValueWithGrad sctc_loss(const ProbMatrix& p, const Sentence& y);
LossValueWithGrad ctc_loss(const ProbMatrix& p, const Sentence& y);

LossValueWithGrad monotonic_loss(const ProbMatrix& p, const Sentence& y, CollapseMode mode);

}  // namespace nmla
