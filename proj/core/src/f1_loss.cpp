#include "nmla/nonmono.hpp"

namespace nmla {

LossValueWithGrad f1_loss(const ProbMatrix& p, const NGramCountTable& ref_counts,
                          CollapseMode mode, F1Terms* terms) {
  const int n = ref_counts.order();
  if (mode == CollapseMode::kCtc && n > 2) {
    throw std::invalid_argument("f1_loss: CTC n-gram matching supports n in {1, 2}");
  }

  const Eigen::Index length = p.num_positions();
  F1Terms t;
  Matrix d_matched = Matrix::Zero(length, p.extended_size());
  // Only grams present in the reference can contribute a nonzero match.
  for (const auto& [g, ref] : ref_counts) {
    if (ref <= 0.0) continue;
    t.reference_total += ref;
    const CountWithGrad c = ngram_count_with_grad(p, g, mode);
    if (c.value < ref) {
      t.matched += c.value;
      d_matched += c.grad;
    } else {
      t.matched += ref;
    }
  }

  CountWithGrad model = sum_ngram_counts_with_grad(p, n, mode);
  // The unigram-minus-(n-1) total goes negative when the output is mostly
  // shorter than n - 1 words.
  if (model.value < 0.0) {
    model.value = 0.0;
    model.grad.setZero();
  }
  t.model_total = model.value;
  if (terms != nullptr) *terms = t;

  LossValueWithGrad out;
  const double denom = t.reference_total + t.model_total;
  if (denom <= 0.0) {
    // No reference grams and no model mass: nothing to match.
    out.grad = Matrix::Zero(length, p.extended_size());
    return out;
  }
  out.value = -2.0 * t.matched / denom;
  const Matrix grad_p =
      (-2.0 / denom) * d_matched + (2.0 * t.matched / (denom * denom)) * model.grad;
  out.grad = prob_grad_to_logit_grad(p, grad_p);
  return out;
}

LossValueWithGrad combined_loss(double alpha, const LossValueWithGrad& l1,
                                const LossValueWithGrad& l2) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("combined_loss: alpha outside [0, 1]");
  }
  if (l1.grad.rows() != l2.grad.rows() || l1.grad.cols() != l2.grad.cols()) {
    throw std::invalid_argument("combined_loss: gradient shapes differ");
  }
  return {alpha * l1.value + (1.0 - alpha) * l2.value,
          alpha * l1.grad + (1.0 - alpha) * l2.grad};
}

}  // namespace nmla
