#include "nmla/core.hpp"

#include <algorithm>
#include <sstream>

namespace nmla {

std::string_view to_string(CollapseMode mode) {
  return mode == CollapseMode::kCtc ? "ctc" : "sctc";
}

CollapseMode parse_collapse_mode(std::string_view text) {
  if (text == "ctc") return CollapseMode::kCtc;
  if (text == "sctc") return CollapseMode::kSctc;
  throw std::invalid_argument("unknown collapse mode '" + std::string(text) + "'");
}

Sentence collapse_ctc(const Alignment& a, TokenId blank) {
  Sentence out;
  TokenId previous = -1;
  for (TokenId token : a.tokens) {
    if (token != previous && token != blank) out.tokens.push_back(token);
    previous = token;
  }
  return out;
}

Sentence collapse_sctc(const Alignment& a, TokenId blank) {
  Sentence out;
  for (TokenId token : a.tokens) {
    if (token != blank) out.tokens.push_back(token);
  }
  return out;
}

Sentence collapse(const Alignment& a, TokenId blank, CollapseMode mode) {
  return mode == CollapseMode::kCtc ? collapse_ctc(a, blank) : collapse_sctc(a, blank);
}

LogitMatrix::LogitMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.allFinite()) throw std::invalid_argument("LogitMatrix: non-finite entry");
}

ProbMatrix::ProbMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1) throw std::invalid_argument("ProbMatrix: needs at least the blank column");
  for (Eigen::Index t = 0; t < values_.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < values_.cols(); ++k) {
      const double v = values_(t, k);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "ProbMatrix: entry (" << t << ", " << k << ") = " << v << " outside [0, 1]";
        throw std::invalid_argument(msg.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      std::ostringstream msg;
      msg << "ProbMatrix: row " << t << " sums to " << sum;
      throw std::invalid_argument(msg.str());
    }
  }
}

ProbMatrix ProbMatrix::one_hot(const Alignment& a, std::size_t extended_size) {
  Matrix values = Matrix::Zero(static_cast<Eigen::Index>(a.size()),
                               static_cast<Eigen::Index>(extended_size));
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] < 0 || static_cast<std::size_t>(a[t]) >= extended_size) {
      throw std::invalid_argument("ProbMatrix::one_hot: token out of range");
    }
    values(static_cast<Eigen::Index>(t), a[t]) = 1.0;
  }
  return ProbMatrix(std::move(values));
}

ProbMatrix softmax_rows(const LogitMatrix& logits) {
  Matrix p(logits.num_positions(), logits.extended_size());
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    const auto row = logits.values().row(t);
    const double m = row.maxCoeff();
    p.row(t) = (row.array() - m).exp();
    p.row(t) /= p.row(t).sum();
  }
  return ProbMatrix(std::move(p));
}

Matrix prob_grad_to_logit_grad(const ProbMatrix& p, const Matrix& grad_p) {
  const Matrix& probs = p.values();
  Matrix grad(probs.rows(), probs.cols());
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    const double inner = probs.row(t).dot(grad_p.row(t));
    grad.row(t) = probs.row(t).array() * (grad_p.row(t).array() - inner);
  }
  return grad;
}

void check_sentence(const ProbMatrix& p, const Sentence& y) {
  for (TokenId token : y.tokens) {
    if (token < 0 || token >= p.blank_id()) {
      throw std::invalid_argument("sentence token " + std::to_string(token) +
                                  " is not a word of the extended vocabulary");
    }
  }
}

NGramCountTable::NGramCountTable(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("n-gram order must be >= 1");
}

void NGramCountTable::add(const NGram& g, double count) {
  if (static_cast<int>(g.size()) != order_) {
    throw std::invalid_argument("n-gram has wrong order");
  }
  if (count < 0.0) throw std::invalid_argument("n-gram counts must be nonnegative");
  counts_[g] += count;
}

double NGramCountTable::count(const NGram& g) const {
  auto it = counts_.find(g);
  return it == counts_.end() ? 0.0 : it->second;
}

double NGramCountTable::total() const {
  double sum = 0.0;
  for (const auto& [g, c] : counts_) sum += c;
  return sum;
}

NGramCountTable reference_ngram_counts(const Sentence& y, int n) {
  NGramCountTable table(n);
  const auto len = static_cast<int>(y.size());
  for (int i = 0; i + n <= len; ++i) {
    table.add(NGram(y.tokens.begin() + i, y.tokens.begin() + i + n), 1.0);
  }
  return table;
}

NGramCountTable multi_reference_ngram_counts(std::span<const Sentence> refs, int n) {
  if (refs.empty()) throw std::invalid_argument("multi_reference_ngram_counts: no references");
  NGramCountTable table(n);
  const double weight = 1.0 / static_cast<double>(refs.size());
  for (const Sentence& ref : refs) {
    for (const auto& [g, c] : reference_ngram_counts(ref, n)) table.add(g, c * weight);
  }
  return table;
}

}  // namespace nmla
