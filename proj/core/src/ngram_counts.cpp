#include "nmla/nonmono.hpp"

namespace nmla {
namespace {

void check_ngram(const ProbMatrix& p, const NGram& g) {
  if (g.empty()) throw std::invalid_argument("n-gram must have at least one token");
  for (TokenId token : g) {
    if (token < 0 || token >= p.blank_id()) {
      throw std::invalid_argument("n-gram token " + std::to_string(token) + " is not a word");
    }
  }
}

void check_ctc_order(int n) {
  if (n != 1 && n != 2) {
    throw std::invalid_argument("CTC n-gram counts are defined for n in {1, 2}, got n = " +
                                std::to_string(n));
  }
}

}  // namespace

TransitionMatrix transition_matrix(const ProbMatrix& p) {
  const Eigen::Index length = p.num_positions();
  TransitionMatrix a{Matrix::Zero(length, length)};
  for (Eigen::Index i = 0; i < length; ++i) {
    if (i + 1 < length) a.at(i, i + 1) = 1.0;
    for (Eigen::Index j = i + 2; j < length; ++j) a.at(i, j) = a.at(i, j - 1) * p.blank(j - 1);
  }
  return a;
}

std::vector<Vector> state_vectors(const ProbMatrix& p, const NGram& g, const TransitionMatrix& a) {
  check_ngram(p, g);
  std::vector<Vector> states;
  states.reserve(g.size());
  states.push_back(p.values().col(g[0]));
  for (std::size_t k = 1; k < g.size(); ++k) {
    Vector next = a.at.transpose() * states.back();
    states.push_back(next.cwiseProduct(p.values().col(g[k])));
  }
  return states;
}

double ngram_count_sctc(const ProbMatrix& p, const NGram& g, const TransitionMatrix& a) {
  check_ngram(p, g);
  if (static_cast<Eigen::Index>(g.size()) > p.num_positions()) return 0.0;
  return state_vectors(p, g, a).back().sum();
}

double ngram_count_sctc(const ProbMatrix& p, const NGram& g) {
  return ngram_count_sctc(p, g, transition_matrix(p));
}

double sum_ngram_counts_sctc(const ProbMatrix& p, int n) {
  if (n < 1) throw std::invalid_argument("sum_ngram_counts_sctc: n must be >= 1");
  const double unigrams = static_cast<double>(p.num_positions()) -
                          p.values().col(p.blank_id()).sum();
  return unigrams - n + 1;
}

double repeat_count(const ProbMatrix& p, TokenId w) {
  check_ngram(p, {w});
  double total = 0.0;
  for (Eigen::Index t = 0; t + 1 < p.num_positions(); ++t) total += p(t, w) * p(t + 1, w);
  return total;
}

double ngram_count_ctc(const ProbMatrix& p, const NGram& g) {
  check_ngram(p, g);
  check_ctc_order(static_cast<int>(g.size()));
  const double sctc = ngram_count_sctc(p, g);
  if (g.size() == 1 || g[0] == g[1]) return sctc - repeat_count(p, g[0]);
  return sctc;
}

double sum_ngram_counts_ctc(const ProbMatrix& p, int n) {
  check_ctc_order(n);
  double repeats = 0.0;
  for (TokenId w = 0; w < p.blank_id(); ++w) repeats += repeat_count(p, w);
  return sum_ngram_counts_sctc(p, 1) - repeats - n + 1;
}

namespace {

CountWithGrad sctc_count_with_grad(const ProbMatrix& p, const NGram& g) {
  const Eigen::Index length = p.num_positions();
  const auto n = static_cast<Eigen::Index>(g.size());
  CountWithGrad out{0.0, Matrix::Zero(length, p.extended_size())};
  if (n > length) return out;

  const TransitionMatrix a = transition_matrix(p);
  const Matrix& probs = p.values();

  // Forward: s_k = u_k .* p(:, g_k) with u_k = A^T s_{k-1}.
  std::vector<Vector> s(static_cast<std::size_t>(n));
  std::vector<Vector> u(static_cast<std::size_t>(n));
  s[0] = probs.col(g[0]);
  for (Eigen::Index k = 1; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    u[kk] = a.at.transpose() * s[kk - 1];
    s[kk] = u[kk].cwiseProduct(probs.col(g[kk]));
  }
  out.value = s.back().sum();

  // Backward: b_k = dC/ds_k.
  Vector b = Vector::Ones(length);
  Matrix d_gap = Matrix::Zero(length, length);  // dC/dA
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    if (k == 0) {
      out.grad.col(g[0]) += b;
      break;
    }
    out.grad.col(g[kk]) += b.cwiseProduct(u[kk]);
    const Vector through = b.cwiseProduct(probs.col(g[kk]));  // dC/du_k
    d_gap += s[kk - 1] * through.transpose();
    b = a.at * through;
  }

  // A(i, j) = A(i, t) p_t(blank) A(t, j) for i < t < j.
  if (n > 1) {
    const Matrix through_t = d_gap * a.at.transpose();  // (i, t) -> sum_j dA(i, j) A(t, j)
    out.grad.col(p.blank_id()) += a.at.cwiseProduct(through_t).colwise().sum().transpose();
  }
  return out;
}

void add_repeat_grad(const ProbMatrix& p, TokenId w, double scale, Matrix& grad) {
  const Eigen::Index length = p.num_positions();
  for (Eigen::Index t = 0; t < length; ++t) {
    double d = 0.0;
    if (t > 0) d += p(t - 1, w);
    if (t + 1 < length) d += p(t + 1, w);
    grad(t, w) += scale * d;
  }
}

}  // namespace

CountWithGrad ngram_count_with_grad(const ProbMatrix& p, const NGram& g, CollapseMode mode) {
  check_ngram(p, g);
  if (mode == CollapseMode::kSctc) return sctc_count_with_grad(p, g);

  check_ctc_order(static_cast<int>(g.size()));
  CountWithGrad out = sctc_count_with_grad(p, g);
  if (g.size() == 1 || g[0] == g[1]) {
    out.value -= repeat_count(p, g[0]);
    add_repeat_grad(p, g[0], -1.0, out.grad);
  }
  return out;
}

CountWithGrad sum_ngram_counts_with_grad(const ProbMatrix& p, int n, CollapseMode mode) {
  CountWithGrad out{0.0, Matrix::Zero(p.num_positions(), p.extended_size())};
  out.grad.col(p.blank_id()).setConstant(-1.0);
  if (mode == CollapseMode::kSctc) {
    out.value = sum_ngram_counts_sctc(p, n);
    return out;
  }
  out.value = sum_ngram_counts_ctc(p, n);
  for (TokenId w = 0; w < p.blank_id(); ++w) add_repeat_grad(p, w, -1.0, out.grad);
  return out;
}

}  // namespace nmla
