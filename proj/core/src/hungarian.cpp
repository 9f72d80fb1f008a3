#include <algorithm>
#include <limits>

#include "nmla/nonmono.hpp"

namespace nmla {

AssignmentProblem build_assignment(const ProbMatrix& p, const Sentence& y) {
  check_sentence(p, y);
  const Eigen::Index length = p.num_positions();
  const auto words = static_cast<Eigen::Index>(y.size());
  if (words > length) {
    throw std::invalid_argument("build_assignment: target has " + std::to_string(words) +
                                " words but only " + std::to_string(length) + " positions");
  }
  AssignmentProblem problem;
  problem.column_token.resize(static_cast<std::size_t>(length), p.blank_id());
  std::copy(y.tokens.begin(), y.tokens.end(), problem.column_token.begin());
  problem.weight.resize(length, length);
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index s = 0; s < length; ++s) {
      problem.weight(t, s) = safe_log(p(t, problem.column_token[static_cast<std::size_t>(s)]));
    }
  }
  return problem;
}

Matching hungarian_max(const Matrix& weight) {
  if (weight.rows() != weight.cols()) throw std::invalid_argument("hungarian_max: matrix not square");
  const auto n = static_cast<int>(weight.rows());
  Matching result;
  if (n == 0) return result;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < weight.size(); ++i) {
    const double w = weight.data()[i];
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("hungarian_max: weights must be finite or -inf");
    }
    if (w != kLogZero) {
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  if (lo > hi) lo = hi = 0.0;
  const double sentinel = lo - n * (hi - lo) - 1.0;

  // Minimize cost = -weight. Shortest augmenting path with potentials,
  // 1-based bookkeeping; column 0 is the virtual source.
  auto cost = [&](int i, int j) {
    const double w = weight(i - 1, j - 1);
    return w == kLogZero ? -sentinel : -w;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::vector<double> min_slack(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = row_of_col[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double reduced = cost(i0, j) - u[i0] - v[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.column_of_row.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) result.column_of_row[static_cast<std::size_t>(row_of_col[j] - 1)] = j - 1;
  result.total_weight = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = weight(i, result.column_of_row[static_cast<std::size_t>(i)]);
    if (w == kLogZero) {
      result.total_weight = kLogZero;
      break;
    }
    result.total_weight += w;
  }
  return result;
}

LossValueWithGrad bipartite_loss(const ProbMatrix& p, const Sentence& y) {
  const AssignmentProblem problem = build_assignment(p, y);
  const Matching matching = hungarian_max(problem);
  if (matching.total_weight == kLogZero) {
    throw ZeroLikelihood("bipartite_loss: every matching has zero probability");
  }
  LossValueWithGrad out;
  out.value = -matching.total_weight;
  out.grad = p.values();
  for (Eigen::Index t = 0; t < p.num_positions(); ++t) {
    const auto col = static_cast<std::size_t>(matching.column_of_row[static_cast<std::size_t>(t)]);
    out.grad(t, problem.column_token[col]) -= 1.0;
  }
  return out;
}

}  // namespace nmla
