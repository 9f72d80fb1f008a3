#include "nmla/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace nmla::oracle {
namespace {

std::uint64_t checked_power(std::size_t base, int exponent, const OracleBudget& budget) {
  std::uint64_t total = 1;
  for (int i = 0; i < exponent; ++i) {
    total *= base;
    if (total > budget.max_alignments) {
      throw BudgetExceeded("oracle: " + std::to_string(base) + "^" + std::to_string(exponent) +
                           " alignments exceed the budget of " +
                           std::to_string(budget.max_alignments));
    }
  }
  return total;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

std::size_t count_occurrences(const Sentence& s, const NGram& g) {
  const std::size_t n = g.size();
  if (s.size() < n) return 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    if (std::equal(g.begin(), g.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(i))) ++hits;
  }
  return hits;
}

}  // namespace

void for_each_alignment(int length, std::size_t extended_size, const OracleBudget& budget,
                        const std::function<void(const Alignment&)>& visit) {
  if (length < 0) throw std::invalid_argument("for_each_alignment: negative length");
  if (extended_size == 0) throw std::invalid_argument("for_each_alignment: empty alphabet");
  checked_power(extended_size, length, budget);

  Alignment a(std::vector<TokenId>(static_cast<std::size_t>(length), 0));
  const auto top = static_cast<TokenId>(extended_size - 1);
  while (true) {
    visit(a);
    // Odometer increment, last position fastest.
    int pos = length - 1;
    while (pos >= 0 && a.tokens[static_cast<std::size_t>(pos)] == top) {
      a.tokens[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++a.tokens[static_cast<std::size_t>(pos)];
  }
}

std::vector<Alignment> enumerate_alignments(int length, std::size_t extended_size,
                                            const OracleBudget& budget) {
  std::vector<Alignment> out;
  for_each_alignment(length, extended_size, budget,
                     [&](const Alignment& a) { out.push_back(a); });
  return out;
}

double alignment_probability(const ProbMatrix& p, const Alignment& a) {
  double prob = 1.0;
  for (std::size_t t = 0; t < a.size(); ++t) prob *= p(static_cast<Eigen::Index>(t), a[t]);
  return prob;
}

double exact_likelihood(const ProbMatrix& p, const Sentence& y, CollapseMode mode,
                        const OracleBudget& budget) {
  double total = 0.0;
  for_each_alignment(static_cast<int>(p.num_positions()),
                     static_cast<std::size_t>(p.extended_size()), budget,
                     [&](const Alignment& a) {
                       if (collapse(a, p.blank_id(), mode) == y) {
                         total += alignment_probability(p, a);
                       }
                     });
  return total;
}

double exact_ngram_count(const ProbMatrix& p, const NGram& g, CollapseMode mode,
                         const OracleBudget& budget) {
  if (g.empty()) throw std::invalid_argument("exact_ngram_count: empty n-gram");
  double total = 0.0;
  for_each_alignment(static_cast<int>(p.num_positions()),
                     static_cast<std::size_t>(p.extended_size()), budget,
                     [&](const Alignment& a) {
                       const auto hits = count_occurrences(collapse(a, p.blank_id(), mode), g);
                       if (hits > 0) total += static_cast<double>(hits) * alignment_probability(p, a);
                     });
  return total;
}

double exact_ngram_total(const ProbMatrix& p, int n, CollapseMode mode,
                         const OracleBudget& budget) {
  if (n < 1) throw std::invalid_argument("exact_ngram_total: n must be >= 1");
  double total = 0.0;
  for_each_alignment(static_cast<int>(p.num_positions()),
                     static_cast<std::size_t>(p.extended_size()), budget,
                     [&](const Alignment& a) {
                       const auto len = static_cast<int>(collapse(a, p.blank_id(), mode).size());
                       if (len >= n) total += (len - n + 1) * alignment_probability(p, a);
                     });
  return total;
}

std::map<Sentence, double> exact_sentence_distribution(const ProbMatrix& p, CollapseMode mode,
                                                       const OracleBudget& budget) {
  std::map<Sentence, double> dist;
  for_each_alignment(static_cast<int>(p.num_positions()),
                     static_cast<std::size_t>(p.extended_size()), budget,
                     [&](const Alignment& a) {
                       dist[collapse(a, p.blank_id(), mode)] += alignment_probability(p, a);
                     });
  return dist;
}

BestSentence exact_max_sentence(const ProbMatrix& p, CollapseMode mode,
                                const OracleBudget& budget) {
  BestSentence best;
  best.probability = -1.0;
  // std::map iterates in lexicographic order, so strict > keeps the smallest tie.
  for (const auto& [sentence, prob] : exact_sentence_distribution(p, mode, budget)) {
    if (prob > best.probability) best = {sentence, prob};
  }
  return best;
}

namespace {

// Visits every alignment in the non-monotonic space of y exactly once.
template <typename Visit>
void for_each_nonmonotonic(const ProbMatrix& p, const Sentence& y, const OracleBudget& budget,
                           Visit&& visit) {
  check_sentence(p, y);
  const int length = static_cast<int>(p.num_positions());
  const int words = static_cast<int>(y.size());
  if (words > length) {
    throw std::invalid_argument("non-monotonic oracle: target longer than the alignment");
  }

  std::vector<TokenId> order = y.tokens;
  std::sort(order.begin(), order.end());

  std::uint64_t permutations = 0;
  {
    std::vector<TokenId> probe = order;
    do {
      ++permutations;
    } while (std::next_permutation(probe.begin(), probe.end()));
  }
  const std::uint64_t placements = binomial(length, words);
  if (placements != 0 && permutations > budget.max_alignments / placements) {
    throw BudgetExceeded("non-monotonic oracle: permutations x placements exceed the budget");
  }

  // Placement bitmask: selected[t] marks positions holding a word.
  std::vector<bool> selected(static_cast<std::size_t>(length), false);
  Alignment a(std::vector<TokenId>(static_cast<std::size_t>(length), p.blank_id()));
  do {
    std::fill(selected.begin(), selected.end(), false);
    std::fill(selected.begin(), selected.begin() + words, true);
    // prev_permutation on a true-first mask walks all C(length, words) subsets.
    do {
      std::size_t next_word = 0;
      for (int t = 0; t < length; ++t) {
        a.tokens[static_cast<std::size_t>(t)] =
            selected[static_cast<std::size_t>(t)] ? order[next_word++] : p.blank_id();
      }
      visit(a);
    } while (std::prev_permutation(selected.begin(), selected.end()));
  } while (std::next_permutation(order.begin(), order.end()));
}

}  // namespace

BestAlignment exact_best_alignment(const ProbMatrix& p, const Sentence& y,
                                   const OracleBudget& budget) {
  BestAlignment best;
  best.probability = -1.0;
  for_each_nonmonotonic(p, y, budget, [&](const Alignment& a) {
    const double prob = alignment_probability(p, a);
    if (prob > best.probability) best = {a, prob};
  });
  return best;
}

double exact_sum_nonmonotonic(const ProbMatrix& p, const Sentence& y,
                              const OracleBudget& budget) {
  double total = 0.0;
  for_each_nonmonotonic(p, y, budget,
                        [&](const Alignment& a) { total += alignment_probability(p, a); });
  return total;
}

double direct_ngram_count_sctc(const ProbMatrix& p, const NGram& g) {
  const auto length = static_cast<int>(p.num_positions());
  const auto n = static_cast<int>(g.size());
  if (n < 1) throw std::invalid_argument("direct_ngram_count_sctc: empty n-gram");
  if (length == 0) return 0.0;

  // Probability that every position strictly between i and j is blank.
  auto gap = [&](int i, int j) {
    if (j <= i) return 0.0;
    double prod = 1.0;
    for (int t = i + 1; t < j; ++t) prod *= p.blank(t);
    return prod;
  };

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  while (true) {
    double term = p(idx[0], g[0]);
    for (int k = 1; k < n && term != 0.0; ++k) {
      term *= gap(idx[static_cast<std::size_t>(k - 1)], idx[static_cast<std::size_t>(k)]) *
              p(idx[static_cast<std::size_t>(k)], g[static_cast<std::size_t>(k)]);
    }
    total += term;
    int pos = n - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == length - 1) {
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
  }
  return total;
}

}  // namespace nmla::oracle
