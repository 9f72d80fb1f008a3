#pragma once

// Exhaustive enumeration over the alignment space. Exponential by construction;
// every lattice algorithm in the library is checked against these functions.

#include <cstdint>
#include <functional>
#include <map>

#include "nmla/core.hpp"

namespace nmla::oracle {

struct OracleBudget {
  std::uint64_t max_alignments = 1'000'000;
};

// Calls `visit` on every length-`length` sequence over an alphabet of
// `extended_size` symbols, in lexicographic order of token ids.
void for_each_alignment(int length, std::size_t extended_size, const OracleBudget& budget,
                        const std::function<void(const Alignment&)>& visit);
std::vector<Alignment> enumerate_alignments(int length, std::size_t extended_size,
                                            const OracleBudget& budget = {});

// prod_t p_t(a_t)
double alignment_probability(const ProbMatrix& p, const Alignment& a);

// Sum of p(a) over alignments whose collapse equals y (not its log).
double exact_likelihood(const ProbMatrix& p, const Sentence& y, CollapseMode mode,
                        const OracleBudget& budget = {});

// Expected number of occurrences of g in the collapsed output.
double exact_ngram_count(const ProbMatrix& p, const NGram& g, CollapseMode mode,
                         const OracleBudget& budget = {});

// Expected total number of n-grams in the collapsed output, i.e. the true
// value of the n-gram count summed over every possible gram.
double exact_ngram_total(const ProbMatrix& p, int n, CollapseMode mode,
                         const OracleBudget& budget = {});

// Probability mass of each collapsed sentence.
std::map<Sentence, double> exact_sentence_distribution(const ProbMatrix& p, CollapseMode mode,
                                                       const OracleBudget& budget = {});

struct BestSentence {
  Sentence sentence;
  double probability = 0.0;
};

// Most probable collapsed sentence; ties go to the lexicographically smallest.
BestSentence exact_max_sentence(const ProbMatrix& p, CollapseMode mode,
                                const OracleBudget& budget = {});

struct BestAlignment {
  Alignment alignment;
  double probability = 0.0;
};

// Best alignment whose non-blank tokens are some ordering of y's words. Walks
// distinct permutations of y times placements of the words among T_a slots.
// Throws std::invalid_argument if T > T_a.
BestAlignment exact_best_alignment(const ProbMatrix& p, const Sentence& y,
                                   const OracleBudget& budget = {});

// Total probability of the non-monotonic alignment space of y.
double exact_sum_nonmonotonic(const ProbMatrix& p, const Sentence& y,
                              const OracleBudget& budget = {});

// Direct n-fold summation over position tuples of the SCTC n-gram count,
// with the blank-gap products formed explicitly. O(n T_a^n).
double direct_ngram_count_sctc(const ProbMatrix& p, const NGram& g);

}  // namespace nmla::oracle
