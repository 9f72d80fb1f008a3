#pragma once

#include <cstdint>
#include <vector>

#include "nmla/corpus.hpp"

namespace nmla {

// Two-mode translation task: the target is the token-wise translation of the
// source, and with probability `reorder_prob` its two halves are swapped.
struct SyntheticTask {
  int vocab_size = 20;  // both sides; the mapping is a bijection
  int min_length = 6;
  int max_length = 10;
  double reorder_prob = 0.5;
  std::vector<TokenId> mapping;  // source id -> target id

  // Random bijection drawn from `seed`.
  static SyntheticTask make(int vocab_size, int min_length, int max_length, double reorder_prob,
                            std::uint64_t seed);
  void validate() const;

  Sentence translate(const Sentence& source) const;
};

// (s[h:], s[:h]) with h = floor(|s| / 2).
Sentence swap_halves(const Sentence& s);

struct SyntheticCorpus {
  Corpus pairs;
  std::vector<bool> reordered;
};

SyntheticCorpus generate_synthetic(const SyntheticTask& task, std::size_t num_pairs,
                                   std::uint64_t seed);

}  // namespace nmla
