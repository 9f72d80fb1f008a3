#include "nmla/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "nmla/random.hpp"

namespace nmla {

SyntheticTask SyntheticTask::make(int vocab_size, int min_length, int max_length,
                                  double reorder_prob, std::uint64_t seed) {
  SyntheticTask task;
  task.vocab_size = vocab_size;
  task.min_length = min_length;
  task.max_length = max_length;
  task.reorder_prob = reorder_prob;
  task.mapping.resize(static_cast<std::size_t>(std::max(vocab_size, 0)));
  std::iota(task.mapping.begin(), task.mapping.end(), 0);
  Rng rng = make_rng(seed, "token-map");
  std::shuffle(task.mapping.begin(), task.mapping.end(), rng);
  task.validate();
  return task;
}

void SyntheticTask::validate() const {
  if (vocab_size < 1) throw std::invalid_argument("SyntheticTask: vocab_size must be >= 1");
  if (min_length < 1 || max_length < min_length) {
    throw std::invalid_argument("SyntheticTask: need 1 <= min_length <= max_length");
  }
  if (!(reorder_prob >= 0.0 && reorder_prob <= 1.0)) {
    throw std::invalid_argument("SyntheticTask: reorder_prob outside [0, 1]");
  }
  std::vector<TokenId> sorted = mapping;
  std::sort(sorted.begin(), sorted.end());
  std::vector<TokenId> identity(static_cast<std::size_t>(vocab_size));
  std::iota(identity.begin(), identity.end(), 0);
  if (sorted != identity) throw std::invalid_argument("SyntheticTask: mapping is not a bijection");
}

Sentence SyntheticTask::translate(const Sentence& source) const {
  Sentence out;
  out.tokens.reserve(source.size());
  for (TokenId t : source.tokens) out.tokens.push_back(mapping.at(static_cast<std::size_t>(t)));
  return out;
}

Sentence swap_halves(const Sentence& s) {
  const auto half = static_cast<std::ptrdiff_t>(s.size() / 2);
  Sentence out;
  out.tokens.reserve(s.size());
  out.tokens.insert(out.tokens.end(), s.tokens.begin() + half, s.tokens.end());
  out.tokens.insert(out.tokens.end(), s.tokens.begin(), s.tokens.begin() + half);
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticTask& task, std::size_t num_pairs,
                                   std::uint64_t seed) {
  task.validate();
  if (num_pairs < 1) throw std::invalid_argument("generate_synthetic: num_pairs must be >= 1");
  Rng rng = make_rng(seed, "synthetic-corpus");
  std::uniform_int_distribution<int> length_dist(task.min_length, task.max_length);
  std::uniform_int_distribution<TokenId> token_dist(0, task.vocab_size - 1);
  std::bernoulli_distribution reorder(task.reorder_prob);

  SyntheticCorpus corpus;
  corpus.pairs.reserve(num_pairs);
  corpus.reordered.reserve(num_pairs);
  for (std::size_t i = 0; i < num_pairs; ++i) {
    Sentence source;
    const int length = length_dist(rng);
    for (int k = 0; k < length; ++k) source.tokens.push_back(token_dist(rng));
    const bool swapped = reorder(rng);
    Sentence target = task.translate(source);
    if (swapped) target = swap_halves(target);
    corpus.pairs.push_back({std::move(source), std::move(target)});
    corpus.reordered.push_back(swapped);
  }
  return corpus;
}

}  // namespace nmla
