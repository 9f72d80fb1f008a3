#include <cmath>

#include "nmla/decode_eval.hpp"

namespace nmla {

NGramLM NGramLM::train(std::span<const Sentence> corpus, std::size_t vocab_size, int order,
                       double k) {
  if (corpus.empty()) throw std::invalid_argument("NGramLM::train: empty corpus");
  if (order < 1) throw std::invalid_argument("NGramLM::train: order must be >= 1");
  if (!(k > 0.0)) throw std::invalid_argument("NGramLM::train: k must be positive");

  NGramLM lm;
  lm.order_ = order;
  lm.k_ = k;
  lm.vocab_size_ = vocab_size;
  lm.contexts_.resize(static_cast<std::size_t>(order));

  std::vector<TokenId> seq;
  for (const Sentence& s : corpus) {
    seq.clear();
    seq.push_back(lm.bos());
    for (TokenId w : s.tokens) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
        throw std::invalid_argument("NGramLM::train: token outside the vocabulary");
      }
      seq.push_back(w);
    }
    seq.push_back(lm.eos());
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (std::size_t m = 0; m < static_cast<std::size_t>(order) && m <= i; ++m) {
        std::vector<TokenId> history(seq.begin() + static_cast<std::ptrdiff_t>(i - m),
                                     seq.begin() + static_cast<std::ptrdiff_t>(i));
        ContextStats& stats = lm.contexts_[m][history];
        stats.total += 1.0;
        stats.next[seq[i]] += 1.0;
      }
    }
  }
  return lm;
}

double NGramLM::log_prob(std::span<const TokenId> history, TokenId word) const {
  if (word < 0 || word > eos()) throw std::invalid_argument("NGramLM::log_prob: bad word id");
  // <s> followed by the history, of which at most order - 1 tokens matter.
  std::vector<TokenId> full;
  full.reserve(history.size() + 1);
  full.push_back(bos());
  full.insert(full.end(), history.begin(), history.end());

  const double outcomes = static_cast<double>(vocab_size_ + 1);
  const std::size_t longest = std::min(full.size(), static_cast<std::size_t>(order_ - 1));
  for (std::size_t m = longest + 1; m-- > 0;) {
    const std::vector<TokenId> context(full.end() - static_cast<std::ptrdiff_t>(m), full.end());
    const auto it = contexts_[m].find(context);
    if (it == contexts_[m].end() || it->second.total <= 0.0) continue;
    const auto hit = it->second.next.find(word);
    const double count = hit == it->second.next.end() ? 0.0 : hit->second;
    return std::log((count + k_) / (it->second.total + k_ * outcomes));
  }
  throw std::logic_error("NGramLM: empty history missing");
}

double NGramLM::sentence_log_prob(const Sentence& s) const {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += log_prob(std::span<const TokenId>(s.tokens.data(), i), s[i]);
  }
  return total + log_prob(s.tokens, eos());
}

}  // namespace nmla
