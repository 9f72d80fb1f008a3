#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmla/core.hpp"

namespace nmla {

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

// Per-position argmax (lowest id wins ties), then collapse.
Sentence argmax_decode(const ProbMatrix& p, CollapseMode mode);

// Add-k smoothed n-gram model over the target words plus an end-of-sentence
// symbol. A history never seen in training backs off to its longest suffix
// that was seen; the empty history always exists.
class NGramLM {
 public:
  // Throws std::invalid_argument for an empty corpus, order < 1 or k <= 0.
  static NGramLM train(std::span<const Sentence> corpus, std::size_t vocab_size, int order = 4,
                       double k = 0.1);

  int order() const { return order_; }
  double k() const { return k_; }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId eos() const { return static_cast<TokenId>(vocab_size_); }
  TokenId bos() const { return static_cast<TokenId>(vocab_size_ + 1); }

  // log p(word | history), natural log. `history` holds the preceding words of
  // the sentence (no <s>); `word` is a word id or eos().
  double log_prob(std::span<const TokenId> history, TokenId word) const;
  // Sum over the words plus the closing eos().
  double sentence_log_prob(const Sentence& s) const;

 private:
  struct ContextStats {
    double total = 0.0;
    std::map<TokenId, double> next;
  };

  int order_ = 4;
  double k_ = 0.1;
  std::size_t vocab_size_ = 0;
  // contexts_[m]: histories of exactly m tokens (<s> allowed as the first).
  std::vector<std::map<std::vector<TokenId>, ContextStats>> contexts_;
};

struct BeamConfig {
  int beam_size = 20;
  double alpha = 0.0;  // LM weight
  double beta = 0.0;   // length bonus weight
};

// CTC prefix beam search maximizing
//   log p(y|x) + alpha * log p_LM(y) + beta * log |y|.
// Each prefix tracks its blank-ending and word-ending probabilities. The LM
// term is added as words are appended and the end-of-sentence term plus the
// length bonus at the end. With beta > 0 the empty sentence scores -inf; with
// beta == 0 its bonus is 0. `lm` may be null when alpha == 0.
Sentence beam_decode(const ProbMatrix& p, const NGramLM* lm, const BeamConfig& config);

struct GridPoint {
  double alpha = 0.0;
  double beta = 0.0;

  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

struct GridSearchResult {
  GridPoint best;
  double bleu = 0.0;
};

// Grid point with the highest dev BLEU; ties go to the smallest (alpha, beta).
// Throws std::invalid_argument on an empty grid or dev set. Sentences are
// decoded on `workers` threads; the result does not depend on it.
GridSearchResult grid_search_ab(std::span<const ProbMatrix> dev_probs,
                                std::span<const Sentence> dev_refs, const NGramLM& lm,
                                std::span<const GridPoint> grid, int beam_size, int workers = 1);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

// Corpus BLEU sufficient statistics: clipped n-gram matches for n = 1..4 and
// lengths.
struct BleuStats {
  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double hyp_length = 0.0;
  double ref_length = 0.0;

  void add(const Sentence& hyp, const Sentence& ref);
  double brevity_penalty() const;
  double score() const;  // in [0, 100]; 0 if any order has no matches
};

// Throws std::invalid_argument when the corpora differ in size.
double bleu(std::span<const Sentence> hyps, std::span<const Sentence> refs);

// Corpus n-gram F1 between discrete outputs: 2 sum min / (sum hyp + sum ref).
double ngram_f1(std::span<const Sentence> hyps, std::span<const Sentence> refs, int n);

// Mean natural-log entropy over every position of every matrix.
double avg_entropy(std::span<const ProbMatrix> ps);

// exp of the mean negative log-probability per token, counting eos.
double perplexity(const NGramLM& lm, std::span<const Sentence> corpus);

struct BucketRow {
  std::string label;  // "[lo,hi)", "[lo,inf)" or "all"
  std::size_t count = 0;
  std::optional<double> bleu;  // absent for an empty bucket
};

// Buckets by reference length: [b0,b1), ..., [b_last, inf), followed by an
// "all" row scored on the full corpus. Boundaries must be strictly increasing.
std::vector<BucketRow> length_bucket_report(std::span<const Sentence> hyps,
                                            std::span<const Sentence> refs,
                                            std::span<const int> boundaries);

}  // namespace nmla
