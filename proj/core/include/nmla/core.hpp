#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace nmla {

using TokenId = std::int32_t;

// Row-major so that one row is one output position.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Raised by the brute-force oracles when an instance is too large to enumerate.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by losses whose target has probability zero under the model.
class ZeroLikelihood : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class CollapseMode { kCtc, kSctc };

std::string_view to_string(CollapseMode mode);
CollapseMode parse_collapse_mode(std::string_view text);

// Word symbols plus an implicit blank stored at the last index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  // Words named "<prefix><i>" for i in [0, num_words).
  static Vocabulary synthetic(std::size_t num_words, std::string_view prefix = "w");
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t num_words() const { return words_.size(); }
  std::size_t extended_size() const { return words_.size() + 1; }
  TokenId blank_id() const { return static_cast<TokenId>(words_.size()); }
  bool is_blank(TokenId id) const { return id == blank_id(); }

  const std::string& word(TokenId id) const;
  std::optional<TokenId> find(std::string_view word) const;
  TokenId id(std::string_view word) const;  // throws std::out_of_range

  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

// A target-space token sequence; never contains the blank.
struct Sentence {
  std::vector<TokenId> tokens;

  Sentence() = default;
  Sentence(std::initializer_list<TokenId> ids) : tokens(ids) {}
  explicit Sentence(std::vector<TokenId> ids) : tokens(std::move(ids)) {}

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  TokenId operator[](std::size_t i) const { return tokens[i]; }

  friend auto operator<=>(const Sentence&, const Sentence&) = default;
};

// An extended-vocabulary sequence of length T_a.
struct Alignment {
  std::vector<TokenId> tokens;

  Alignment() = default;
  Alignment(std::initializer_list<TokenId> ids) : tokens(ids) {}
  explicit Alignment(std::vector<TokenId> ids) : tokens(std::move(ids)) {}

  std::size_t size() const { return tokens.size(); }
  TokenId operator[](std::size_t i) const { return tokens[i]; }

  friend auto operator<=>(const Alignment&, const Alignment&) = default;
};

// Merge consecutive duplicates, then drop blanks.
Sentence collapse_ctc(const Alignment& a, TokenId blank);
// Drop blanks only; repeats survive.
Sentence collapse_sctc(const Alignment& a, TokenId blank);
Sentence collapse(const Alignment& a, TokenId blank, CollapseMode mode);

// Unnormalized per-position scores, T_a x |V*|.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  explicit LogitMatrix(Matrix values);  // throws std::invalid_argument on non-finite entries

  Eigen::Index num_positions() const { return values_.rows(); }
  Eigen::Index extended_size() const { return values_.cols(); }
  double operator()(Eigen::Index t, Eigen::Index k) const { return values_(t, k); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

// Row-stochastic per-position distributions over words + blank (blank last).
class ProbMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  ProbMatrix() = default;
  explicit ProbMatrix(Matrix values);  // throws std::invalid_argument unless row-stochastic

  // Each position puts all its mass on the given token.
  static ProbMatrix one_hot(const Alignment& a, std::size_t extended_size);

  Eigen::Index num_positions() const { return values_.rows(); }
  Eigen::Index extended_size() const { return values_.cols(); }
  TokenId blank_id() const { return static_cast<TokenId>(values_.cols() - 1); }

  double operator()(Eigen::Index t, Eigen::Index k) const { return values_(t, k); }
  double blank(Eigen::Index t) const { return values_(t, values_.cols() - 1); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

ProbMatrix softmax_rows(const LogitMatrix& logits);

// Map a gradient taken w.r.t. probabilities onto the logits that produced them
// through a row softmax.
Matrix prob_grad_to_logit_grad(const ProbMatrix& p, const Matrix& grad_p);

// Scalar objective with its gradient w.r.t. the input logits.
struct LossValueWithGrad {
  double value = 0.0;
  Matrix grad;
};

// Throws std::invalid_argument if y has a token outside the word range of p.
void check_sentence(const ProbMatrix& p, const Sentence& y);

using NGram = std::vector<TokenId>;

class NGramCountTable {
 public:
  explicit NGramCountTable(int order);

  int order() const { return order_; }
  bool empty() const { return counts_.empty(); }
  std::size_t size() const { return counts_.size(); }

  void add(const NGram& g, double count);
  double count(const NGram& g) const;
  double total() const;

  const std::map<NGram, double>& counts() const { return counts_; }
  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }

 private:
  int order_;
  std::map<NGram, double> counts_;
};

NGramCountTable reference_ngram_counts(const Sentence& y, int n);
// Per-gram mean over the references; throws std::invalid_argument if empty.
NGramCountTable multi_reference_ngram_counts(std::span<const Sentence> refs, int n);

inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kLogZero; }

}  // namespace nmla
