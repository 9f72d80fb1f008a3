#include <algorithm>
#include <cmath>
#include <map>

#include "nmla/decode_eval.hpp"

namespace nmla {
namespace {

std::map<NGram, double> count_ngrams(const Sentence& s, int n) {
  std::map<NGram, double> counts;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) counts[NGram(s.tokens.begin() + i, s.tokens.begin() + i + n)] += 1.0;
  return counts;
}

double clipped_matches(const std::map<NGram, double>& hyp, const std::map<NGram, double>& ref) {
  double total = 0.0;
  for (const auto& [g, c] : hyp) {
    auto it = ref.find(g);
    if (it != ref.end()) total += std::min(c, it->second);
  }
  return total;
}

void check_sizes(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw std::invalid_argument("corpus size mismatch: " + std::to_string(hyps) + " hypotheses vs " +
                                std::to_string(refs) + " references");
  }
}

}  // namespace

void BleuStats::add(const Sentence& hyp, const Sentence& ref) {
  hyp_length += static_cast<double>(hyp.size());
  ref_length += static_cast<double>(ref.size());
  for (int n = 1; n <= 4; ++n) {
    const auto h = count_ngrams(hyp, n);
    matches[static_cast<std::size_t>(n - 1)] += clipped_matches(h, count_ngrams(ref, n));
    totals[static_cast<std::size_t>(n - 1)] += std::max(0.0, static_cast<double>(hyp.size()) - n + 1);
  }
}

double BleuStats::brevity_penalty() const {
  if (hyp_length >= ref_length) return 1.0;
  if (hyp_length == 0.0) return 0.0;
  return std::exp(1.0 - ref_length / hyp_length);
}

double BleuStats::score() const {
  double log_precision = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (matches[i] <= 0.0 || totals[i] <= 0.0) return 0.0;
    log_precision += std::log(matches[i] / totals[i]) / 4.0;
  }
  return 100.0 * brevity_penalty() * std::exp(log_precision);
}

double bleu(std::span<const Sentence> hyps, std::span<const Sentence> refs) {
  check_sizes(hyps.size(), refs.size());
  BleuStats stats;
  for (std::size_t i = 0; i < hyps.size(); ++i) stats.add(hyps[i], refs[i]);
  return stats.score();
}

double ngram_f1(std::span<const Sentence> hyps, std::span<const Sentence> refs, int n) {
  check_sizes(hyps.size(), refs.size());
  if (n < 1) throw std::invalid_argument("ngram_f1: n must be >= 1");
  double matched = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const auto h = count_ngrams(hyps[i], n);
    const auto r = count_ngrams(refs[i], n);
    matched += clipped_matches(h, r);
    total += std::max(0.0, static_cast<double>(hyps[i].size()) - n + 1) +
             std::max(0.0, static_cast<double>(refs[i].size()) - n + 1);
  }
  return total > 0.0 ? 2.0 * matched / total : 0.0;
}

double avg_entropy(std::span<const ProbMatrix> ps) {
  if (ps.empty()) throw std::invalid_argument("avg_entropy: no matrices");
  double total = 0.0;
  std::size_t positions = 0;
  for (const ProbMatrix& p : ps) {
    for (Eigen::Index t = 0; t < p.num_positions(); ++t) {
      double h = 0.0;
      for (Eigen::Index k = 0; k < p.extended_size(); ++k) {
        const double v = p(t, k);
        if (v > 0.0) h -= v * std::log(v);
      }
      total += h;
      ++positions;
    }
  }
  return positions == 0 ? 0.0 : total / static_cast<double>(positions);
}

double perplexity(const NGramLM& lm, std::span<const Sentence> corpus) {
  if (corpus.empty()) throw std::invalid_argument("perplexity: empty corpus");
  double log_prob = 0.0;
  double tokens = 0.0;
  for (const Sentence& s : corpus) {
    log_prob += lm.sentence_log_prob(s);
    tokens += static_cast<double>(s.size() + 1);
  }
  return std::exp(-log_prob / tokens);
}

std::vector<BucketRow> length_bucket_report(std::span<const Sentence> hyps,
                                            std::span<const Sentence> refs,
                                            std::span<const int> boundaries) {
  check_sizes(hyps.size(), refs.size());
  if (boundaries.empty()) throw std::invalid_argument("length_bucket_report: no bucket boundaries");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      throw std::invalid_argument("length_bucket_report: boundaries must be strictly increasing");
    }
  }

  std::vector<BucketRow> rows;
  for (std::size_t b = 0; b < boundaries.size(); ++b) {
    const int lo = boundaries[b];
    const bool last = b + 1 == boundaries.size();
    const int hi = last ? 0 : boundaries[b + 1];
    BleuStats stats;
    BucketRow row;
    row.label = "[" + std::to_string(lo) + "," + (last ? std::string("inf") : std::to_string(hi)) + ")";
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto len = static_cast<int>(refs[i].size());
      if (len >= lo && (last || len < hi)) {
        stats.add(hyps[i], refs[i]);
        ++row.count;
      }
    }
    if (row.count > 0) row.bleu = stats.score();
    rows.push_back(std::move(row));
  }
  rows.push_back({"all", hyps.size(), hyps.empty() ? std::nullopt : std::optional<double>(bleu(hyps, refs))});
  return rows;
}

}  // namespace nmla
