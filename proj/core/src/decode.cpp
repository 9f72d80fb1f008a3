#include <algorithm>
#include <cmath>
#include <map>

#include "nmla/decode_eval.hpp"
#include "nmla/parallel.hpp"

namespace nmla {

Sentence argmax_decode(const ProbMatrix& p, CollapseMode mode) {
  Alignment best;
  best.tokens.reserve(static_cast<std::size_t>(p.num_positions()));
  for (Eigen::Index t = 0; t < p.num_positions(); ++t) {
    Eigen::Index arg = 0;
    p.values().row(t).maxCoeff(&arg);  // first maximum
    best.tokens.push_back(static_cast<TokenId>(arg));
  }
  return collapse(best, p.blank_id(), mode);
}

namespace {

struct PrefixScore {
  double blank = kLogZero;     // log P(prefix, alignment so far ends in blank)
  double non_blank = kLogZero; // log P(prefix, alignment so far ends in its last word)
  double lm = 0.0;             // alpha * log p_LM(prefix words)

  double acoustic() const { return log_add(blank, non_blank); }
  double total() const { return acoustic() + lm; }
};

using Beam = std::map<std::vector<TokenId>, PrefixScore>;

void prune(Beam& beam, int beam_size) {
  if (static_cast<int>(beam.size()) <= beam_size) return;
  std::vector<std::pair<double, const std::vector<TokenId>*>> ranked;
  ranked.reserve(beam.size());
  for (const auto& [prefix, score] : beam) ranked.emplace_back(score.total(), &prefix);
  // Higher score first; equal scores keep the lexicographically smaller prefix.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Beam kept;
  for (int i = 0; i < beam_size; ++i) {
    auto node = beam.extract(*ranked[static_cast<std::size_t>(i)].second);
    kept.insert(std::move(node));
  }
  beam = std::move(kept);
}

}  // namespace

Sentence beam_decode(const ProbMatrix& p, const NGramLM* lm, const BeamConfig& config) {
  if (config.beam_size < 1) throw std::invalid_argument("beam_decode: beam_size must be >= 1");
  const bool use_lm = config.alpha != 0.0;
  if (use_lm && lm == nullptr) throw std::invalid_argument("beam_decode: alpha != 0 needs a language model");

  const TokenId blank = p.blank_id();
  const Matrix logp = p.values().unaryExpr([](double v) { return safe_log(v); });

  Beam beam;
  beam[{}].blank = 0.0;
  for (Eigen::Index t = 0; t < p.num_positions(); ++t) {
    Beam next;
    for (const auto& [prefix, score] : beam) {
      const double both = score.acoustic();
      if (both == kLogZero) continue;

      PrefixScore& same = next.try_emplace(prefix, PrefixScore{kLogZero, kLogZero, score.lm}).first->second;
      same.blank = log_add(same.blank, both + logp(t, blank));
      if (!prefix.empty()) {
        same.non_blank = log_add(same.non_blank, score.non_blank + logp(t, prefix.back()));
      }

      for (TokenId w = 0; w < blank; ++w) {
        if (logp(t, w) == kLogZero) continue;
        // A repeated word only starts a new token after a blank.
        const double from = !prefix.empty() && prefix.back() == w ? score.blank : both;
        if (from == kLogZero) continue;
        std::vector<TokenId> extended = prefix;
        extended.push_back(w);
        auto [it, inserted] = next.try_emplace(std::move(extended));
        if (inserted) {
          it->second.lm = score.lm + (use_lm ? config.alpha * lm->log_prob(prefix, w) : 0.0);
        }
        it->second.non_blank = log_add(it->second.non_blank, from + logp(t, w));
      }
    }
    prune(next, config.beam_size);
    beam = std::move(next);
  }

  const std::vector<TokenId>* best = nullptr;
  double best_score = kLogZero;
  for (const auto& [prefix, score] : beam) {
    double total = score.total();
    if (use_lm) total += config.alpha * lm->log_prob(prefix, lm->eos());
    if (config.beta != 0.0) {
      total += prefix.empty() ? (config.beta > 0.0 ? kLogZero : -kLogZero)
                              : config.beta * std::log(static_cast<double>(prefix.size()));
    }
    if (best == nullptr || total > best_score) {
      best = &prefix;
      best_score = total;
    }
  }
  return best == nullptr ? Sentence{} : Sentence(*best);
}

GridSearchResult grid_search_ab(std::span<const ProbMatrix> dev_probs,
                                std::span<const Sentence> dev_refs, const NGramLM& lm,
                                std::span<const GridPoint> grid, int beam_size, int workers) {
  if (grid.empty()) throw std::invalid_argument("grid_search_ab: empty grid");
  if (dev_probs.empty()) throw std::invalid_argument("grid_search_ab: empty dev set");
  if (dev_probs.size() != dev_refs.size()) throw std::invalid_argument("grid_search_ab: size mismatch");

  std::vector<GridPoint> points(grid.begin(), grid.end());
  std::sort(points.begin(), points.end());

  GridSearchResult result;
  bool have = false;
  std::vector<Sentence> hyps(dev_probs.size());
  for (const GridPoint& point : points) {
    const BeamConfig config{beam_size, point.alpha, point.beta};
    parallel_for(
        dev_probs.size(), [&](std::size_t i) { hyps[i] = beam_decode(dev_probs[i], &lm, config); },
        workers);
    const double score = bleu(hyps, dev_refs);
    if (!have || score > result.bleu) {
      result = {point, score};
      have = true;
    }
  }
  return result;
}

}  // namespace nmla
