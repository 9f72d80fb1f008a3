#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nmla/decode_eval.hpp"
#include "nmla/monotonic.hpp"
#include "nmla/nonmono.hpp"
#include "nmla/synthetic.hpp"
#include "nmla/train.hpp"

namespace nmla::verify {
namespace {

constexpr double kFiniteDifferenceStep = 1e-5;
constexpr double kGradientTolerance = 1e-4;
// Gradient entries this small in both the analytic and numeric value are not
// compared: central differences cannot resolve them to 1e-4 relative.
constexpr double kGradientFloor = 1e-7;

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Tracks the worst error and the first failure of a suite.
class Tally {
 public:
  Tally(std::string name, double tolerance) {
    result_.name = std::move(name);
    result_.tolerance = tolerance;
  }

  void record(double error, const std::string& where) {
    if (std::isnan(error)) error = std::numeric_limits<double>::infinity();
    result_.max_error = std::max(result_.max_error, error);
    if (error > result_.tolerance && result_.passed) {
      result_.passed = false;
      std::ostringstream msg;
      msg << where << ": error " << std::setprecision(3) << error;
      result_.note = msg.str();
    }
  }

  void fail(const std::string& why) {
    if (result_.passed) result_.note = why;
    result_.passed = false;
  }

  SuiteResult finish(int instances) {
    result_.instances = instances;
    return result_;
  }

 private:
  SuiteResult result_;
};

int count_or(const SuiteOptions& options, int fallback) {
  return options.instances > 0 ? options.instances : fallback;
}

std::string describe(int instance) { return "instance " + std::to_string(instance); }

TransitionMatrix maybe_mutated(const ProbMatrix& p, Mutation mutation) {
  TransitionMatrix a = transition_matrix(p);
  if (mutation == Mutation::kTransition) a.at.transposeInPlace();
  return a;
}

// Central differences of f around x, one entry at a time.
template <typename F>
Matrix numeric_gradient(Matrix x, F&& f) {
  Matrix grad(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + kFiniteDifferenceStep;
    const double up = f(x);
    x.data()[i] = saved - kFiniteDifferenceStep;
    const double down = f(x);
    x.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * kFiniteDifferenceStep);
  }
  return grad;
}

double gradient_error(const Matrix& analytic, const Matrix& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double b = numeric.data()[i];
    if (std::max(std::abs(a), std::abs(b)) <= kGradientFloor) continue;
    worst = std::max(worst, relative_error(a, b));
  }
  return worst;
}

Matrix random_logits(Rng& rng, int length, int extended, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix logits(length, extended);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = normal(rng);
  return logits;
}

// Loss as a function of logits, with its analytic gradient.
LossValueWithGrad evaluate_loss(const std::string& loss, const Matrix& logits, const Sentence& y) {
  const ProbMatrix p = softmax_rows(LogitMatrix(logits));
  return objective_loss(p, y, Objective::parse(loss));
}

// Distance of the F1 instance from the kinks of min() and of the total clamp.
double f1_margin(const ProbMatrix& p, const Sentence& y, const Objective& objective) {
  const NGramCountTable ref = reference_ngram_counts(y, objective.n);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& [g, count] : ref) {
    margin = std::min(margin, std::abs(ngram_count_with_grad(p, g, objective.mode).value - count));
  }
  margin = std::min(margin, std::abs(sum_ngram_counts_with_grad(p, objective.n, objective.mode).value));
  return margin;
}

}  // namespace

Mutation parse_mutation(std::string_view text) {
  if (text.empty() || text == "none") return Mutation::kNone;
  if (text == "transition") return Mutation::kTransition;
  throw std::invalid_argument("unknown mutation '" + std::string(text) + "' (expected none or transition)");
}

void write_json_line(std::ostream& out, const SuiteResult& r) {
  nlohmann::json j = {{"suite", r.name},
                      {"instances", r.instances},
                      {"max_error", std::isfinite(r.max_error) ? nlohmann::json(r.max_error)
                                                               : nlohmann::json("inf")},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed}};
  if (!r.note.empty()) j["note"] = r.note;
  out << j.dump() << '\n';
}

ProbMatrix random_probs(Rng& rng, int length, int num_words, double scale) {
  return softmax_rows(LogitMatrix(random_logits(rng, length, num_words + 1, scale)));
}

ProbMatrix random_blank_free_probs(Rng& rng, int length, int num_words) {
  Matrix values = Matrix::Zero(length, num_words + 1);
  values.leftCols(num_words) =
      softmax_rows(LogitMatrix(random_logits(rng, length, num_words, 2.0))).values();
  return ProbMatrix(std::move(values));
}

Sentence random_sentence(Rng& rng, int length, int num_words) {
  Sentence s;
  for (int i = 0; i < length; ++i) s.tokens.push_back(uniform_int(rng, 0, num_words - 1));
  return s;
}

double relative_error(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

SuiteResult likelihood_oracle(const SuiteOptions& options, CollapseMode mode) {
  const std::string name = "likelihood_" + std::string(to_string(mode));
  Rng rng = make_rng(options.seed, name);
  Tally tally(name, 1e-9);
  const int n = count_or(options, 200);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_probs(rng, length, words);
    const Sentence y = random_sentence(rng, uniform_int(rng, 0, std::min(3, length)), words);
    const double log_dp = mode == CollapseMode::kCtc ? ctc_forward(p, y) : sctc_forward(p, y).log_likelihood();
    tally.record(relative_error(std::exp(log_dp), oracle::exact_likelihood(p, y, mode, options.budget)),
                 describe(i));
  }
  return tally.finish(n);
}

SuiteResult count_oracle_sctc(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "count_sctc");
  Tally tally("count_sctc", 1e-9);
  const int n = count_or(options, 200);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_probs(rng, length, words);
    const TransitionMatrix a = maybe_mutated(p, options.mutation);
    for (int order = 1; order <= 4; ++order) {
      const NGram g = random_sentence(rng, order, words).tokens;
      tally.record(relative_error(ngram_count_sctc(p, g, a),
                                  oracle::exact_ngram_count(p, g, CollapseMode::kSctc, options.budget)),
                   describe(i) + " n=" + std::to_string(order));
    }
  }
  return tally.finish(n);
}

SuiteResult count_oracle_ctc(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "count_ctc");
  Tally tally("count_ctc", 1e-9);
  const int n = count_or(options, 200);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_probs(rng, length, words);
    for (int order = 1; order <= 2; ++order) {
      const NGram g = random_sentence(rng, order, words).tokens;
      tally.record(relative_error(ngram_count_ctc(p, g),
                                  oracle::exact_ngram_count(p, g, CollapseMode::kCtc, options.budget)),
                   describe(i) + " n=" + std::to_string(order));
    }
  }
  return tally.finish(n);
}

SuiteResult state_recursion(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "state_recursion");
  Tally tally("state_recursion", 1e-12);
  const int n = count_or(options, 200);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_probs(rng, length, words);
    const TransitionMatrix a = maybe_mutated(p, options.mutation);
    for (int order = 1; order <= 4; ++order) {
      const NGram g = random_sentence(rng, order, words).tokens;
      tally.record(relative_error(ngram_count_sctc(p, g, a), oracle::direct_ngram_count_sctc(p, g)),
                   describe(i) + " n=" + std::to_string(order));
    }
  }
  return tally.finish(n);
}

SuiteResult repeat_identity(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "repeat_identity");
  Tally tally("repeat_identity", 1e-9);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_probs(rng, length, words);
    const TokenId w = uniform_int(rng, 0, words - 1);
    const double repeats = repeat_count(p, w);
    for (const NGram& g : {NGram{w}, NGram{w, w}}) {
      const double gap = oracle::exact_ngram_count(p, g, CollapseMode::kSctc, options.budget) -
                         oracle::exact_ngram_count(p, g, CollapseMode::kCtc, options.budget);
      tally.record(std::abs(repeats - gap), describe(i) + " n=" + std::to_string(g.size()));
    }
  }
  return tally.finish(n);
}

SuiteResult hungarian_optimality(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "hungarian");
  Tally tally("hungarian", 1e-9);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 7);
    const int words = uniform_int(rng, 1, 4);
    const ProbMatrix p = random_probs(rng, length, words);
    const Sentence y = random_sentence(rng, uniform_int(rng, 0, std::min(4, length)), words);
    const Matching m = hungarian_max(build_assignment(p, y));
    const double best = oracle::exact_best_alignment(p, y, options.budget).probability;
    tally.record(relative_error(std::exp(m.total_weight), best), describe(i));
  }
  return tally.finish(n);
}

SuiteResult sum_bound(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "nonmonotonic_bound");
  // Error is the amount by which -log max falls below -log sum.
  Tally tally("nonmonotonic_bound", 1e-12);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 7);
    const int words = uniform_int(rng, 1, 4);
    const ProbMatrix p = random_probs(rng, length, words);
    const Sentence y = random_sentence(rng, uniform_int(rng, 0, std::min(4, length)), words);
    const double loss = bipartite_loss(p, y).value;
    const double sum_loss = -std::log(oracle::exact_sum_nonmonotonic(p, y, options.budget));
    tally.record(std::max(0.0, sum_loss - loss), describe(i));
  }
  return tally.finish(n);
}

SuiteResult blank_free_total(const SuiteOptions& options, int order) {
  const std::string name = "blank_free_total_n" + std::to_string(order);
  Rng rng = make_rng(options.seed, name);
  Tally tally(name, 1e-9);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    // At least n - 1 positions, so every output has at least n - 1 words.
    const int length = uniform_int(rng, std::max(1, order - 1), 6);
    const int words = uniform_int(rng, 1, 3);
    const ProbMatrix p = random_blank_free_probs(rng, length, words);
    const double exact = oracle::exact_ngram_total(p, order, CollapseMode::kSctc, options.budget);
    tally.record(std::abs(sum_ngram_counts_sctc(p, order) - exact) / std::max(1.0, std::abs(exact)),
                 describe(i));
  }
  return tally.finish(n);
}

SuiteResult f1_range(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "f1_range");
  // Error is the distance of the loss outside [-1, 0].
  Tally tally("f1_range", 1e-12);
  const int n = count_or(options, 100);
  const std::vector<Objective> objectives = {
      Objective::f1(1, CollapseMode::kSctc), Objective::f1(2, CollapseMode::kSctc),
      Objective::f1(3, CollapseMode::kSctc), Objective::f1(4, CollapseMode::kSctc),
      Objective::f1(1, CollapseMode::kCtc), Objective::f1(2, CollapseMode::kCtc)};
  for (int i = 0; i < n; ++i) {
    for (const Objective& objective : objectives) {
      // Blank-free p with at least n - 1 positions keeps the model total exact.
      const int length = uniform_int(rng, std::max(1, objective.n - 1), 6);
      const int words = uniform_int(rng, 1, 3);
      const ProbMatrix p = random_blank_free_probs(rng, length, words);
      const Sentence y = random_sentence(rng, uniform_int(rng, 1, 5), words);
      const double loss = objective_loss(p, y, objective).value;
      tally.record(std::max({0.0, loss, -1.0 - loss}), describe(i) + " " + objective.name());
    }
  }
  return tally.finish(n);
}

std::vector<std::string> gradient_losses() {
  return {"ctc", "sctc", "bipartite", "f1-1-sctc", "f1-2-sctc", "f1-3-sctc", "f1-4-sctc",
          "f1-1-ctc", "f1-2-ctc"};
}

SuiteResult loss_gradient(const SuiteOptions& options, const std::string& loss) {
  const std::string name = "gradient_" + loss;
  const Objective objective = Objective::parse(loss);
  Rng rng = make_rng(options.seed, name);
  Tally tally(name, kGradientTolerance);
  const int n = count_or(options, 20);
  for (int i = 0; i < n; ++i) {
    Matrix logits;
    Sentence y;
    LossValueWithGrad analytic;
    // Draw until the target is reachable and, for F1, no min() or clamp kink
    // lies within reach of the finite-difference step.
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) {
        tally.fail("no usable instance found");
        return tally.finish(i);
      }
      // F1 targets need at least n words to have any reference gram.
      const bool f1 = objective.kind == Objective::Kind::kF1;
      const int min_target = f1 ? objective.n : 1;
      const int length = uniform_int(rng, std::max(2, min_target), 6);
      const int words = uniform_int(rng, 2, 3);
      logits = random_logits(rng, length, words + 1, 1.5);
      y = random_sentence(rng, uniform_int(rng, min_target, std::min(min_target + 2, length)), words);
      try {
        analytic = evaluate_loss(loss, logits, y);
      } catch (const ZeroLikelihood&) {
        continue;
      }
      if (objective.kind == Objective::Kind::kF1 &&
          f1_margin(softmax_rows(LogitMatrix(logits)), y, objective) < 1e-3) {
        continue;
      }
      break;
    }
    const Matrix numeric =
        numeric_gradient(logits, [&](const Matrix& x) { return evaluate_loss(loss, x, y).value; });
    tally.record(gradient_error(analytic.grad, numeric), describe(i));
  }
  return tally.finish(n);
}

SuiteResult model_gradient(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "model_gradient");
  Tally tally("model_gradient", kGradientTolerance);
  const std::vector<Objective> objectives = {Objective::ctc(), Objective::sctc(), Objective::bipartite(),
                                             Objective::f1(2, CollapseMode::kCtc)};
  const int n = count_or(options, 2);
  const ModelShape shape{5, 6, 8, 3};
  for (int i = 0; i < n; ++i) {
    for (const Objective& objective : objectives) {
      ToyModelParams params = init_params(shape, derive_seed(options.seed, "model_gradient", i));
      // Larger weights than the initializer so the gradients are not tiny.
      for (Matrix* t : params.tensors()) *t *= 10.0;
      const Sentence source = random_sentence(rng, 3, shape.source_vocab);  // T_a = 9
      const Sentence target = random_sentence(rng, uniform_int(rng, 2, 4), shape.extended_vocab - 1);

      auto loss_of = [&](const ToyModelParams& q, ToyModelParams* grads) {
        ForwardCache cache;
        const ProbMatrix p = softmax_rows(forward(q, source, grads != nullptr ? &cache : nullptr));
        const LossValueWithGrad l = objective_loss(p, target, objective);
        if (grads != nullptr) backward(q, source, cache, l.grad, *grads);
        return l.value;
      };
      ToyModelParams grads = params.zeros_like();
      try {
        loss_of(params, &grads);
      } catch (const ZeroLikelihood&) {
        continue;
      }
      auto tensors = params.tensors();
      const auto analytic = grads.tensors();
      for (std::size_t k = 0; k < tensors.size(); ++k) {
        const Matrix numeric = numeric_gradient(*tensors[k], [&](const Matrix& x) {
          ToyModelParams q = params;
          *q.tensors()[k] = x;
          return loss_of(q, nullptr);
        });
        tally.record(gradient_error(*analytic[k], numeric),
                     describe(i) + " " + objective.name() + " " +
                         std::string(ToyModelParams::kTensorNames[k]));
      }
    }
  }
  return tally.finish(n);
}

SuiteResult adam_closed_form(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "adam");
  Tally tally("adam_closed_form", 1e-12);
  const int n = count_or(options, 10);
  const ModelShape shape{4, 5, 3, 2};
  for (int i = 0; i < n; ++i) {
    const ToyModelParams start = init_params(shape, derive_seed(options.seed, "adam", i));
    ToyModelParams grads = start.zeros_like();
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Matrix* t : grads.tensors()) {
      for (Eigen::Index k = 0; k < t->size(); ++k) t->data()[k] = normal(rng);
    }
    const double lr = 1e-3;
    const AdamConfig config;
    ToyModelParams params = start;
    AdamState state = init_adam(params);
    adam_step(params, grads, state, lr, config);
    // First step from zero moments: delta = -lr g / (|g| + eps).
    const auto before = start.tensors();
    const auto after = params.tensors();
    const auto g = grads.tensors();
    for (std::size_t k = 0; k < after.size(); ++k) {
      const Matrix expected =
          *before[k] - (lr * g[k]->array() / (g[k]->array().abs() + config.epsilon)).matrix();
      tally.record((expected - *after[k]).cwiseAbs().maxCoeff() / lr, describe(i));
    }
    // A zero gradient leaves fresh parameters unchanged.
    ToyModelParams still = start;
    AdamState fresh = init_adam(still);
    adam_step(still, start.zeros_like(), fresh, lr, config);
    for (std::size_t k = 0; k < before.size(); ++k) {
      tally.record((*still.tensors()[k] - *before[k]).cwiseAbs().maxCoeff(), describe(i) + " zero grad");
    }
  }
  return tally.finish(n);
}

SuiteResult beam_exact(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "beam_exact");
  // Error is the relative probability gap between the beam output and the
  // exhaustive best sentence.
  Tally tally("beam_exact", 1e-9);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 4);
    const int words = uniform_int(rng, 1, 2);
    const ProbMatrix p = random_probs(rng, length, words);
    const Sentence beam = beam_decode(p, nullptr, {1000, 0.0, 0.0});
    const oracle::BestSentence best = oracle::exact_max_sentence(p, CollapseMode::kCtc, options.budget);
    if (beam == best.sentence) {
      tally.record(0.0, describe(i));
    } else {
      tally.record(relative_error(std::exp(ctc_forward(p, beam)), best.probability), describe(i));
    }
  }
  return tally.finish(n);
}

SuiteResult beam_beats_argmax(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "beam_vs_argmax");
  // Error is how far the beam output's log-likelihood falls below argmax's.
  Tally tally("beam_vs_argmax", 1e-9);
  const int n = count_or(options, 100);
  for (int i = 0; i < n; ++i) {
    const int length = uniform_int(rng, 1, 12);
    const int words = uniform_int(rng, 1, 5);
    const ProbMatrix p = random_probs(rng, length, words, 3.0);
    const Sentence beam = beam_decode(p, nullptr, {20, 0.0, 0.0});
    const Sentence greedy = argmax_decode(p, CollapseMode::kCtc);
    tally.record(std::max(0.0, ctc_forward(p, greedy) - ctc_forward(p, beam)), describe(i));
  }
  return tally.finish(n);
}

SuiteResult lm_normalization(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "lm_normalization");
  Tally tally("lm_normalization", 1e-9);
  const int n = count_or(options, 20);
  for (int i = 0; i < n; ++i) {
    const int words = uniform_int(rng, 1, 6);
    std::vector<Sentence> corpus;
    const int sentences = uniform_int(rng, 1, 30);
    for (int s = 0; s < sentences; ++s) corpus.push_back(random_sentence(rng, uniform_int(rng, 0, 6), words));
    const int order = uniform_int(rng, 1, 4);
    const double k = std::array{0.01, 0.1, 1.0}[static_cast<std::size_t>(uniform_int(rng, 0, 2))];
    const NGramLM lm = NGramLM::train(corpus, static_cast<std::size_t>(words), order, k);
    for (int h = 0; h < 5; ++h) {
      // Histories may include words never seen in that context.
      const Sentence history = random_sentence(rng, uniform_int(rng, 0, 5), words);
      double total = 0.0;
      for (TokenId w = 0; w <= lm.eos(); ++w) total += std::exp(lm.log_prob(history.tokens, w));
      tally.record(std::abs(total - 1.0), describe(i));
    }
  }
  return tally.finish(n);
}

SuiteResult entropy_permutation(const SuiteOptions& options) {
  Rng rng = make_rng(options.seed, "entropy_permutation");
  Tally tally("entropy_permutation", 1e-12);
  const int n = count_or(options, 20);
  for (int i = 0; i < n; ++i) {
    std::vector<ProbMatrix> ps;
    const int count = uniform_int(rng, 1, 5);
    for (int k = 0; k < count; ++k) ps.push_back(random_probs(rng, uniform_int(rng, 1, 8), 3));
    const double before = avg_entropy(ps);

    std::vector<ProbMatrix> shuffled;
    for (const ProbMatrix& p : ps) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(p.num_positions()));
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      Matrix rows(p.num_positions(), p.extended_size());
      for (std::size_t t = 0; t < order.size(); ++t) rows.row(static_cast<Eigen::Index>(t)) = p.values().row(order[t]);
      shuffled.emplace_back(std::move(rows));
    }
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    tally.record(std::abs(avg_entropy(shuffled) - before), describe(i));
  }
  return tally.finish(n);
}

SuiteResult training_determinism(const SuiteOptions& options) {
  Tally tally("training_determinism", 0.0);
  const SyntheticTask task = SyntheticTask::make(6, 3, 5, 0.5, options.seed);
  const Corpus corpus = generate_synthetic(task, 40, options.seed).pairs;
  const ModelShape shape{6, 7, 8, 3};
  TrainConfig config;
  config.seed = options.seed;
  config.pretrain_steps = 4;
  config.finetune_steps = 3;
  config.batch_size = 5;

  std::vector<TrainState> runs;
  for (const int workers : {1, 1, 3}) {
    TrainHooks hooks;
    hooks.workers = workers;
    runs.push_back(train(config, shape, corpus, hooks));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto a = runs[0].params.tensors();
    const auto b = runs[r].params.tensors();
    for (std::size_t k = 0; k < a.size(); ++k) {
      tally.record((*a[k] - *b[k]).cwiseAbs().maxCoeff(), "run " + std::to_string(r));
    }
  }
  return tally.finish(static_cast<int>(runs.size()));
}

std::vector<SuiteResult> run_all(const SuiteOptions& options, double scale,
                                 const std::function<void(const SuiteResult&)>& on_result) {
  auto scaled = [&](int count) {
    SuiteOptions o = options;
    o.instances = std::max(1, static_cast<int>(std::lround(count * scale)));
    return o;
  };
  std::vector<std::pair<std::string, std::function<SuiteResult()>>> suites = {
      {"likelihood_sctc", [&] { return likelihood_oracle(scaled(200), CollapseMode::kSctc); }},
      {"likelihood_ctc", [&] { return likelihood_oracle(scaled(200), CollapseMode::kCtc); }},
      {"count_sctc", [&] { return count_oracle_sctc(scaled(200)); }},
      {"count_ctc", [&] { return count_oracle_ctc(scaled(200)); }},
      {"state_recursion", [&] { return state_recursion(scaled(200)); }},
      {"repeat_identity", [&] { return repeat_identity(scaled(100)); }},
      {"hungarian", [&] { return hungarian_optimality(scaled(100)); }},
      {"nonmonotonic_bound", [&] { return sum_bound(scaled(100)); }},
      {"blank_free_total_n2", [&] { return blank_free_total(scaled(100), 2); }},
      {"f1_range", [&] { return f1_range(scaled(100)); }},
  };
  for (const std::string& loss : gradient_losses()) {
    suites.emplace_back("gradient_" + loss, [&, loss] { return loss_gradient(scaled(20), loss); });
  }
  suites.emplace_back("model_gradient", [&] { return model_gradient(scaled(2)); });
  suites.emplace_back("adam_closed_form", [&] { return adam_closed_form(scaled(10)); });
  suites.emplace_back("beam_exact", [&] { return beam_exact(scaled(100)); });
  suites.emplace_back("beam_vs_argmax", [&] { return beam_beats_argmax(scaled(100)); });
  suites.emplace_back("lm_normalization", [&] { return lm_normalization(scaled(20)); });
  suites.emplace_back("entropy_permutation", [&] { return entropy_permutation(scaled(20)); });
  suites.emplace_back("training_determinism", [&] { return training_determinism(options); });

  std::vector<SuiteResult> results;
  for (const auto& [name, suite] : suites) {
    SuiteResult r;
    try {
      r = suite();
    } catch (const std::exception& e) {
      r.name = name;
      r.passed = false;
      r.max_error = std::numeric_limits<double>::infinity();
      r.note = std::string("exception: ") + e.what();
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace nmla::verify
