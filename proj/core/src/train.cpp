#include "nmla/train.hpp"

#include <cmath>
#include <random>

#include "nmla/monotonic.hpp"
#include "nmla/nonmono.hpp"
#include "nmla/parallel.hpp"
#include "nmla/random.hpp"

namespace nmla {

std::string Objective::name() const {
  switch (kind) {
    case Kind::kCtc: return "ctc";
    case Kind::kSctc: return "sctc";
    case Kind::kBipartite: return "bipartite";
    case Kind::kF1: return "f1-" + std::to_string(n) + "-" + std::string(to_string(mode));
  }
  return "?";
}

Objective Objective::parse(std::string_view text) {
  if (text == "ctc") return ctc();
  if (text == "sctc") return sctc();
  if (text == "bipartite") return bipartite();
  // f1-<n>-<mode>
  if (text.starts_with("f1-")) {
    const auto rest = text.substr(3);
    const auto dash = rest.find('-');
    if (dash != std::string_view::npos) {
      const int n = std::stoi(std::string(rest.substr(0, dash)));
      return f1(n, parse_collapse_mode(rest.substr(dash + 1)));
    }
  }
  throw std::invalid_argument("unknown objective '" + std::string(text) +
                              "' (expected ctc, sctc, bipartite or f1-<n>-<ctc|sctc>)");
}

LossValueWithGrad objective_loss(const ProbMatrix& p, const Sentence& target,
                                 const Objective& objective) {
  switch (objective.kind) {
    case Objective::Kind::kCtc: return ctc_loss(p, target);
    case Objective::Kind::kSctc: return sctc_loss(p, target);
    case Objective::Kind::kBipartite: return bipartite_loss(p, target);
    case Objective::Kind::kF1:
      return f1_loss(p, reference_ngram_counts(target, objective.n), objective.mode);
  }
  throw std::logic_error("objective_loss: unhandled kind");
}

void TrainConfig::validate() const {
  if (!pretrain.is_monotonic()) {
    throw std::invalid_argument("pretrain objective must be ctc or sctc, got " + pretrain.name());
  }
  if (finetune.kind == Objective::Kind::kBipartite && pretrain.kind != Objective::Kind::kSctc) {
    throw std::invalid_argument(
        "bipartite finetuning needs an sctc-pretrained model; bipartite matching is not "
        "defined under the ctc collapse");
  }
  if (finetune.kind == Objective::Kind::kF1) {
    if (finetune.n < 1) throw std::invalid_argument("f1 finetuning needs n >= 1");
    if (finetune.mode == CollapseMode::kCtc && finetune.n > 2) {
      throw std::invalid_argument("f1 finetuning under ctc supports n in {1, 2}, got n = " +
                                  std::to_string(finetune.n));
    }
    const bool pretrained_ctc = pretrain.kind == Objective::Kind::kCtc;
    if (pretrained_ctc != (finetune.mode == CollapseMode::kCtc)) {
      throw std::invalid_argument("f1 finetuning mode must match the pretraining collapse (" +
                                  pretrain.name() + ")");
    }
  }
  if (pretrain_steps < 0 || finetune_steps < 0) throw std::invalid_argument("negative step count");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(pretrain_lr > 0.0) || !(finetune_lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
}

std::string_view to_string(Phase phase) {
  return phase == Phase::kPretrain ? "pretrain" : "finetune";
}

TrainingDiverged::TrainingDiverged(Phase phase, std::int64_t step)
    : std::runtime_error("non-finite loss or gradient at " + std::string(to_string(phase)) +
                         " step " + std::to_string(step)),
      phase_(phase),
      step_(step) {}

TrainState init_train_state(const ModelShape& shape, const TrainConfig& config) {
  TrainState state;
  state.params = init_params(shape, derive_seed(config.seed, "model"));
  state.adam = init_adam(state.params);
  return state;
}

BatchGradient batch_gradient(const ToyModelParams& params, const Corpus& corpus,
                             std::span<const std::size_t> indices, const Objective& objective,
                             int workers) {
  struct Slot {
    double loss = 0.0;
    bool used = false;
    ToyModelParams grads;
  };
  std::vector<Slot> slots(indices.size());
  parallel_for(
      indices.size(),
      [&](std::size_t i) {
        const SentencePair& pair = corpus.at(indices[i]);
        ForwardCache cache;
        const ProbMatrix p = softmax_rows(forward(params, pair.source, &cache));
        LossValueWithGrad loss;
        try {
          loss = objective_loss(p, pair.target, objective);
        } catch (const ZeroLikelihood&) {
          return;
        }
        slots[i].loss = loss.value;
        slots[i].used = true;
        slots[i].grads = params.zeros_like();
        backward(params, pair.source, cache, loss.grad, slots[i].grads);
      },
      workers);

  BatchGradient out;
  out.grads = params.zeros_like();
  auto total = out.grads.tensors();
  for (const Slot& slot : slots) {
    if (!slot.used) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    out.loss += slot.loss;
    const auto part = slot.grads.tensors();
    for (std::size_t k = 0; k < total.size(); ++k) *total[k] += *part[k];
  }
  if (out.used > 0) {
    const double scale = 1.0 / out.used;
    out.loss *= scale;
    for (Matrix* t : total) *t *= scale;
  }
  return out;
}

std::vector<std::size_t> sample_batch(std::uint64_t seed, Phase phase, std::int64_t step,
                                      std::size_t corpus_size, int batch_size) {
  if (corpus_size == 0) throw std::invalid_argument("sample_batch: empty corpus");
  Rng rng = make_rng(seed, to_string(phase), static_cast<std::uint64_t>(step));
  std::uniform_int_distribution<std::size_t> pick(0, corpus_size - 1);
  std::vector<std::size_t> batch(static_cast<std::size_t>(batch_size));
  for (auto& i : batch) i = pick(rng);
  return batch;
}

void run_phase(TrainState& state, const TrainConfig& config, Phase phase, const Corpus& corpus,
               const TrainHooks& hooks, std::int64_t until_step) {
  config.validate();
  const bool pretraining = phase == Phase::kPretrain;
  const Objective& objective = pretraining ? config.pretrain : config.finetune;
  const std::int64_t total = pretraining ? config.pretrain_steps : config.finetune_steps;
  const std::int64_t last = until_step < 0 ? total : std::min(until_step, total);
  const double lr = pretraining ? config.pretrain_lr : config.finetune_lr;
  std::int64_t& done = pretraining ? state.pretrain_steps_done : state.finetune_steps_done;

  if (!pretraining && done == 0 && last > 0) state.adam = init_adam(state.params);

  while (done < last) {
    const std::int64_t step = done + 1;
    if (!state.params.all_finite()) throw TrainingDiverged(phase, step);
    const auto batch = sample_batch(config.seed, phase, step, corpus.size(), config.batch_size);
    BatchGradient g = batch_gradient(state.params, corpus, batch, objective, hooks.workers);
    if (!std::isfinite(g.loss) || !g.grads.all_finite()) throw TrainingDiverged(phase, step);
    if (g.used > 0) adam_step(state.params, g.grads, state.adam, lr, config.adam);
    if (!state.params.all_finite()) throw TrainingDiverged(phase, step);
    done = step;

    if (hooks.on_step) hooks.on_step({phase, step, g.loss, g.skipped});
    if (hooks.on_eval && hooks.eval_every > 0 && step % hooks.eval_every == 0) {
      hooks.on_eval(state, phase, step);
    }
  }
}

TrainState train(const TrainConfig& config, const ModelShape& shape, const Corpus& corpus,
                 const TrainHooks& hooks) {
  TrainState state = init_train_state(shape, config);
  run_phase(state, config, Phase::kPretrain, corpus, hooks);
  run_phase(state, config, Phase::kFinetune, corpus, hooks);
  return state;
}

}  // namespace nmla
