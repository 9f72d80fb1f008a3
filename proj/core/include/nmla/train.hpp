#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "nmla/corpus.hpp"
#include "nmla/model.hpp"

namespace nmla {

// One training objective over the output lattice.
struct Objective {
  enum class Kind { kCtc, kSctc, kBipartite, kF1 };

  Kind kind = Kind::kCtc;
  int n = 2;                               // F1 only
  CollapseMode mode = CollapseMode::kCtc;  // F1 only

  static Objective ctc() { return {Kind::kCtc, 0, CollapseMode::kCtc}; }
  static Objective sctc() { return {Kind::kSctc, 0, CollapseMode::kSctc}; }
  static Objective bipartite() { return {Kind::kBipartite, 0, CollapseMode::kSctc}; }
  static Objective f1(int n, CollapseMode mode) { return {Kind::kF1, n, mode}; }

  bool is_monotonic() const { return kind == Kind::kCtc || kind == Kind::kSctc; }
  std::string name() const;  // "ctc", "sctc", "bipartite", "f1-2-ctc", ...
  static Objective parse(std::string_view text);

  friend bool operator==(const Objective&, const Objective&) = default;
};

LossValueWithGrad objective_loss(const ProbMatrix& p, const Sentence& target,
                                 const Objective& objective);

struct TrainConfig {
  Objective pretrain = Objective::ctc();
  Objective finetune = Objective::f1(2, CollapseMode::kCtc);
  std::int64_t pretrain_steps = 3000;
  std::int64_t finetune_steps = 1000;
  double pretrain_lr = 3e-3;
  double finetune_lr = 3e-4;
  AdamConfig adam;
  int batch_size = 32;
  std::uint64_t seed = 1;

  // Pretraining must be monotonic; bipartite finetuning needs an SCTC model;
  // F1 under CTC is limited to n in {1, 2}. Throws std::invalid_argument.
  void validate() const;
};

enum class Phase { kPretrain, kFinetune };
std::string_view to_string(Phase phase);

struct TrainState {
  ToyModelParams params;
  AdamState adam;
  std::int64_t pretrain_steps_done = 0;
  std::int64_t finetune_steps_done = 0;
};

TrainState init_train_state(const ModelShape& shape, const TrainConfig& config);

struct StepRecord {
  Phase phase = Phase::kPretrain;
  std::int64_t step = 0;  // 1-based within the phase
  double loss = 0.0;
  int skipped = 0;  // examples with zero target probability
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(Phase phase, std::int64_t step);
  Phase phase() const { return phase_; }
  std::int64_t step() const { return step_; }

 private:
  Phase phase_;
  std::int64_t step_;
};

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const TrainState&, Phase, std::int64_t)> on_eval;
  std::int64_t eval_every = 0;
  int workers = 1;
};

struct BatchGradient {
  double loss = 0.0;  // mean over used examples
  int used = 0;
  int skipped = 0;
  ToyModelParams grads;
};

// Mean loss and parameter gradient over corpus[indices]. Per-example gradients
// are reduced in index order, so the result does not depend on `workers`.
BatchGradient batch_gradient(const ToyModelParams& params, const Corpus& corpus,
                             std::span<const std::size_t> indices, const Objective& objective,
                             int workers = 1);

// Batch indices for a given phase step; a pure function of (seed, phase, step).
std::vector<std::size_t> sample_batch(std::uint64_t seed, Phase phase, std::int64_t step,
                                      std::size_t corpus_size, int batch_size);

// Advances the phase until `until_step` (inclusive) or the configured step
// count, whichever is smaller. Resuming from a saved state continues the exact
// same trajectory. Starting the finetune phase resets the optimizer moments.
void run_phase(TrainState& state, const TrainConfig& config, Phase phase, const Corpus& corpus,
               const TrainHooks& hooks = {}, std::int64_t until_step = -1);

// Pretrain then finetune.
TrainState train(const TrainConfig& config, const ModelShape& shape, const Corpus& corpus,
                 const TrainHooks& hooks = {});

}  // namespace nmla
