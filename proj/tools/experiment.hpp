#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nmla/corpus.hpp"
#include "nmla/decode_eval.hpp"
#include "nmla/model.hpp"
#include "nmla/synthetic.hpp"
#include "nmla/train.hpp"

namespace nmla::tools {

struct TaskSpec {
  int vocab_size = 20;
  int min_length = 6;
  int max_length = 10;
  double reorder_prob = 0.5;
  int num_pairs = 10000;
  double dev_fraction = 0.1;
  double test_fraction = 0.1;
};

struct DecodeSpec {
  int beam_size = 20;
  double alpha = 0.0;
  double beta = 0.0;
  int lm_order = 4;
  double lm_k = 0.1;
  bool grid_search = true;
  std::vector<double> grid_alpha = {0.0, 0.1, 0.2, 0.5};
  std::vector<double> grid_beta = {0.0, 0.5, 1.0, 2.0};
  int grid_dev_sentences = 200;  // dev prefix used for the grid search; 0 = all
};

struct EvalSpec {
  std::vector<int> buckets = {0, 7, 9};  // reference-length boundaries
  std::int64_t eval_every = 500;         // training steps between dev evaluations; 0 = never
  int eval_sentences = 200;              // dev prefix scored during training; 0 = all
};

struct PathSpec {
  std::string data_dir = "data";
  std::string run_dir = "run";
};

// The whole experiment. JSON sections: seed, task, model {dim, upsample_factor},
// train (TrainConfig keys), decode, eval, paths; see experiment_config_to_json.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  TaskSpec task;
  int model_dim = 32;
  int upsample_factor = 3;
  TrainConfig train;  // train.seed is always replaced by `seed`
  DecodeSpec decode;
  EvalSpec eval;
  PathSpec paths;

  void validate() const;

  std::filesystem::path data_file(const std::string& name) const;
  std::filesystem::path run_file(const std::string& name) const;
};

// Parses a JSON document; absent keys keep their defaults and unknown keys are
// rejected. `overrides` are "dotted.key=value" strings applied before parsing;
// a value that parses as JSON is used as such, anything else as a string.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::vector<std::string>& overrides = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides = {});
std::string experiment_config_to_json(const ExperimentConfig& config);

// Data files produced by gen-data.
struct Dataset {
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  Corpus train;
  Corpus dev;
  Corpus test;
};

Dataset generate_dataset(const ExperimentConfig& config);
void write_dataset(const ExperimentConfig& config, const Dataset& data);
Dataset read_dataset(const ExperimentConfig& config);
const Corpus& split(const Dataset& data, const std::string& name);  // train, dev or test

ModelShape model_shape(const ExperimentConfig& config, const Dataset& data);

// Output distributions of the model, one matrix per source sentence.
std::vector<ProbMatrix> predict(const ToyModelParams& params, std::span<const Sentence> sources,
                                int workers = 1);

// Collapse used by argmax decoding of a model pretrained with `config`.
CollapseMode decode_mode(const TrainConfig& config);

std::vector<Sentence> argmax_all(std::span<const ProbMatrix> ps, CollapseMode mode);
std::vector<Sentence> beam_all(std::span<const ProbMatrix> ps, const NGramLM& lm,
                               const BeamConfig& beam, int workers = 1);

NGramLM train_lm(const ExperimentConfig& config, const Dataset& data);
std::vector<GridPoint> decode_grid(const DecodeSpec& spec);

// Grid search on the dev prefix configured in `spec`.
GridSearchResult tune_beam(const ExperimentConfig& config, const ToyModelParams& params,
                           const Dataset& data, const NGramLM& lm, int workers = 1);

}  // namespace nmla::tools
