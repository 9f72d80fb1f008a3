#include "experiment.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nmla/checkpoint.hpp"
#include "nmla/parallel.hpp"
#include "nmla/random.hpp"

namespace nmla::tools {
namespace {

using nlohmann::json;

json to_json(const ExperimentConfig& c) {
  json train = json::parse(train_config_to_json(c.train));
  train.erase("seed");
  return {
      {"seed", c.seed},
      {"task",
       {{"vocab_size", c.task.vocab_size},
        {"min_length", c.task.min_length},
        {"max_length", c.task.max_length},
        {"reorder_prob", c.task.reorder_prob},
        {"num_pairs", c.task.num_pairs},
        {"dev_fraction", c.task.dev_fraction},
        {"test_fraction", c.task.test_fraction}}},
      {"model", {{"dim", c.model_dim}, {"upsample_factor", c.upsample_factor}}},
      {"train", train},
      {"decode",
       {{"beam_size", c.decode.beam_size},
        {"alpha", c.decode.alpha},
        {"beta", c.decode.beta},
        {"lm_order", c.decode.lm_order},
        {"lm_k", c.decode.lm_k},
        {"grid_search", c.decode.grid_search},
        {"grid_alpha", c.decode.grid_alpha},
        {"grid_beta", c.decode.grid_beta},
        {"grid_dev_sentences", c.decode.grid_dev_sentences}}},
      {"eval",
       {{"buckets", c.eval.buckets},
        {"eval_every", c.eval.eval_every},
        {"eval_sentences", c.eval.eval_sentences}}},
      {"paths", {{"data_dir", c.paths.data_dir}, {"run_dir", c.paths.run_dir}}},
  };
}

// Every key in `given` must exist in `known`, recursively through objects.
void check_keys(const json& given, const json& known, const std::string& prefix) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + path + "'");
    if (known[key].is_object()) check_keys(value, known[key], path);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
  (*node)[path.back()] = value;
}

ExperimentConfig from_json(const json& j) {
  const ExperimentConfig defaults;
  check_keys(j, to_json(defaults), "");

  ExperimentConfig c;
  c.seed = j.value("seed", c.seed);
  if (j.contains("task")) {
    const json& t = j["task"];
    c.task.vocab_size = t.value("vocab_size", c.task.vocab_size);
    c.task.min_length = t.value("min_length", c.task.min_length);
    c.task.max_length = t.value("max_length", c.task.max_length);
    c.task.reorder_prob = t.value("reorder_prob", c.task.reorder_prob);
    c.task.num_pairs = t.value("num_pairs", c.task.num_pairs);
    c.task.dev_fraction = t.value("dev_fraction", c.task.dev_fraction);
    c.task.test_fraction = t.value("test_fraction", c.task.test_fraction);
  }
  if (j.contains("model")) {
    c.model_dim = j["model"].value("dim", c.model_dim);
    c.upsample_factor = j["model"].value("upsample_factor", c.upsample_factor);
  }
  if (j.contains("train")) c.train = train_config_from_json(j["train"].dump());
  c.train.seed = c.seed;
  if (j.contains("decode")) {
    const json& d = j["decode"];
    c.decode.beam_size = d.value("beam_size", c.decode.beam_size);
    c.decode.alpha = d.value("alpha", c.decode.alpha);
    c.decode.beta = d.value("beta", c.decode.beta);
    c.decode.lm_order = d.value("lm_order", c.decode.lm_order);
    c.decode.lm_k = d.value("lm_k", c.decode.lm_k);
    c.decode.grid_search = d.value("grid_search", c.decode.grid_search);
    c.decode.grid_alpha = d.value("grid_alpha", c.decode.grid_alpha);
    c.decode.grid_beta = d.value("grid_beta", c.decode.grid_beta);
    c.decode.grid_dev_sentences = d.value("grid_dev_sentences", c.decode.grid_dev_sentences);
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    c.eval.buckets = e.value("buckets", c.eval.buckets);
    c.eval.eval_every = e.value("eval_every", c.eval.eval_every);
    c.eval.eval_sentences = e.value("eval_sentences", c.eval.eval_sentences);
  }
  if (j.contains("paths")) {
    c.paths.data_dir = j["paths"].value("data_dir", c.paths.data_dir);
    c.paths.run_dir = j["paths"].value("run_dir", c.paths.run_dir);
  }
  c.validate();
  return c;
}

std::vector<Sentence> take(std::span<const Sentence> all, int limit) {
  const std::size_t n = limit > 0 ? std::min(all.size(), static_cast<std::size_t>(limit)) : all.size();
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace

void ExperimentConfig::validate() const {
  SyntheticTask::make(task.vocab_size, task.min_length, task.max_length, task.reorder_prob, 0);
  if (task.num_pairs < 3) throw std::invalid_argument("task.num_pairs must be at least 3");
  if (!(task.dev_fraction > 0.0 && task.test_fraction > 0.0 &&
        task.dev_fraction + task.test_fraction < 1.0)) {
    throw std::invalid_argument("task.dev_fraction and task.test_fraction must be positive and sum below 1");
  }
  if (model_dim < 1) throw std::invalid_argument("model.dim must be >= 1");
  if (upsample_factor < 1) throw std::invalid_argument("model.upsample_factor must be >= 1");
  train.validate();
  if (decode.beam_size < 1) throw std::invalid_argument("decode.beam_size must be >= 1");
  if (decode.lm_order < 1) throw std::invalid_argument("decode.lm_order must be >= 1");
  if (!(decode.lm_k > 0.0)) throw std::invalid_argument("decode.lm_k must be positive");
  if (decode.grid_alpha.empty() || decode.grid_beta.empty()) {
    throw std::invalid_argument("decode.grid_alpha and decode.grid_beta must be nonempty");
  }
  if (eval.buckets.empty()) throw std::invalid_argument("eval.buckets must be nonempty");
  for (std::size_t i = 1; i < eval.buckets.size(); ++i) {
    if (eval.buckets[i] <= eval.buckets[i - 1]) {
      throw std::invalid_argument("eval.buckets must be strictly increasing");
    }
  }
}

std::filesystem::path ExperimentConfig::data_file(const std::string& name) const {
  return std::filesystem::path(paths.data_dir) / name;
}

std::filesystem::path ExperimentConfig::run_file(const std::string& name) const {
  return std::filesystem::path(paths.run_dir) / name;
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::vector<std::string>& overrides) {
  json doc = json_text.empty() ? json::object() : json::parse(json_text);
  for (const std::string& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str(), overrides);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  return to_json(config).dump(2);
}

Dataset generate_dataset(const ExperimentConfig& config) {
  const TaskSpec& t = config.task;
  const SyntheticTask task = SyntheticTask::make(t.vocab_size, t.min_length, t.max_length,
                                                 t.reorder_prob, derive_seed(config.seed, "task"));
  const Corpus pairs = generate_synthetic(task, static_cast<std::size_t>(t.num_pairs),
                                          derive_seed(config.seed, "data"))
                           .pairs;
  const auto total = pairs.size();
  const auto dev = static_cast<std::size_t>(std::lround(t.dev_fraction * static_cast<double>(total)));
  const auto test = static_cast<std::size_t>(std::lround(t.test_fraction * static_cast<double>(total)));
  if (dev == 0 || test == 0 || dev + test >= total) {
    throw std::invalid_argument("task split leaves an empty train, dev or test set");
  }
  const auto train = total - dev - test;

  Dataset d;
  d.source_vocab = Vocabulary::synthetic(static_cast<std::size_t>(t.vocab_size), "s");
  d.target_vocab = Vocabulary::synthetic(static_cast<std::size_t>(t.vocab_size), "t");
  d.train.assign(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(train));
  d.dev.assign(pairs.begin() + static_cast<std::ptrdiff_t>(train),
               pairs.begin() + static_cast<std::ptrdiff_t>(train + dev));
  d.test.assign(pairs.begin() + static_cast<std::ptrdiff_t>(train + dev), pairs.end());
  return d;
}

void write_dataset(const ExperimentConfig& config, const Dataset& data) {
  std::filesystem::create_directories(config.paths.data_dir);
  data.source_vocab.save(config.data_file("source.vocab"));
  data.target_vocab.save(config.data_file("target.vocab"));
  write_corpus(config.data_file("train.tsv"), data.train, data.source_vocab, data.target_vocab);
  write_corpus(config.data_file("dev.tsv"), data.dev, data.source_vocab, data.target_vocab);
  write_corpus(config.data_file("test.tsv"), data.test, data.source_vocab, data.target_vocab);
}

Dataset read_dataset(const ExperimentConfig& config) {
  Dataset d;
  d.source_vocab = Vocabulary::load(config.data_file("source.vocab"));
  d.target_vocab = Vocabulary::load(config.data_file("target.vocab"));
  d.train = read_corpus(config.data_file("train.tsv"), d.source_vocab, d.target_vocab);
  d.dev = read_corpus(config.data_file("dev.tsv"), d.source_vocab, d.target_vocab);
  d.test = read_corpus(config.data_file("test.tsv"), d.source_vocab, d.target_vocab);
  return d;
}

const Corpus& split(const Dataset& data, const std::string& name) {
  if (name == "train") return data.train;
  if (name == "dev") return data.dev;
  if (name == "test") return data.test;
  throw std::invalid_argument("unknown split '" + name + "' (expected train, dev or test)");
}

ModelShape model_shape(const ExperimentConfig& config, const Dataset& data) {
  return {static_cast<int>(data.source_vocab.num_words()),
          static_cast<int>(data.target_vocab.extended_size()), config.model_dim,
          config.upsample_factor};
}

std::vector<ProbMatrix> predict(const ToyModelParams& params, std::span<const Sentence> sources,
                                int workers) {
  std::vector<ProbMatrix> out(sources.size());
  parallel_for(
      sources.size(), [&](std::size_t i) { out[i] = softmax_rows(forward(params, sources[i])); },
      workers);
  return out;
}

CollapseMode decode_mode(const TrainConfig& config) {
  return config.pretrain.kind == Objective::Kind::kSctc ? CollapseMode::kSctc : CollapseMode::kCtc;
}

std::vector<Sentence> argmax_all(std::span<const ProbMatrix> ps, CollapseMode mode) {
  std::vector<Sentence> out;
  out.reserve(ps.size());
  for (const ProbMatrix& p : ps) out.push_back(argmax_decode(p, mode));
  return out;
}

std::vector<Sentence> beam_all(std::span<const ProbMatrix> ps, const NGramLM& lm,
                               const BeamConfig& beam, int workers) {
  std::vector<Sentence> out(ps.size());
  parallel_for(ps.size(), [&](std::size_t i) { out[i] = beam_decode(ps[i], &lm, beam); }, workers);
  return out;
}

NGramLM train_lm(const ExperimentConfig& config, const Dataset& data) {
  const std::vector<Sentence> corpus = targets(data.train);
  return NGramLM::train(corpus, data.target_vocab.num_words(), config.decode.lm_order,
                        config.decode.lm_k);
}

std::vector<GridPoint> decode_grid(const DecodeSpec& spec) {
  std::vector<GridPoint> grid;
  for (const double a : spec.grid_alpha) {
    for (const double b : spec.grid_beta) grid.push_back({a, b});
  }
  return grid;
}

GridSearchResult tune_beam(const ExperimentConfig& config, const ToyModelParams& params,
                           const Dataset& data, const NGramLM& lm, int workers) {
  const std::vector<Sentence> dev_sources = take(sources(data.dev), config.decode.grid_dev_sentences);
  const std::vector<Sentence> dev_refs = take(targets(data.dev), config.decode.grid_dev_sentences);
  const std::vector<ProbMatrix> ps = predict(params, dev_sources, workers);
  return grid_search_ab(ps, dev_refs, lm, decode_grid(config.decode), config.decode.beam_size, workers);
}

}  // namespace nmla::tools
