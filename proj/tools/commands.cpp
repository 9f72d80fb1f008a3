#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "json.hpp"
#include "nmla/checkpoint.hpp"
#include "nmla/parallel.hpp"
#include "verify.hpp"

namespace nmla::tools {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;

  ExperimentConfig load() const {
    return config_path.empty() ? parse_experiment_config("", overrides)
                               : load_experiment_config(config_path, overrides);
  }
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("-c,--config", common.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--set", common.overrides, "Override a config key, e.g. --set train.pretrain_steps=500")
      ->type_name("KEY=VALUE");
}

std::string format_double(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

Checkpoint require_checkpoint(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw std::runtime_error("missing checkpoint " + path.string() + hint);
  return load_checkpoint(path);
}

// Everything except the step counts must agree between a checkpoint and the
// config that resumes it.
void check_resumable(const TrainConfig& saved, const TrainConfig& wanted) {
  auto strip = [](TrainConfig c) {
    c.pretrain_steps = 0;
    c.finetune_steps = 0;
    return train_config_to_json(c);
  };
  if (strip(saved) != strip(wanted)) {
    throw std::runtime_error("cannot resume: the checkpoint was trained with a different config");
  }
}

// Per-step training log. Evaluation columns are filled every eval_every steps.
class MetricsLog {
 public:
  // Opens `path` for appending, keeping only rows of this phase up to `keep_through`.
  MetricsLog(const fs::path& path, bool resume, std::int64_t keep_through) {
    std::vector<std::string> kept;
    if (resume && fs::exists(path)) {
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        if (first == std::string::npos || second == std::string::npos) continue;
        if (std::stoll(line.substr(first + 1, second - first - 1)) <= keep_through) kept.push_back(line);
      }
    }
    out_.open(path, std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write metrics file " + path.string());
    out_ << "phase,step,loss,skipped,dev_bleu,dev_f1_2\n";
    for (const auto& line : kept) out_ << line << '\n';
  }

  void step(const StepRecord& r) {
    flush_pending();
    std::ostringstream row;
    row << to_string(r.phase) << ',' << r.step << ',' << std::setprecision(10) << r.loss << ','
        << r.skipped;
    pending_ = row.str();
  }

  void eval(double bleu_score, double f1) {
    out_ << pending_ << ',' << format_double(bleu_score) << ',' << format_double(f1, 6) << '\n';
    pending_.clear();
  }

  ~MetricsLog() { flush_pending(); }

 private:
  void flush_pending() {
    if (!pending_.empty()) out_ << pending_ << ",,\n";
    pending_.clear();
    out_.flush();
  }

  std::ofstream out_;
  std::string pending_;
};

struct PhaseRun {
  Phase phase;
  fs::path checkpoint;
  fs::path metrics;
  bool resume = false;
  std::int64_t until = -1;
};

void run_training_phase(const ExperimentConfig& config, Checkpoint& ck, const PhaseRun& run,
                        std::ostream& out) {
  const Dataset data = read_dataset(config);
  const int workers = worker_count();
  const std::int64_t done =
      run.phase == Phase::kPretrain ? ck.state.pretrain_steps_done : ck.state.finetune_steps_done;
  fs::create_directories(run.checkpoint.parent_path().empty() ? fs::path(".") : run.checkpoint.parent_path());
  MetricsLog log(run.metrics, run.resume, done);

  const std::vector<Sentence> dev_sources = sources(data.dev);
  const std::vector<Sentence> dev_refs = targets(data.dev);
  const std::size_t dev_n = config.eval.eval_sentences > 0
                                ? std::min(dev_sources.size(), static_cast<std::size_t>(config.eval.eval_sentences))
                                : dev_sources.size();
  const std::span<const Sentence> dev_src(dev_sources.data(), dev_n);
  const std::span<const Sentence> dev_ref(dev_refs.data(), dev_n);

  TrainHooks hooks;
  hooks.workers = workers;
  hooks.eval_every = config.eval.eval_every;
  hooks.on_step = [&](const StepRecord& r) { log.step(r); };
  hooks.on_eval = [&](const TrainState& state, Phase phase, std::int64_t step) {
    const auto ps = predict(state.params, dev_src, workers);
    const auto hyps = argmax_all(ps, decode_mode(ck.config));
    const double b = bleu(hyps, dev_ref);
    const double f = ngram_f1(hyps, dev_ref, 2);
    log.eval(b, f);
    out << to_string(phase) << " step " << step << ": dev bleu " << format_double(b, 2) << ", dev 2-gram f1 "
        << format_double(f) << '\n';
    save_checkpoint(run.checkpoint, {ck.config, state});
  };

  try {
    run_phase(ck.state, ck.config, run.phase, data.train, hooks, run.until);
  } catch (const TrainingDiverged& e) {
    throw std::runtime_error(std::string(e.what()) + "; last good checkpoint: " + run.checkpoint.string());
  }
  save_checkpoint(run.checkpoint, ck);
  const std::int64_t now =
      run.phase == Phase::kPretrain ? ck.state.pretrain_steps_done : ck.state.finetune_steps_done;
  out << to_string(run.phase) << ": " << now << " steps done; checkpoint " << run.checkpoint.string()
      << ", metrics " << run.metrics.string() << '\n';
}

void cmd_gen_data(const CommonOptions& common, std::ostream& out) {
  const ExperimentConfig config = common.load();
  const Dataset data = generate_dataset(config);
  write_dataset(config, data);
  out << "wrote " << data.train.size() << " train, " << data.dev.size() << " dev, " << data.test.size()
      << " test pairs to " << config.paths.data_dir << '\n';
}

void cmd_train(const CommonOptions& common, bool resume, std::int64_t until, std::string checkpoint,
               std::ostream& out) {
  const ExperimentConfig config = common.load();
  const fs::path path = checkpoint.empty() ? config.run_file("pretrain.ckpt.json") : fs::path(checkpoint);
  Checkpoint ck;
  if (resume && fs::exists(path)) {
    ck = load_checkpoint(path);
    check_resumable(ck.config, config.train);
    ck.config = config.train;
    out << "resuming pretraining at step " << ck.state.pretrain_steps_done << '\n';
  } else {
    ck.config = config.train;
    ck.state = init_train_state(model_shape(config, read_dataset(config)), config.train);
  }
  run_training_phase(config, ck, {Phase::kPretrain, path, config.run_file("pretrain.metrics.csv"), resume, until},
                     out);
}

void cmd_finetune(const CommonOptions& common, bool resume, std::int64_t until, std::string from,
                  std::string checkpoint, std::ostream& out) {
  const ExperimentConfig config = common.load();
  const fs::path source = from.empty() ? config.run_file("pretrain.ckpt.json") : fs::path(from);
  const fs::path path = checkpoint.empty() ? config.run_file("finetune.ckpt.json") : fs::path(checkpoint);

  Checkpoint ck;
  if (resume && fs::exists(path)) {
    ck = load_checkpoint(path);
    check_resumable(ck.config, config.train);
    out << "resuming finetuning at step " << ck.state.finetune_steps_done << '\n';
  } else {
    ck = require_checkpoint(source, " (run `nmla train` first or pass --from)");
    if (ck.state.finetune_steps_done > 0) {
      throw std::runtime_error(source.string() + " is already finetuned; finetune from a pretrain checkpoint");
    }
    if (ck.state.pretrain_steps_done < ck.config.pretrain_steps) {
      out << "note: pretraining stopped at step " << ck.state.pretrain_steps_done << " of "
          << ck.config.pretrain_steps << '\n';
    }
  }
  // The pretraining half comes from the checkpoint; the finetune half from the config.
  TrainConfig merged = ck.config;
  merged.finetune = config.train.finetune;
  merged.finetune_steps = config.train.finetune_steps;
  merged.finetune_lr = config.train.finetune_lr;
  try {
    merged.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("incompatible objectives: " + std::string(e.what()));
  }
  ck.config = merged;
  run_training_phase(config, ck, {Phase::kFinetune, path, config.run_file("finetune.metrics.csv"), resume, until},
                     out);
}

fs::path default_checkpoint(const ExperimentConfig& config, const std::string& given) {
  return given.empty() ? config.run_file("finetune.ckpt.json") : fs::path(given);
}

void cmd_decode(const CommonOptions& common, const std::string& checkpoint, const std::string& split_name,
                const std::string& method, const std::string& label, std::ostream& out) {
  const ExperimentConfig config = common.load();
  const Checkpoint ck = require_checkpoint(default_checkpoint(config, checkpoint), " (pass --checkpoint)");
  const Dataset data = read_dataset(config);
  const int workers = worker_count();
  const std::vector<Sentence> src = sources(split(data, split_name));
  const std::vector<ProbMatrix> ps = predict(ck.state.params, src, workers);
  fs::create_directories(config.paths.run_dir);

  if (method == "argmax" || method == "both") {
    const fs::path path = config.run_file(label + ".argmax.txt");
    write_sentences(path, argmax_all(ps, decode_mode(ck.config)), data.target_vocab);
    out << "argmax: " << path.string() << '\n';
  }
  if (method == "beam" || method == "both") {
    if (decode_mode(ck.config) != CollapseMode::kCtc) {
      if (method == "beam") throw std::runtime_error("beam search needs a ctc-pretrained model");
      out << "beam: skipped, the model uses the sctc collapse\n";
      return;
    }
    const NGramLM lm = train_lm(config, data);
    BeamConfig beam{config.decode.beam_size, config.decode.alpha, config.decode.beta};
    nlohmann::json info = {{"beam_size", beam.beam_size}};
    if (config.decode.grid_search) {
      const GridSearchResult tuned = tune_beam(config, ck.state.params, data, lm, workers);
      beam.alpha = tuned.best.alpha;
      beam.beta = tuned.best.beta;
      info["dev_bleu"] = tuned.bleu;
    }
    info["alpha"] = beam.alpha;
    info["beta"] = beam.beta;
    const fs::path path = config.run_file(label + ".beam.txt");
    write_sentences(path, beam_all(ps, lm, beam, workers), data.target_vocab);
    std::ofstream(config.run_file(label + ".beam.json")) << info.dump(2) << '\n';
    out << "beam (alpha " << beam.alpha << ", beta " << beam.beta << "): " << path.string() << '\n';
  }
}

std::string bleu_cell(const std::optional<double>& v) { return v ? format_double(*v, 2) : ""; }

void cmd_evaluate(const CommonOptions& common, const std::string& hyp_path, const std::string& split_name,
                  const std::string& checkpoint, bool entropy, const std::string& out_path, std::ostream& out) {
  const ExperimentConfig config = common.load();
  const Dataset data = read_dataset(config);
  const std::vector<Sentence> refs = targets(split(data, split_name));
  const std::vector<Sentence> hyps = read_sentences(hyp_path, data.target_vocab);
  if (hyps.size() != refs.size()) {
    throw std::runtime_error(hyp_path + " has " + std::to_string(hyps.size()) + " lines, the " + split_name +
                             " split has " + std::to_string(refs.size()));
  }
  std::optional<double> avg_h;
  if (entropy) {
    const Checkpoint ck = require_checkpoint(default_checkpoint(config, checkpoint),
                                             " (pass --checkpoint, or --no-entropy)");
    avg_h = avg_entropy(predict(ck.state.params, sources(split(data, split_name)), worker_count()));
  }
  const NGramLM lm = train_lm(config, data);
  const double ppl = perplexity(lm, hyps);
  const double f1 = ngram_f1(hyps, refs, 2);
  const auto rows = length_bucket_report(hyps, refs, config.eval.buckets);

  const fs::path csv = out_path.empty() ? config.run_file("report.csv") : fs::path(out_path);
  if (!csv.parent_path().empty()) fs::create_directories(csv.parent_path());
  std::ofstream file(csv);
  if (!file) throw std::runtime_error("cannot write report " + csv.string());
  file << "bucket,count,bleu\n";
  for (const BucketRow& r : rows) file << r.label << ',' << r.count << ',' << bleu_cell(r.bleu) << '\n';
  file << "summary:f1_2,," << format_double(f1, 6) << '\n';
  if (avg_h) file << "summary:entropy,," << format_double(*avg_h, 6) << '\n';
  file << "summary:perplexity,," << format_double(ppl, 6) << '\n';

  for (const BucketRow& r : rows) {
    out << std::left << std::setw(10) << r.label << std::right << std::setw(7) << r.count << "  bleu "
        << (r.bleu ? format_double(*r.bleu, 2) : "-") << '\n';
  }
  out << "2-gram f1   " << format_double(f1) << '\n';
  if (avg_h) out << "entropy     " << format_double(*avg_h) << '\n';
  out << "perplexity  " << format_double(ppl, 3) << '\n';
  out << "report: " << csv.string() << '\n';
}

void cmd_report(const CommonOptions& common, const std::vector<std::string>& systems,
                const std::string& split_name, const std::string& out_path, std::ostream& out) {
  const ExperimentConfig config = common.load();
  const Dataset data = read_dataset(config);
  const std::vector<Sentence> refs = targets(split(data, split_name));

  std::vector<std::pair<std::string, std::vector<BucketRow>>> table;
  std::vector<double> f1s;
  for (const std::string& spec : systems) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw std::runtime_error("--system expects NAME=FILE, got " + spec);
    const std::string name = spec.substr(0, eq);
    const std::vector<Sentence> hyps = read_sentences(spec.substr(eq + 1), data.target_vocab);
    if (hyps.size() != refs.size()) throw std::runtime_error(name + ": line count differs from the references");
    table.emplace_back(name, length_bucket_report(hyps, refs, config.eval.buckets));
    f1s.push_back(ngram_f1(hyps, refs, 2));
  }

  const fs::path csv = out_path.empty() ? config.run_file("comparison.csv") : fs::path(out_path);
  if (!csv.parent_path().empty()) fs::create_directories(csv.parent_path());
  std::ofstream file(csv);
  if (!file) throw std::runtime_error("cannot write report " + csv.string());
  file << "system,bucket,count,bleu\n";
  for (std::size_t s = 0; s < table.size(); ++s) {
    for (const BucketRow& r : table[s].second) {
      file << table[s].first << ',' << r.label << ',' << r.count << ',' << bleu_cell(r.bleu) << '\n';
    }
    file << table[s].first << ",summary:f1_2,," << format_double(f1s[s], 6) << '\n';
  }

  // Human-readable: one column per system.
  out << std::left << std::setw(12) << "bucket";
  for (const auto& [name, rows] : table) out << std::right << std::setw(14) << name;
  out << '\n';
  for (std::size_t r = 0; r < table.front().second.size(); ++r) {
    out << std::left << std::setw(12) << table.front().second[r].label;
    for (const auto& [name, rows] : table) {
      out << std::right << std::setw(14) << (rows[r].bleu ? format_double(*rows[r].bleu, 2) : "-");
    }
    out << '\n';
  }
  out << std::left << std::setw(12) << "2-gram f1";
  for (const double f : f1s) out << std::right << std::setw(14) << format_double(f);
  out << "\nreport: " << csv.string() << '\n';
}

int cmd_verify(std::uint64_t seed, double scale, std::uint64_t budget, const std::string& mutate,
               std::ostream& out) {
  verify::SuiteOptions options;
  options.seed = seed;
  options.budget.max_alignments = budget;
  options.mutation = verify::parse_mutation(mutate);
  int failed = 0;
  int passed = 0;
  verify::run_all(options, scale, [&](const verify::SuiteResult& r) {
    verify::write_json_line(out, r);
    out.flush();
    (r.passed ? passed : failed) += 1;
  });
  out << nlohmann::json{{"summary", "verify"}, {"passed", passed}, {"failed", failed}}.dump() << '\n';
  return failed == 0 ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-alignment sequence objectives: data, training, decoding and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nmla 0.1.0");

  CommonOptions common;
  bool resume = false;
  std::int64_t until = -1;
  std::string checkpoint;
  std::string from;
  std::string split_name = "test";
  std::string method = "both";
  std::string label = "hyp";
  std::string hyp_path;
  std::string out_path;
  bool no_entropy = false;
  std::vector<std::string> systems;
  std::uint64_t seed = 1;
  double scale = 1.0;
  std::uint64_t budget = oracle::OracleBudget{}.max_alignments;
  std::string mutate = "none";

  auto* gen = app.add_subcommand("gen-data", "Write the synthetic train/dev/test corpus");
  add_common(gen, common);

  auto* train = app.add_subcommand("train", "Pretrain with the monotonic objective");
  add_common(train, common);
  train->add_flag("--resume", resume, "Continue from the checkpoint if it exists");
  train->add_option("--until", until, "Stop after this step (the run can be resumed)");
  train->add_option("--checkpoint", checkpoint, "Output checkpoint (default: <run_dir>/pretrain.ckpt.json)");

  auto* finetune = app.add_subcommand("finetune", "Finetune a pretrained checkpoint");
  add_common(finetune, common);
  finetune->add_flag("--resume", resume, "Continue from the finetune checkpoint if it exists");
  finetune->add_option("--until", until, "Stop after this step (the run can be resumed)");
  finetune->add_option("--from", from, "Pretrain checkpoint (default: <run_dir>/pretrain.ckpt.json)");
  finetune->add_option("--checkpoint", checkpoint, "Output checkpoint (default: <run_dir>/finetune.ckpt.json)");

  auto* decode = app.add_subcommand("decode", "Decode a split with argmax and/or beam search");
  add_common(decode, common);
  decode->add_option("--checkpoint", checkpoint, "Model checkpoint (default: <run_dir>/finetune.ckpt.json)");
  decode->add_option("--split", split_name, "train, dev or test")->check(CLI::IsMember({"train", "dev", "test"}));
  decode->add_option("--method", method, "argmax, beam or both")->check(CLI::IsMember({"argmax", "beam", "both"}));
  decode->add_option("--label", label, "Output file prefix inside run_dir");

  auto* evaluate = app.add_subcommand("evaluate", "Score a hypothesis file");
  add_common(evaluate, common);
  evaluate->add_option("--hyp", hyp_path, "Hypotheses, one sentence per line")->required();
  evaluate->add_option("--split", split_name, "Reference split")->check(CLI::IsMember({"train", "dev", "test"}));
  evaluate->add_option("--checkpoint", checkpoint, "Model for the entropy row (default: <run_dir>/finetune.ckpt.json)");
  evaluate->add_flag("--no-entropy", no_entropy, "Skip the entropy row (no checkpoint needed)");
  evaluate->add_option("--out", out_path, "CSV report (default: <run_dir>/report.csv)");

  auto* verify_cmd = app.add_subcommand("verify", "Run the oracle, gradient and invariant suites");
  verify_cmd->add_option("--seed", seed, "Instance seed");
  verify_cmd->add_option("--scale", scale, "Multiplier on the instance counts")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--budget", budget, "Largest alignment space the oracles may enumerate");
  verify_cmd->add_option("--mutate", mutate, "Inject a fault: none or transition")
      ->check(CLI::IsMember({"none", "transition"}));

  auto* report = app.add_subcommand("report", "Compare hypothesis files by length bucket");
  add_common(report, common);
  report->add_option("--system", systems, "NAME=FILE, repeatable")->required();
  report->add_option("--split", split_name, "Reference split")->check(CLI::IsMember({"train", "dev", "test"}));
  report->add_option("--out", out_path, "CSV report (default: <run_dir>/comparison.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*gen) cmd_gen_data(common, out);
    if (*train) cmd_train(common, resume, until, checkpoint, out);
    if (*finetune) cmd_finetune(common, resume, until, from, checkpoint, out);
    if (*decode) cmd_decode(common, checkpoint, split_name, method, label, out);
    if (*evaluate) cmd_evaluate(common, hyp_path, split_name, checkpoint, !no_entropy, out_path, out);
    if (*report) cmd_report(common, systems, split_name, out_path, out);
    if (*verify_cmd) return cmd_verify(seed, scale, budget, mutate, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace nmla::tools
