#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "experiment.hpp"
#include "test_util.hpp"

namespace nmla::tools {
namespace {

using test::TempDir;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "nmla");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

// A task small enough that a full pipeline runs in a few seconds.
class TinyRun {
 public:
  TinyRun() : dir_() {}

  std::vector<std::string> with(const std::string& command, std::vector<std::string> extra = {}) const {
    std::vector<std::string> args{command};
    for (const std::string& s : settings()) {
      args.push_back("--set");
      args.push_back(s);
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  }

  std::vector<std::string> settings() const {
    std::vector<std::string> s{"task.vocab_size=6",          "task.min_length=3",
                               "task.max_length=5",          "task.num_pairs=200",
                               "model.dim=8",                "train.pretrain_steps=40",
                               "train.finetune_steps=20",    "train.batch_size=8",
                               "eval.eval_every=10",         "eval.eval_sentences=10",
                               "decode.beam_size=4",         "decode.grid_alpha=[0,0.2]",
                               "decode.grid_beta=[0,1]",     "decode.grid_dev_sentences=10",
                               "paths.data_dir=" + (dir_ / "data").string(),
                               "paths.run_dir=" + (dir_ / "run").string()};
    s.insert(s.end(), extra_.begin(), extra_.end());
    return s;
  }

  void set(const std::string& assignment) { extra_.push_back(assignment); }
  std::filesystem::path data(const std::string& name) const { return dir_ / "data" / name; }
  std::filesystem::path file(const std::string& name) const { return dir_ / "run" / name; }

 private:
  TempDir dir_;
  std::vector<std::string> extra_;
};

TEST(ExperimentConfig, DefaultsAndOverrides) {
  const ExperimentConfig defaults = parse_experiment_config("");
  EXPECT_EQ(defaults.task.vocab_size, 20);
  EXPECT_EQ(defaults.task.num_pairs, 10000);
  EXPECT_EQ(defaults.train.pretrain, Objective::ctc());
  EXPECT_EQ(defaults.train.finetune, Objective::f1(2, CollapseMode::kCtc));

  const ExperimentConfig c = parse_experiment_config(
      R"({"seed": 7, "task": {"reorder_prob": 0.25}, "train": {"pretrain_objective": "sctc",
          "finetune_objective": "bipartite"}})",
      {"train.pretrain_steps=12", "paths.run_dir=/tmp/somewhere", "decode.grid_beta=[0.5]"});
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.task.reorder_prob, 0.25);
  EXPECT_EQ(c.train.pretrain_steps, 12);
  EXPECT_EQ(c.train.finetune, Objective::bipartite());
  EXPECT_EQ(c.paths.run_dir, "/tmp/somewhere");
  EXPECT_EQ(c.decode.grid_beta, std::vector<double>{0.5});

  const ExperimentConfig back = parse_experiment_config(experiment_config_to_json(c));
  EXPECT_EQ(experiment_config_to_json(back), experiment_config_to_json(c));
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_experiment_config(R"({"sed": 1})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config(R"({"task": {"vocab": 3}})"), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config("", {"train.pretrain_stepz=3"}), std::invalid_argument);
  EXPECT_THROW(parse_experiment_config("", {"no-equals-sign"}), std::invalid_argument);
  EXPECT_ANY_THROW(parse_experiment_config("", {"train.finetune_objective=f1-3-ctc"}));
  EXPECT_ANY_THROW(parse_experiment_config("", {"train.pretrain_objective=bipartite"}));
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"evaluate"}).code, 2);  // --hyp is required
  EXPECT_EQ(run({"--help"}).code, 0);
  const CliResult bad = run({"gen-data", "--set", "task.bogus=1"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("unknown config key 'task.bogus'"), std::string::npos) << bad.err;
}

TEST(Cli, GenDataIsReproducibleAndSplits80_10_10) {
  TempDir a, b;
  for (const TempDir* d : {&a, &b}) {
    const CliResult r = run({"gen-data", "--set", "paths.data_dir=" + (*d / "data").string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const std::string name : {"source.vocab", "target.vocab", "train.tsv", "dev.tsv", "test.tsv"}) {
    EXPECT_EQ(slurp(a / "data" / name), slurp(b / "data" / name)) << name;
  }
  EXPECT_EQ(lines_of(slurp(a / "data" / "train.tsv")).size(), 8000u);
  EXPECT_EQ(lines_of(slurp(a / "data" / "dev.tsv")).size(), 1000u);
  EXPECT_EQ(lines_of(slurp(a / "data" / "test.tsv")).size(), 1000u);

  TempDir c;
  run({"gen-data", "--set", "seed=2", "--set", "paths.data_dir=" + (c / "data").string()});
  EXPECT_NE(slurp(a / "data" / "train.tsv"), slurp(c / "data" / "train.tsv"));
}

TEST(Cli, MonotoneTaskTranslatesWordByWord) {
  TinyRun run_dir;
  run_dir.set("task.reorder_prob=0");
  ASSERT_EQ(run(run_dir.with("gen-data")).code, 0);
  const ExperimentConfig config = parse_experiment_config("", run_dir.settings());
  const Dataset data = read_dataset(config);
  std::map<TokenId, TokenId> mapping;
  for (const auto& pair : data.train) {
    ASSERT_EQ(pair.source.size(), pair.target.size());
    for (std::size_t i = 0; i < pair.source.size(); ++i) {
      const auto [it, inserted] = mapping.emplace(pair.source[i], pair.target[i]);
      EXPECT_EQ(it->second, pair.target[i]);
    }
  }
  std::set<TokenId> images;
  for (const auto& [s, t] : mapping) images.insert(t);
  EXPECT_EQ(images.size(), mapping.size());
}

TEST(Cli, MissingInputsAreReported) {
  TinyRun r;
  const CliResult no_data = run(r.with("train"));
  EXPECT_EQ(no_data.code, 2);
  ASSERT_EQ(run(r.with("gen-data")).code, 0);
  const CliResult no_ckpt = run(r.with("finetune"));
  EXPECT_EQ(no_ckpt.code, 2);
  EXPECT_NE(no_ckpt.err.find("missing checkpoint"), std::string::npos) << no_ckpt.err;
  const CliResult no_model = run(r.with("decode"));
  EXPECT_EQ(no_model.code, 2);
  EXPECT_NE(no_model.err.find("missing checkpoint"), std::string::npos) << no_model.err;
}

TEST(Cli, FinetuneRejectsIncompatibleObjectives) {
  TinyRun r;
  r.set("train.pretrain_objective=sctc");
  r.set("train.finetune_objective=bipartite");
  ASSERT_EQ(run(r.with("gen-data")).code, 0);
  ASSERT_EQ(run(r.with("train")).code, 0);

  // A ctc-mode F1 config is valid by itself but not on top of an sctc model.
  std::vector<std::string> args = r.with("finetune", {"--set", "train.pretrain_objective=ctc", "--set",
                                                      "train.finetune_objective=f1-2-ctc"});
  const CliResult bad = run(args);
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("incompatible objectives"), std::string::npos) << bad.err;

  ASSERT_EQ(run(r.with("finetune")).code, 0);
  const CliResult twice = run(r.with("finetune", {"--from", r.file("finetune.ckpt.json").string(), "--checkpoint",
                                                  r.file("again.json").string()}));
  EXPECT_EQ(twice.code, 2);
  EXPECT_NE(twice.err.find("already finetuned"), std::string::npos) << twice.err;

  // sctc models decode with argmax only.
  const CliResult beam = run(r.with("decode", {"--method", "beam"}));
  EXPECT_EQ(beam.code, 2);
  EXPECT_NE(beam.err.find("ctc-pretrained"), std::string::npos) << beam.err;
}

TEST(Cli, FullPipelineWritesDecodesAndReports) {
  TinyRun r;
  ASSERT_EQ(run(r.with("gen-data")).code, 0);
  ASSERT_EQ(run(r.with("train")).code, 0);
  ASSERT_EQ(run(r.with("decode", {"--checkpoint", r.file("pretrain.ckpt.json").string(), "--label", "pre"})).code,
            0);
  ASSERT_EQ(run(r.with("finetune")).code, 0);
  ASSERT_EQ(run(r.with("decode", {"--label", "ft"})).code, 0);
  for (const std::string name : {"pre.argmax.txt", "pre.beam.txt", "ft.argmax.txt", "ft.beam.txt", "ft.beam.json",
                                 "pretrain.metrics.csv", "finetune.metrics.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(r.file(name))) << name;
  }
  EXPECT_EQ(lines_of(slurp(r.file("ft.argmax.txt"))).size(), 20u);

  const auto metrics = lines_of(slurp(r.file("pretrain.metrics.csv")));
  ASSERT_EQ(metrics.size(), 41u);
  EXPECT_EQ(metrics[0], "phase,step,loss,skipped,dev_bleu,dev_f1_2");
  EXPECT_EQ(metrics[1].rfind("pretrain,1,", 0), 0u);

  const CliResult eval = run(r.with("evaluate", {"--hyp", r.file("ft.beam.txt").string()}));
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto report = lines_of(slurp(r.file("report.csv")));
  ASSERT_EQ(report.size(), 1u + 4u + 3u);
  EXPECT_EQ(report[0], "bucket,count,bleu");
  EXPECT_EQ(report[1].rfind("[0,7),20,", 0), 0u);
  EXPECT_EQ(report[4].rfind("all,20,", 0), 0u);
  EXPECT_EQ(report[5].rfind("summary:f1_2,,", 0), 0u);
  EXPECT_EQ(report[6].rfind("summary:entropy,,", 0), 0u);
  EXPECT_EQ(report[7].rfind("summary:perplexity,,", 0), 0u);

  const CliResult cmp = run(r.with("report", {"--system", "pre=" + r.file("pre.argmax.txt").string(), "--system",
                                              "ft=" + r.file("ft.beam.txt").string()}));
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  const auto table = lines_of(slurp(r.file("comparison.csv")));
  ASSERT_EQ(table.size(), 1u + 2u * 5u);
  EXPECT_EQ(table[0], "system,bucket,count,bleu");
  EXPECT_EQ(table[1].rfind("pre,[0,7),20,", 0), 0u);
  EXPECT_EQ(table[5].rfind("pre,summary:f1_2,,", 0), 0u);
  EXPECT_EQ(table[6].rfind("ft,[0,7),20,", 0), 0u);

  EXPECT_EQ(run(r.with("report", {"--system", "broken"})).code, 2);
}

TEST(Cli, EvaluatingTheReferencesScoresOneHundred) {
  TinyRun r;
  ASSERT_EQ(run(r.with("gen-data")).code, 0);
  const ExperimentConfig config = parse_experiment_config("", r.settings());
  const Dataset data = read_dataset(config);
  std::filesystem::create_directories(r.file(""));
  write_sentences(r.file("refs.txt"), targets(data.test), data.target_vocab);
  const CliResult eval = run(r.with("evaluate", {"--hyp", r.file("refs.txt").string(), "--no-entropy"}));
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto report = lines_of(slurp(r.file("report.csv")));
  EXPECT_EQ(report[4], "all,20,100.00");
  EXPECT_EQ(report[5], "summary:f1_2,,1.000000");
  EXPECT_EQ(report[6].rfind("summary:perplexity,,", 0), 0u);

  std::ofstream(r.file("short.txt")) << data.target_vocab.word(0) << '\n';
  const CliResult mismatch = run(r.with("evaluate", {"--hyp", r.file("short.txt").string(), "--no-entropy"}));
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.err.find("1 lines"), std::string::npos) << mismatch.err;
}

TEST(Cli, ResumedTrainingReproducesTheUninterruptedRun) {
  TinyRun straight, resumed;
  for (TinyRun* r : {&straight, &resumed}) ASSERT_EQ(run(r->with("gen-data")).code, 0);
  ASSERT_EQ(run(straight.with("train")).code, 0);
  ASSERT_EQ(run(straight.with("finetune")).code, 0);

  ASSERT_EQ(run(resumed.with("train", {"--until", "17"})).code, 0);
  ASSERT_EQ(lines_of(slurp(resumed.file("pretrain.metrics.csv"))).size(), 18u);
  const CliResult cont = run(resumed.with("train", {"--resume"}));
  ASSERT_EQ(cont.code, 0) << cont.err;
  EXPECT_NE(cont.out.find("resuming pretraining at step 17"), std::string::npos) << cont.out;
  ASSERT_EQ(run(resumed.with("finetune", {"--until", "9"})).code, 0);
  ASSERT_EQ(run(resumed.with("finetune", {"--resume"})).code, 0);

  EXPECT_EQ(slurp(resumed.file("pretrain.metrics.csv")), slurp(straight.file("pretrain.metrics.csv")));
  EXPECT_EQ(slurp(resumed.file("finetune.metrics.csv")), slurp(straight.file("finetune.metrics.csv")));
  EXPECT_EQ(slurp(resumed.file("finetune.ckpt.json")), slurp(straight.file("finetune.ckpt.json")));

  const CliResult changed = run(resumed.with("train", {"--resume", "--set", "train.pretrain_lr=0.5"}));
  EXPECT_EQ(changed.code, 2);
  EXPECT_NE(changed.err.find("different config"), std::string::npos) << changed.err;
}

TEST(Cli, VerifyExitCodes) {
  const CliResult ok = run({"verify", "--scale", "0.2"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("\"suite\""), std::string::npos);
  const CliResult mutated = run({"verify", "--scale", "0.2", "--mutate", "transition"});
  EXPECT_EQ(mutated.code, 1);
  EXPECT_NE(mutated.out.find("\"passed\":false"), std::string::npos) << mutated.out;
}

}  // namespace
}  // namespace nmla::tools
