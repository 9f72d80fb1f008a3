#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "nmla/core.hpp"
#include "nmla/oracle.hpp"
#include "nmla/random.hpp"

namespace nmla::verify {

// Fault injected into the library under test, to check that the harness can fail.
enum class Mutation { kNone, kTransition };
Mutation parse_mutation(std::string_view text);

struct SuiteResult {
  std::string name;
  int instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string note;  // first failure, if any
};

// One JSON object per line.
void write_json_line(std::ostream& out, const SuiteResult& r);

struct SuiteOptions {
  std::uint64_t seed = 1;
  int instances = 0;  // 0: the suite's default count
  Mutation mutation = Mutation::kNone;
  oracle::OracleBudget budget;
};

// Random instance helpers, exposed for the tests.
ProbMatrix random_probs(Rng& rng, int length, int num_words, double scale = 2.0);
ProbMatrix random_blank_free_probs(Rng& rng, int length, int num_words);
Sentence random_sentence(Rng& rng, int length, int num_words);

// |a - b| / max(|a|, |b|), zero when equal (including both infinite).
double relative_error(double a, double b);

// Individual suites. Tolerances are fixed inside each suite.
SuiteResult likelihood_oracle(const SuiteOptions& options, CollapseMode mode);
SuiteResult count_oracle_sctc(const SuiteOptions& options);
SuiteResult count_oracle_ctc(const SuiteOptions& options);
SuiteResult state_recursion(const SuiteOptions& options);
SuiteResult repeat_identity(const SuiteOptions& options);
SuiteResult hungarian_optimality(const SuiteOptions& options);
SuiteResult sum_bound(const SuiteOptions& options);
SuiteResult blank_free_total(const SuiteOptions& options, int n);
SuiteResult f1_range(const SuiteOptions& options);
SuiteResult loss_gradient(const SuiteOptions& options, const std::string& loss);
SuiteResult model_gradient(const SuiteOptions& options);
SuiteResult adam_closed_form(const SuiteOptions& options);
SuiteResult beam_exact(const SuiteOptions& options);
SuiteResult beam_beats_argmax(const SuiteOptions& options);
SuiteResult lm_normalization(const SuiteOptions& options);
SuiteResult entropy_permutation(const SuiteOptions& options);
SuiteResult training_determinism(const SuiteOptions& options);

// Loss names accepted by loss_gradient.
std::vector<std::string> gradient_losses();

// Every suite above. `scale` multiplies the default instance counts (at least 1
// instance each).
std::vector<SuiteResult> run_all(const SuiteOptions& options, double scale = 1.0,
                                 const std::function<void(const SuiteResult&)>& on_result = {});

}  // namespace nmla::verify
