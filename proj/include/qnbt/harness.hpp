#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnbt/optimizers.hpp"
#include "qnbt/problems.hpp"

namespace qnbt {

enum class ReportFormat { Csv, Markdown, JsonLines };

std::optional<ReportFormat> format_from_string(const std::string& s);

struct StochasticSetup {
  double sigma = 1.0;
  int batch_size = 10;
};

struct ExperimentDef {
  std::string id;
  std::string title;
  std::string problem;      // objective name in the registry
  std::string start_label;  // which initial point of that problem
  std::vector<Algorithm> algorithms;
  int max_iters = 10000;
  double grad_tol = 1e-10;
  int repeats = 1;  // independent repeats with derived seeds (stochastic rows)
  std::optional<StochasticSetup> stochastic;
  bool gated = false;  // heavy row: skipped by "run all" unless explicitly included
};

struct ResultRow {
  std::string experiment;
  std::string algorithm;
  int iterations = 0;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
  double time_seconds = 0.0;
  long long f_evals = 0;
  std::string termination;
};

/* Fixed list of desk-scale experiment replays, in report order. */
const std::vector<ExperimentDef>& experiment_registry();

const ExperimentDef* find_experiment(const std::string& id);

/* Runs every (algorithm, repeat) cell of one experiment. Deterministic for a
   fixed seed apart from the time columns. */
std::vector<ResultRow> run_experiment(const ExperimentDef& def, std::uint64_t seed);

/* Fraction of trials (initial points uniform in the ball of the given radius
   around the problem's saddle) whose run escapes: final f below
   f(saddle) - 10 radius^2, or final iterate outside the unit ball. */
double saddle_avoidance_stats(const ProblemSpec& prob, Algorithm algo, double radius,
                              int trials, std::uint64_t seed);

/* Render rows in one of the three formats. csv and jsonlines print floats with
   17 significant digits so values round-trip exactly; markdown uses 4. */
std::string emit_report(const std::vector<ResultRow>& rows, ReportFormat format);

/* Seed precedence: explicit CLI value, then the QNBT_SEED environment string,
   then 0. Throws std::invalid_argument if the environment string is not a
   base-10 unsigned integer. */
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed, const char* env_value);

}  // namespace qnbt
