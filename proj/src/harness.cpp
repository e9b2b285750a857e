#include "qnbt/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qnbt {

std::optional<ReportFormat> format_from_string(const std::string& s) {
  std::string key;
  key.reserve(s.size());
  for (char c : s) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "csv") return ReportFormat::Csv;
  if (key == "markdown" || key == "md") return ReportFormat::Markdown;
  if (key == "jsonlines" || key == "jsonl") return ReportFormat::JsonLines;
  return std::nullopt;
}

namespace {

const std::vector<Algorithm> kBenchAlgos = {Algorithm::Newton, Algorithm::NQN, Algorithm::V1,
                                            Algorithm::V2,     Algorithm::V3, Algorithm::V4,
                                            Algorithm::UTB_GD};
const std::vector<Algorithm> kSaddleAlgos = {Algorithm::Newton, Algorithm::NQN, Algorithm::V1,
                                             Algorithm::V2, Algorithm::UTB_GD};
const std::vector<Algorithm> kStochasticAlgos = {Algorithm::NQN_B, Algorithm::V2,
                                                 Algorithm::UTB_GD};

ExperimentDef bench(std::string id, std::string title, std::string problem,
                    std::string start_label, int max_iters) {
  ExperimentDef def;
  def.id = std::move(id);
  def.title = std::move(title);
  def.problem = std::move(problem);
  def.start_label = std::move(start_label);
  def.algorithms = kBenchAlgos;
  def.max_iters = max_iters;
  return def;
}

ExperimentDef saddle(std::string id, std::string title, std::string problem) {
  ExperimentDef def;
  def.id = std::move(id);
  def.title = std::move(title);
  def.problem = std::move(problem);
  def.start_label = "published";
  def.algorithms = kSaddleAlgos;
  def.max_iters = 50;
  return def;
}

ExperimentDef stochastic(std::string id, std::string title, double sigma, int batch_size,
                         bool gated) {
  ExperimentDef def;
  def.id = std::move(id);
  def.title = std::move(title);
  def.problem = "stochastic-griewank";
  def.start_label = "published";
  def.algorithms = kStochasticAlgos;
  def.max_iters = 200;
  def.stochastic = StochasticSetup{sigma, batch_size};
  def.gated = gated;
  return def;
}

std::vector<ExperimentDef> build_registry() {
  std::vector<ExperimentDef> reg;
  reg.push_back(bench("bench-abs-power", "Absolute power well", "abs-power", "published", 10000));
  reg.push_back(bench("bench-oscillatory-cubic", "Oscillatory cubic", "oscillatory-cubic",
                      "published", 10000));
  reg.push_back(
      bench("bench-kinked-valley", "Kinked quadratic valley", "kinked-valley", "published", 10000));
  reg.push_back(bench("bench-ackley", "Ackley well, dimension 3", "ackley", "published", 10000));
  reg.push_back(
      bench("bench-rastrigin", "Rastrigin egg-crate, dimension 4", "rastrigin", "published", 10000));
  reg.push_back(bench("bench-beale", "Beale valley", "beale", "published", 10000));
  reg.push_back(bench("bench-bukin6-far", "Bukin N.6 ridge, distant start", "bukin6", "far", 10000));
  reg.push_back(
      bench("bench-bukin6-near", "Bukin N.6 ridge, close start", "bukin6", "near", 10000));
  reg.push_back(bench("bench-schaffer2", "Schaffer N.2 rings", "schaffer2", "published", 10000));
  reg.push_back(
      bench("bench-griewank", "Griewank well, dimension 10", "griewank-10", "published", 1000));
  {
    ExperimentDef def;
    def.id = "protein-10mer";
    def.title = "Planar bead-chain folding, ABBBABABAB";
    def.problem = "protein-10mer";
    def.start_label = "published";
    def.algorithms = kSaddleAlgos;
    def.max_iters = 100;
    reg.push_back(std::move(def));
  }
  reg.push_back(saddle("saddle-monkey", "Monkey saddle escape", "monkey-saddle"));
  reg.push_back(saddle("saddle-gutter", "Gutter saddle escape", "gutter-saddle"));
  reg.push_back(saddle("saddle-quartic-form", "Indefinite quartic form escape", "quartic-form"));
  reg.push_back(
      saddle("saddle-gutter-line", "Gutter saddle line escape", "gutter-line-saddle"));
  const double sigma_small = std::sqrt(0.1);
  reg.push_back(stochastic("stoch-griewank-n10-var01", "Mini-batch Griewank, batch 10, var 0.1",
                           sigma_small, 10, false));
  reg.push_back(stochastic("stoch-griewank-n10-var1", "Mini-batch Griewank, batch 10, var 1",
                           1.0, 10, false));
  reg.push_back(stochastic("stoch-griewank-n100-var01", "Mini-batch Griewank, batch 100, var 0.1",
                           sigma_small, 100, false));
  reg.push_back(stochastic("stoch-griewank-n100-var1", "Mini-batch Griewank, batch 100, var 1",
                           1.0, 100, false));
  reg.push_back(stochastic("stoch-griewank-n500-var1", "Mini-batch Griewank, batch 500, var 1",
                           1.0, 500, true));
  reg.push_back(stochastic("stoch-griewank-n1000-var1", "Mini-batch Griewank, batch 1000, var 1",
                           1.0, 1000, true));
  return reg;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/* Cell seed: FNV-1a over the naming strings folded with the base seed, then one
   splitmix64 round so nearby base seeds give unrelated streams. */
std::uint64_t cell_seed(std::uint64_t base, const std::string& experiment,
                        const std::string& algorithm, int repeat) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto eat = [&h](const std::string& s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    h ^= 0xffU;
    h *= 1099511628211ULL;
  };
  eat(experiment);
  eat(algorithm);
  h ^= base;
  h ^= 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(repeat + 1);
  return splitmix64(h);
}

const InitialPoint& find_start(const ProblemSpec& prob, const std::string& label) {
  for (const InitialPoint& s : prob.starts)
    if (s.label == label) return s;
  throw std::invalid_argument("run_experiment: problem '" + prob.objective.name() +
                              "' has no start labeled '" + label + "'");
}

RunReport run_cell(const ExperimentDef& def, const ProblemSpec& prob, Algorithm algo,
                   std::uint64_t seed) {
  const InitialPoint& start = find_start(prob, def.start_label);
  const Objective obj = prob.objective.with_fresh_counts();
  ResampleHook hook;
  if (def.stochastic) {
    const StochasticSetup setup = *def.stochastic;
    const int dim = obj.dim();
    auto rng = std::make_shared<std::mt19937_64>(seed);
    hook = [rng, setup, dim](int) {
      return stochastic_griewank_objective(
          draw_griewank_batch(*rng, setup.sigma, setup.batch_size, dim));
    };
  }
  if (algo == Algorithm::UTB_GD) {
    GDConfig cfg;
    cfg.grad_tol = def.grad_tol;
    cfg.max_iters = def.max_iters;
    return run(obj, start.x, cfg, hook);
  }
  OptimizerConfig cfg;
  cfg.algorithm = algo;
  cfg.grad_tol = def.grad_tol;
  cfg.max_iters = def.max_iters;
  cfg.seed = seed;
  return run(obj, start.x, cfg, hook);
}

}  // namespace

const std::vector<ExperimentDef>& experiment_registry() {
  static const std::vector<ExperimentDef> registry = build_registry();
  return registry;
}

const ExperimentDef* find_experiment(const std::string& id) {
  for (const ExperimentDef& def : experiment_registry())
    if (def.id == id) return &def;
  return nullptr;
}

std::vector<ResultRow> run_experiment(const ExperimentDef& def, std::uint64_t seed) {
  const ProblemSpec& prob = find_problem(def.problem);
  std::vector<ResultRow> rows;
  rows.reserve(def.algorithms.size() * static_cast<std::size_t>(def.repeats));
  for (int r = 0; r < def.repeats; ++r) {
    for (Algorithm algo : def.algorithms) {
      const std::string algo_name = to_string(algo);
      const RunReport rep = run_cell(def, prob, algo, cell_seed(seed, def.id, algo_name, r));
      ResultRow row;
      row.experiment = def.repeats > 1 ? def.id + "#" + std::to_string(r) : def.id;
      row.algorithm = algo_name;
      row.iterations = rep.iterations();
      row.f_final = rep.final_record().f;
      row.grad_norm_final = rep.final_record().grad_norm;
      row.time_seconds = rep.total_seconds;
      row.f_evals = rep.counts.values;
      row.termination = to_string(rep.termination);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double saddle_avoidance_stats(const ProblemSpec& prob, Algorithm algo, double radius,
                              int trials, std::uint64_t seed) {
  if (!prob.saddle) throw std::invalid_argument("saddle_avoidance_stats: problem has no saddle");
  if (trials < 1) throw std::invalid_argument("saddle_avoidance_stats: trials must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("saddle_avoidance_stats: radius must be > 0");
  const Vector& s = *prob.saddle;
  const int dim = prob.objective.dim();
  const Objective obj = prob.objective.with_fresh_counts();
  const double f_saddle = obj.value(s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int escaped = 0;
  for (int t = 0; t < trials; ++t) {
    Vector dir(dim);
    double norm = 0.0;
    do {
      for (int i = 0; i < dim; ++i) dir[i] = gauss(rng);
      norm = dir.norm();
    } while (norm == 0.0);
    const double r = radius * std::pow(unit(rng), 1.0 / dim);
    const Vector x0 = s + (r / norm) * dir;

    RunReport rep;
    if (algo == Algorithm::UTB_GD) {
      GDConfig cfg;
      cfg.max_iters = 100;
      rep = run(obj, x0, cfg);
    } else {
      OptimizerConfig cfg;
      cfg.algorithm = algo;
      cfg.max_iters = 100;
      rep = run(obj, x0, cfg);
    }
    const IterationRecord& last = rep.final_record();
    const bool escape =
        last.f < f_saddle - 10.0 * radius * radius || (last.x - s).norm() > 1.0;
    if (escape) ++escaped;
  }
  return static_cast<double>(escaped) / static_cast<double>(trials);
}

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt17(double v) { return fmt(v, "%.17g"); }
std::string fmt4(double v) { return fmt(v, "%.4g"); }

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt17(v);
}

std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      out += buf;
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string emit_report(const std::vector<ResultRow>& rows, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Csv: {
      out << "experiment,algorithm,iterations,f_final,grad_norm_final,time_seconds,"
             "f_evals,termination\n";
      for (const ResultRow& r : rows) {
        out << r.experiment << ',' << r.algorithm << ',' << r.iterations << ','
            << fmt17(r.f_final) << ',' << fmt17(r.grad_norm_final) << ','
            << fmt17(r.time_seconds) << ',' << r.f_evals << ',' << r.termination << '\n';
      }
      break;
    }
    case ReportFormat::JsonLines: {
      for (const ResultRow& r : rows) {
        out << "{\"experiment\":" << json_string(r.experiment)
            << ",\"algorithm\":" << json_string(r.algorithm)
            << ",\"iterations\":" << r.iterations << ",\"f_final\":" << json_number(r.f_final)
            << ",\"grad_norm_final\":" << json_number(r.grad_norm_final)
            << ",\"time_seconds\":" << json_number(r.time_seconds)
            << ",\"f_evals\":" << r.f_evals
            << ",\"termination\":" << json_string(r.termination) << "}\n";
      }
      break;
    }
    case ReportFormat::Markdown: {
      std::string current;
      bool first = true;
      for (const ResultRow& r : rows) {
        if (r.experiment != current) {
          current = r.experiment;
          if (!first) out << '\n';
          first = false;
          out << "## " << current << "\n\n";
          out << "| algorithm | iterations | f_final | grad_norm_final | time_seconds "
                 "| f_evals | termination |\n";
          out << "| --- | --- | --- | --- | --- | --- | --- |\n";
        }
        out << "| " << r.algorithm << " | " << r.iterations << " | " << fmt4(r.f_final)
            << " | " << fmt4(r.grad_norm_final) << " | " << fmt4(r.time_seconds) << " | "
            << r.f_evals << " | " << r.termination << " |\n";
      }
      break;
    }
  }
  return out.str();
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed, const char* env_value) {
  if (cli_seed) return *cli_seed;
  if (env_value == nullptr || *env_value == '\0') return 0;
  std::uint64_t parsed = 0;
  const char* end = env_value;
  while (*end != '\0') ++end;
  const auto [ptr, ec] = std::from_chars(env_value, end, parsed, 10);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument(std::string("QNBT_SEED is not an unsigned integer: '") +
                                env_value + "'");
  return parsed;
}

}  // namespace qnbt
