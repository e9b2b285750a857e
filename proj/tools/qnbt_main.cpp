#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qnbt/acceptance.hpp"
#include "qnbt/harness.hpp"
#include "qnbt/optimizers.hpp"

namespace {

std::string self_path(const char* argv0) {
  char buf[4096];
  const ssize_t n = ::readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n > 0) {
    buf[n] = '\0';
    return buf;
  }
  return argv0 != nullptr ? argv0 : "";
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(token);
  }
  return out;
}

std::string join_algorithms(const std::vector<qnbt::Algorithm>& algos) {
  std::string out;
  for (qnbt::Algorithm a : algos) {
    if (!out.empty()) out += ",";
    out += qnbt::to_string(a);
  }
  return out;
}

int do_list() {
  for (const qnbt::ExperimentDef& def : qnbt::experiment_registry()) {
    std::cout << def.id << (def.gated ? "  [gated]" : "") << "\n";
    std::cout << "    " << def.title << "\n";
    std::cout << "    problem=" << def.problem << " start=" << def.start_label
              << " max_iters=" << def.max_iters << " grad_tol=" << def.grad_tol;
    if (def.stochastic)
      std::cout << " sigma=" << def.stochastic->sigma
                << " batch=" << def.stochastic->batch_size;
    std::cout << "\n    algorithms=" << join_algorithms(def.algorithms) << "\n";
  }
  return 0;
}

int do_check(const std::string& cli) {
  const auto results = qnbt::acceptance::run_all_checks(cli);
  for (const auto& r : results)
    std::printf("[%s] %2d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
  return qnbt::acceptance::all_passed(results) ? 0 : 2;
}

struct RunOptions {
  std::string target;
  std::string algos_csv;
  int max_iters = 0;
  bool max_iters_set = false;
  double grad_tol = 0.0;
  bool grad_tol_set = false;
  std::optional<std::uint64_t> seed;
  std::string format_name = "csv";
  std::string out_path;
  bool include_gated = false;
};

int do_run(const RunOptions& opt) {
  const auto format = qnbt::format_from_string(opt.format_name);
  if (!format) {
    std::cerr << "unknown format '" << opt.format_name
              << "' (expected csv, markdown, or jsonlines)\n";
    return 1;
  }
  std::vector<qnbt::Algorithm> filter;
  for (const std::string& token : split_csv(opt.algos_csv)) {
    const auto algo = qnbt::algorithm_from_string(token);
    if (!algo) {
      std::cerr << "unknown algorithm '" << token << "'\n";
      return 1;
    }
    filter.push_back(*algo);
  }
  if (opt.max_iters_set && opt.max_iters < 0) {
    std::cerr << "--max-iters must be >= 0\n";
    return 1;
  }
  if (opt.grad_tol_set && !(opt.grad_tol >= 0.0)) {
    std::cerr << "--grad-tol must be >= 0\n";
    return 1;
  }
  std::uint64_t seed = 0;
  try {
    seed = qnbt::resolve_seed(opt.seed, std::getenv("QNBT_SEED"));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  std::vector<qnbt::ExperimentDef> defs;
  if (opt.target == "all") {
    for (const qnbt::ExperimentDef& def : qnbt::experiment_registry())
      if (!def.gated || opt.include_gated) defs.push_back(def);
  } else {
    const qnbt::ExperimentDef* def = qnbt::find_experiment(opt.target);
    if (def == nullptr) {
      std::cerr << "unknown experiment '" << opt.target << "' (see 'list')\n";
      return 1;
    }
    defs.push_back(*def);
  }
  for (qnbt::ExperimentDef& def : defs) {
    if (opt.max_iters_set) def.max_iters = opt.max_iters;
    if (opt.grad_tol_set) def.grad_tol = opt.grad_tol;
    if (!filter.empty()) {
      std::vector<qnbt::Algorithm> kept;
      for (qnbt::Algorithm a : def.algorithms)
        if (std::find(filter.begin(), filter.end(), a) != filter.end()) kept.push_back(a);
      def.algorithms = std::move(kept);
    }
  }

  std::vector<qnbt::ResultRow> rows;
  try {
    for (const qnbt::ExperimentDef& def : defs) {
      auto cells = qnbt::run_experiment(def, seed);
      rows.insert(rows.end(), std::make_move_iterator(cells.begin()),
                  std::make_move_iterator(cells.end()));
    }
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }

  const std::string report = qnbt::emit_report(rows, *format);
  if (opt.out_path.empty()) {
    std::cout << report;
  } else {
    std::ofstream out(opt.out_path);
    if (!out) {
      std::cerr << "cannot open '" << opt.out_path << "' for writing\n";
      return 1;
    }
    out << report;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for saddle-avoiding modified Newton optimizers"};
  app.require_subcommand(1);

  RunOptions opt;
  std::uint64_t seed_value = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment by id, or 'all'");
  run_cmd->add_option("experiment", opt.target, "Experiment id, or 'all'")->required();
  run_cmd->add_option("--algos", opt.algos_csv,
                      "Comma-separated algorithm filter (e.g. NQN_B,V2,Newton)");
  CLI::Option* max_iters_opt =
      run_cmd->add_option("--max-iters", opt.max_iters, "Override the iteration cap");
  CLI::Option* grad_tol_opt =
      run_cmd->add_option("--grad-tol", opt.grad_tol, "Override the gradient tolerance");
  CLI::Option* seed_opt = run_cmd->add_option(
      "--seed", seed_value, "Base seed (takes precedence over QNBT_SEED)");
  run_cmd->add_option("--format", opt.format_name, "csv | markdown | jsonlines");
  run_cmd->add_option("--out", opt.out_path, "Write the report to this file");
  run_cmd->add_flag("--include-gated", opt.include_gated,
                    "Include gated heavy experiments in 'run all'");

  CLI::App* list_cmd = app.add_subcommand("list", "Print the experiment registry");
  CLI::App* check_cmd = app.add_subcommand("check", "Run the release checklist");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list_cmd->parsed()) return do_list();
  if (check_cmd->parsed()) return do_check(self_path(argv[0]));
  opt.max_iters_set = max_iters_opt->count() > 0;
  opt.grad_tol_set = grad_tol_opt->count() > 0;
  if (seed_opt->count() > 0) opt.seed = seed_value;
  return do_run(opt);
}
