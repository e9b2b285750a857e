#include "qnbt/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "qnbt/calculus.hpp"
#include "qnbt/harness.hpp"
#include "qnbt/optimizers.hpp"
#include "qnbt/problems.hpp"
#include "qnbt/spectral.hpp"

namespace qnbt::acceptance {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/* a <= b up to relative slack. */
bool le(double a, double b, double slack = 1e-9) {
  return a <= b + slack * (std::abs(a) + std::abs(b));
}

RunReport run_family(const std::string& problem, const std::string& start, Algorithm algo,
                     int max_iters, double grad_tol = 1e-10) {
  const ProblemSpec& prob = find_problem(problem);
  for (const InitialPoint& p : prob.starts)
    if (p.label == start) {
      OptimizerConfig cfg;
      cfg.algorithm = algo;
      cfg.max_iters = max_iters;
      cfg.grad_tol = grad_tol;
      return run(prob.objective.with_fresh_counts(), p.x, cfg);
    }
  throw std::invalid_argument("no start '" + start + "' on problem '" + problem + "'");
}

bool trace_monotone(const RunReport& rep) {
  for (std::size_t k = 1; k < rep.trace.size(); ++k)
    if (rep.trace[k].f > rep.trace[k - 1].f) return false;
  return true;
}

CheckResult check_beale_v1() {
  const RunReport rep = run_family("beale", "published", Algorithm::V1, 30);
  const double f = rep.final_record().f;
  const bool pass = f < 1e-12 && rep.iterations() <= 30 && rep.total_seconds < 5.0;
  return {1, "beale-v1-deep-minimum",
          pass,
          "f_final=" + num(f) + " iters=" + std::to_string(rep.iterations()) +
              " time=" + num(rep.total_seconds) + "s"};
}

CheckResult check_ackley_v1_v2() {
  const RunReport r1 = run_family("ackley", "published", Algorithm::V1, 50);
  const RunReport r2 = run_family("ackley", "published", Algorithm::V2, 50);
  const double time = r1.total_seconds + r2.total_seconds;
  const bool pass = r1.final_record().f < 1e-8 && r2.final_record().f < 1e-8 && time < 10.0;
  return {2, "ackley-v1-v2-minimum", pass,
          "V1 f=" + num(r1.final_record().f) + " (" + std::to_string(r1.iterations()) +
              " it), V2 f=" + num(r2.final_record().f) + " (" +
              std::to_string(r2.iterations()) + " it), time=" + num(time) + "s"};
}

CheckResult check_kinked_valley_v2() {
  const RunReport rep = run_family("kinked-valley", "published", Algorithm::V2, 200);
  const bool monotone = trace_monotone(rep);
  const double f = rep.final_record().f;
  const bool pass = f < 0.01 && rep.iterations() <= 200 && monotone;
  return {3, "kinked-valley-v2-descent", pass,
          "f_final=" + num(f) + " iters=" + std::to_string(rep.iterations()) +
              (monotone ? " monotone" : " NON-MONOTONE")};
}

CheckResult check_rastrigin_v2() {
  const RunReport rep = run_family("rastrigin", "published", Algorithm::V2, 10000, 1e-6);
  const double f = rep.final_record().f;
  const double gn = rep.final_record().grad_norm;
  const bool pass = rep.termination == Termination::GradTol && gn < 1e-6 && f <= 50.0;
  return {4, "rastrigin-v2-critical-point", pass,
          "f_final=" + num(f) + " grad_norm=" + num(gn) +
              " iters=" + std::to_string(rep.iterations()) +
              " termination=" + to_string(rep.termination)};
}

CheckResult check_protein_fold() {
  const auto reaches = [](const RunReport& rep) {
    for (const IterationRecord& r : rep.trace)
      if (r.f <= 21.0 && r.grad_norm <= 1e-6) return true;
    return false;
  };
  const RunReport r1 = run_family("protein-10mer", "published", Algorithm::V1, 100);
  const RunReport r2 = run_family("protein-10mer", "published", Algorithm::V2, 100);
  const double time = r1.total_seconds + r2.total_seconds;
  const bool pass = reaches(r1) && reaches(r2) && time < 60.0;
  return {5, "protein-10mer-fold", pass,
          "V1 f=" + num(r1.final_record().f) + " gn=" + num(r1.final_record().grad_norm) +
              ", V2 f=" + num(r2.final_record().f) +
              " gn=" + num(r2.final_record().grad_norm) + ", time=" + num(time) + "s"};
}

CheckResult check_start_values() {
  int checked = 0;
  double worst = 0.0;
  std::string worst_where = "-";
  for (const ProblemSpec& prob : benchmark_suite()) {
    for (const InitialPoint& start : prob.starts) {
      if (!start.published_value) continue;
      const double f = prob.objective.with_fresh_counts().value(start.x);
      const double p = *start.published_value;
      const double dev = std::abs(f - p) / std::max(1.0, std::abs(p));
      ++checked;
      if (dev > worst) {
        worst = dev;
        worst_where = prob.objective.name() + "/" + start.label;
      }
    }
  }
  const bool pass = checked >= 10 && worst <= 1e-3;
  return {6, "registry-start-values", pass,
          std::to_string(checked) + " starts, worst rel dev " + num(worst) + " (" +
              worst_where + ")"};
}

CheckResult check_saddle_contrast() {
  const RunReport rn = run_family("monkey-saddle", "published", Algorithm::Newton, 50);
  const RunReport r1 = run_family("monkey-saddle", "published", Algorithm::V1, 50);
  const RunReport r2 = run_family("monkey-saddle", "published", Algorithm::V2, 50);
  const bool pass = std::abs(rn.final_record().f) <= 1e-6 && r1.final_record().f < -1.0 &&
                    r2.final_record().f < -1.0;
  return {7, "monkey-saddle-contrast", pass,
          "Newton f=" + num(rn.final_record().f) + ", V1 f=" + num(r1.final_record().f) +
              ", V2 f=" + num(r2.final_record().f)};
}

CheckResult check_shift_schedule() {
  std::mt19937_64 rng(20240808);
  std::uniform_int_distribution<int> dim_pick(1, 6);
  std::uniform_real_distribution<double> entry(-5.0, 5.0);
  std::uniform_real_distribution<double> eps_pick(-2.0, 2.0);
  int failures = 0;
  for (int c = 0; c < 1000; ++c) {
    const int m = dim_pick(rng);
    Matrix raw(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) raw(i, j) = entry(rng);
    const SpectralData s = symmetric_eigendecompose(SymmetricMatrix(raw));
    double eps = 0.0;
    do {
      eps = eps_pick(rng);
    } while (std::abs(eps) < 1e-6);
    const DeltaSchedule schedule = (c % 2 == 0)
                                       ? DeltaSchedule::theoretical(m)
                                       : DeltaSchedule::theoretical_random(m, rng());
    const double kappa = schedule.kappa();
    bool found = false;
    for (double delta : schedule.deltas()) {
      const double minsp = (s.eigenvalues.array() + delta * eps).abs().minCoeff();
      if (minsp >= kappa * std::abs(eps)) {
        found = true;
        break;
      }
    }
    if (!found) ++failures;
  }
  return {8, "shift-schedule-well-conditioning", failures == 0,
          "1000 random (matrix, eps) cases, " + std::to_string(failures) + " failures"};
}

CheckResult check_signed_step_bounds() {
  std::mt19937_64 rng(20240809);
  std::uniform_int_distribution<int> dim_pick(1, 6);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  int failures = 0;
  for (int c = 0; c < 1000; ++c) {
    const int m = dim_pick(rng);
    SpectralData s;
    for (;;) {
      Matrix raw(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) raw(i, j) = entry(rng);
      s = symmetric_eigendecompose(SymmetricMatrix(raw));
      if (min_abs_eigenvalue(s) > 1e-6 * std::max(1.0, spectral_radius(s))) break;
    }
    Vector g(m);
    do {
      for (int i = 0; i < m; ++i) g[i] = entry(rng);
    } while (g.norm() < 1e-9);
    const Vector w = step_direction(s, g);
    const double sp = spectral_radius(s);
    const double mn = min_abs_eigenvalue(s);
    const double gn = g.norm(), wn = w.norm(), wg = w.dot(g);
    const bool ok = le(gn / sp, wn) && le(wn, gn / mn) && le(gn * gn / sp, wg) &&
                    le(wg, gn * gn / mn) && le(mn * wn * wn, wg) && le(wg, sp * wn * wn) &&
                    wg > 0.0;
    if (!ok) ++failures;
  }
  return {9, "signed-step-bounds", failures == 0,
          "1000 random (matrix, gradient) cases, " + std::to_string(failures) + " failures"};
}

CheckResult check_descent_fuzz() {
  std::mt19937_64 rng(20240810);
  std::uniform_real_distribution<double> entry(-3.0, 3.0);
  std::uniform_int_distribution<int> qdim(2, 6);
  const int gdims[3] = {2, 5, 10};
  const Algorithm algos[7] = {Algorithm::NQN_B, Algorithm::NQN_B_S, Algorithm::V1,
                              Algorithm::V2,    Algorithm::V3,      Algorithm::V4,
                              Algorithm::UTB_GD};
  int violations = 0;
  for (int c = 0; c < 200; ++c) {
    const Algorithm algo = algos[c % 7];
    Objective obj("fuzz", 1, [](const Vector&) { return 0.0; });
    Vector x0;
    if (c % 2 == 0) {
      const int m = qdim(rng);
      Matrix raw(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) raw(i, j) = entry(rng);
      const Matrix q = 0.5 * (raw + raw.transpose());
      Vector b(m);
      for (int i = 0; i < m; ++i) b[i] = entry(rng);
      obj = Objective("fuzz-quadratic", m,
                      [q, b](const Vector& x) { return 0.5 * x.dot(q * x) - b.dot(x); })
                .with_gradient([q, b](const Vector& x) { return Vector(q * x - b); })
                .with_hessian([q](const Vector&) { return SymmetricMatrix(q); });
      x0 = Vector(m);
      for (int i = 0; i < m; ++i) x0[i] = 5.0 / 3.0 * entry(rng);
    } else {
      const int m = gdims[(c / 2) % 3];
      obj = griewank(m);
      x0 = Vector(m);
      for (int i = 0; i < m; ++i) x0[i] = 20.0 / 3.0 * entry(rng);
    }
    RunReport rep;
    if (algo == Algorithm::UTB_GD) {
      GDConfig cfg;
      cfg.max_iters = 60;
      rep = run(obj, x0, cfg);
    } else {
      OptimizerConfig cfg;
      cfg.algorithm = algo;
      cfg.max_iters = 60;
      rep = run(obj, x0, cfg);
    }
    if (!trace_monotone(rep)) ++violations;
  }
  return {10, "descent-monotonicity-fuzz", violations == 0,
          "200 randomized runs, " + std::to_string(violations) + " monotonicity violations"};
}

CheckResult check_quadratic_rate() {
  const ProblemSpec& prob = find_problem("beale");
  Vector x0(2);
  x0 << 2.8, 0.45;
  OptimizerConfig cfg;
  cfg.algorithm = Algorithm::NQN_B;
  cfg.max_iters = 40;
  const RunReport rep = run(prob.objective.with_fresh_counts(), x0, cfg);
  Vector x_star(2);
  x_star << 3.0, 0.5;
  const std::optional<double> order = convergence_order(rep.trace, x_star);
  bool full_steps = true;
  for (std::size_t k = 1; k < rep.trace.size(); ++k)
    if (!rep.trace[k].gamma || *rep.trace[k].gamma != 1.0) full_steps = false;
  const bool pass = order.has_value() && *order >= 1.7 && full_steps;
  return {11, "quadratic-rate-tail", pass,
          "order=" + (order ? num(*order) : std::string("none")) +
              (full_steps ? ", gamma=1 throughout" : ", reduced step seen") +
              ", iters=" + std::to_string(rep.iterations())};
}

CheckResult check_fd_agreement() {
  std::mt19937_64 rng(20240812);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  int worst_problem_checked = 0;
  double worst_g = 0.0, worst_h = 0.0;
  std::string worst_name = "-";
  for (const ProblemSpec& prob : benchmark_suite()) {
    const Objective& f = prob.objective;
    if (!f.has_analytic_gradient() || !f.has_analytic_hessian()) continue;
    ++worst_problem_checked;
    for (int p = 0; p < 20; ++p) {
      Vector x(f.dim());
      for (int i = 0; i < f.dim(); ++i) x[i] = coord(rng);
      const Vector ga = f.gradient(x);
      const Vector gn = fd_gradient(f, x);
      const double gdev = (ga - gn).norm() / std::max(1.0, ga.norm());
      const Matrix ha = f.hessian(x).entries();
      const Matrix hn = fd_hessian(f, x).entries();
      const double hdev = (ha - hn).norm() / std::max(1.0, ha.norm());
      if (gdev > worst_g) {
        worst_g = gdev;
        worst_name = f.name();
      }
      if (hdev > worst_h) worst_h = hdev;
    }
  }
  const bool pass = worst_problem_checked >= 8 && worst_g <= 1e-6 && worst_h <= 1e-4;
  return {12, "finite-difference-agreement", pass,
          std::to_string(worst_problem_checked) + " problems x 20 points, worst grad dev " +
              num(worst_g) + " (" + worst_name + "), worst hess dev " + num(worst_h)};
}

CheckResult check_stochastic_line_search() {
  const int dim = 10, batch_size = 10, iters = 100;
  const double sigma = 1.0;
  const Vector x0 = Vector::Constant(dim, 10.0);
  const Algorithm algos[3] = {Algorithm::V1, Algorithm::V2, Algorithm::NQN_B};
  int steps_verified = 0;
  int condition_failures = 0;
  bool all_finite = true;
  for (Algorithm algo : algos) {
    auto rng = std::make_shared<std::mt19937_64>(0);
    auto batches = std::make_shared<std::vector<StochasticGriewankBatch>>();
    const ResampleHook hook = [rng, batches, sigma, batch_size, dim](int) {
      batches->push_back(draw_griewank_batch(*rng, sigma, batch_size, dim));
      return stochastic_griewank_objective(batches->back());
    };
    OptimizerConfig cfg;
    cfg.algorithm = algo;
    cfg.max_iters = iters;
    const ProblemSpec& prob = find_problem("stochastic-griewank");
    const RunReport rep = run(prob.objective.with_fresh_counts(), x0, cfg, hook);

    for (const IterationRecord& r : rep.trace)
      if (!std::isfinite(r.f) || !r.x.allFinite()) all_finite = false;
    if (rep.termination == Termination::NonFinite) all_finite = false;

    const VariantTraits traits = variant_traits(algo);
    for (std::size_t k = 1; k < rep.trace.size(); ++k) {
      const IterationRecord& r = rep.trace[k];
      if (r.hit_floor || !r.gamma || !r.delta_index) continue;
      const Vector& x = rep.trace[k - 1].x;
      const Objective fb = stochastic_griewank_objective((*batches)[k - 1]);
      const Vector g = fb.gradient(x);
      const double gnorm = g.norm();
      const SymmetricMatrix H = fb.hessian(x);
      const DeltaSelection sel = traits.delta_rule == DeltaRule::Determinant
                                     ? select_delta_det(H, gnorm, cfg.schedule, cfg.alpha)
                                     : select_delta_minsp(H, gnorm, cfg.schedule, cfg.alpha);
      const Vector w = step_direction(sel.spectral, g);
      const Vector d = traits.cap_step ? cap_direction(w) : w;
      const double fx = fb.value(x);
      const double ft = fb.value(x - *r.gamma * d);
      const double slack = 1e-9 * std::max(1.0, std::abs(fx));
      bool ok = (r.x - (x - *r.gamma * d)).norm() <= 1e-9 * (1.0 + r.x.norm());
      if (traits.search == SearchRule::Armijo)
        ok = ok && ft - fx <= -0.5 * *r.gamma * d.dot(g) + slack;
      else
        ok = ok && ft <= fx + slack;
      ++steps_verified;
      if (!ok) ++condition_failures;
    }
  }
  const bool pass = all_finite && condition_failures == 0 && steps_verified > 0;
  return {13, "stochastic-batch-line-search", pass,
          std::to_string(steps_verified) + " accepted steps re-verified, " +
              std::to_string(condition_failures) + " condition failures" +
              (all_finite ? ", all iterates finite" : ", NON-FINITE iterate seen")};
}

std::vector<std::string> csv_lines_without_time(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == 5) continue;  // time_seconds
      if (!joined.empty()) joined.push_back(',');
      joined += fields[i];
    }
    lines.push_back(joined);
  }
  return lines;
}

CheckResult check_cli_determinism(const std::string& cli_path) {
  if (cli_path.empty())
    return {14, "cli-determinism", false, "command-line binary path not provided"};
  const auto tmp = std::filesystem::temp_directory_path();
  const auto out_a = tmp / "qnbt_determinism_a.csv";
  const auto out_b = tmp / "qnbt_determinism_b.csv";
  const auto invoke = [&](const std::filesystem::path& out) {
    const std::string cmd = "\"" + cli_path + "\" run all --seed 7 --format csv --out \"" +
                            out.string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int rc_a = invoke(out_a);
  const int rc_b = invoke(out_b);
  if (rc_a != 0 || rc_b != 0)
    return {14, "cli-determinism", false,
            "nonzero exit status: " + std::to_string(rc_a) + " / " + std::to_string(rc_b)};
  const auto lines_a = csv_lines_without_time(out_a);
  const auto lines_b = csv_lines_without_time(out_b);
  const bool pass = lines_a.size() > 1 && lines_a == lines_b;
  return {14, "cli-determinism", pass,
          std::to_string(lines_a.size()) + " report lines, " +
              (pass ? "identical modulo time column" : "MISMATCH between executions")};
}

template <typename Fn>
CheckResult guarded(int id, const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return {id, name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

std::vector<CheckResult> run_all_checks(const std::string& cli_path) {
  std::vector<CheckResult> results;
  results.push_back(guarded(1, "beale-v1-deep-minimum", check_beale_v1));
  results.push_back(guarded(2, "ackley-v1-v2-minimum", check_ackley_v1_v2));
  results.push_back(guarded(3, "kinked-valley-v2-descent", check_kinked_valley_v2));
  results.push_back(guarded(4, "rastrigin-v2-critical-point", check_rastrigin_v2));
  results.push_back(guarded(5, "protein-10mer-fold", check_protein_fold));
  results.push_back(guarded(6, "registry-start-values", check_start_values));
  results.push_back(guarded(7, "monkey-saddle-contrast", check_saddle_contrast));
  results.push_back(guarded(8, "shift-schedule-well-conditioning", check_shift_schedule));
  results.push_back(guarded(9, "signed-step-bounds", check_signed_step_bounds));
  results.push_back(guarded(10, "descent-monotonicity-fuzz", check_descent_fuzz));
  results.push_back(guarded(11, "quadratic-rate-tail", check_quadratic_rate));
  results.push_back(guarded(12, "finite-difference-agreement", check_fd_agreement));
  results.push_back(guarded(13, "stochastic-batch-line-search", check_stochastic_line_search));
  results.push_back(
      guarded(14, "cli-determinism", [&] { return check_cli_determinism(cli_path); }));
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.pass; });
}

}  // namespace qnbt::acceptance
