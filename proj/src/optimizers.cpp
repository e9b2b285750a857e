#include "qnbt/optimizers.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qnbt {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::NQN: return "NQN";
    case Algorithm::NQN_B: return "NQN_B";
    case Algorithm::NQN_B_S: return "NQN_B_S";
    case Algorithm::V1: return "V1";
    case Algorithm::V2: return "V2";
    case Algorithm::V3: return "V3";
    case Algorithm::V4: return "V4";
    case Algorithm::Newton: return "Newton";
    case Algorithm::UTB_GD: return "UTB_GD";
  }
  throw std::invalid_argument("to_string: unknown Algorithm");
}

std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  std::string key;
  key.reserve(s.size());
  for (char c : s) key.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  static const std::pair<const char*, Algorithm> kNames[] = {
      {"NQN", Algorithm::NQN},       {"NQN_B", Algorithm::NQN_B},
      {"NQN_B_S", Algorithm::NQN_B_S}, {"V1", Algorithm::V1},
      {"V2", Algorithm::V2},         {"V3", Algorithm::V3},
      {"V4", Algorithm::V4},         {"NEWTON", Algorithm::Newton},
      {"UTB_GD", Algorithm::UTB_GD},
  };
  for (const auto& [name, algo] : kNames)
    if (key == name) return algo;
  return std::nullopt;
}

VariantTraits variant_traits(Algorithm a) {
  switch (a) {
    case Algorithm::NQN: return {DeltaRule::Determinant, false, SearchRule::None};
    case Algorithm::NQN_B: return {DeltaRule::MinAbsEigenvalue, true, SearchRule::Armijo};
    case Algorithm::NQN_B_S: return {DeltaRule::MinAbsEigenvalue, false, SearchRule::Armijo};
    case Algorithm::V1: return {DeltaRule::Determinant, true, SearchRule::WeakDescent};
    case Algorithm::V2: return {DeltaRule::Determinant, true, SearchRule::Armijo};
    case Algorithm::V3: return {DeltaRule::Determinant, false, SearchRule::WeakDescent};
    case Algorithm::V4: return {DeltaRule::Determinant, false, SearchRule::Armijo};
    case Algorithm::Newton:
    case Algorithm::UTB_GD:
      throw std::invalid_argument("variant_traits: " + to_string(a) +
                                  " is a baseline, not a family member");
  }
  throw std::invalid_argument("variant_traits: unknown Algorithm");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradTol: return "grad_tol";
    case Termination::MaxIters: return "max_iters";
    case Termination::NonFinite: return "non_finite";
    case Termination::ScheduleExhausted: return "schedule_exhausted";
    case Termination::LineSearchFloor: return "line_search_floor";
    case Termination::SingularHessian: return "singular_hessian";
  }
  throw std::invalid_argument("to_string: unknown Termination");
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LineSearchResult backtrack(const Objective& f, const Vector& x, const Vector& d,
                           int max_halvings, auto&& accepts) {
  const double fx = f.value(x);
  double gamma = 1.0;
  for (int h = 0;; ++h) {
    const double ft = f.value(x - gamma * d);
    if (std::isfinite(ft) && accepts(gamma, ft, fx))
      return {gamma, h, false, ft};
    if (h == max_halvings) return {gamma, h, true, ft};
    gamma *= 0.5;
  }
}

}  // namespace

LineSearchResult armijo_search(const Objective& f, const Vector& x, const Vector& d,
                               double slope, int max_halvings) {
  return backtrack(f, x, d, max_halvings, [slope](double gamma, double ft, double fx) {
    return ft - fx <= -0.5 * gamma * slope;
  });
}

LineSearchResult weak_descent_search(const Objective& f, const Vector& x, const Vector& d,
                                     int max_halvings) {
  return backtrack(f, x, d, max_halvings,
                   [](double, double ft, double fx) { return ft <= fx; });
}

namespace {

/* Shared by the public step functions and the run loop; callers supply the
   gradient so it is evaluated exactly once per iterate. */
Vector family_step_impl(const Objective& f, const Vector& x, const Vector& g, double gn,
                        const OptimizerConfig& cfg, IterationRecord& meta) {
  const VariantTraits traits = variant_traits(cfg.algorithm);
  const SymmetricMatrix H = f.hessian(x);
  const DeltaSelection sel = traits.delta_rule == DeltaRule::Determinant
                                 ? select_delta_det(H, gn, cfg.schedule, cfg.alpha)
                                 : select_delta_minsp(H, gn, cfg.schedule, cfg.alpha);
  const Vector w = step_direction(sel.spectral, g);
  const Vector d = traits.cap_step ? cap_direction(w) : w;
  meta.delta_index = sel.index;
  meta.w_norm = w.norm();
  double gamma = 1.0;
  if (traits.search == SearchRule::Armijo) {
    const LineSearchResult r = armijo_search(f, x, d, d.dot(g), cfg.max_halvings);
    gamma = r.gamma;
    meta.halvings = r.halvings;
    meta.hit_floor = r.hit_floor;
  } else if (traits.search == SearchRule::WeakDescent) {
    const LineSearchResult r = weak_descent_search(f, x, d, cfg.max_halvings);
    gamma = r.gamma;
    meta.halvings = r.halvings;
    meta.hit_floor = r.hit_floor;
  }
  meta.gamma = gamma;
  return x - gamma * d;
}

Vector newton_direction(const SymmetricMatrix& H, const Vector& g) {
  const SpectralData s = symmetric_eigendecompose(H);
  const double floor = kSingularTol * std::max(1.0, spectral_radius(s));
  if ((s.eigenvalues.cwiseAbs().array() <= floor).any())
    throw SingularHessian("newton step: Hessian has a numerically zero eigenvalue");
  const Vector a = s.eigenvectors.transpose() * g;
  return s.eigenvectors * (a.array() / s.eigenvalues.array()).matrix();
}

struct GdStep {
  Vector x_next;
  double lr = 0.0;
  int shrinks = 0;
  bool hit_floor = false;
};

GdStep utb_gd_impl(const Objective& f, const Vector& x, const Vector& g, double gn,
                   double prev_lr, const GDConfig& cfg) {
  const double fx = f.value(x);
  const double g2 = gn * gn;
  const double cap = cfg.delta0 * std::max(1.0, std::pow(gn, -cfg.kappa_unbounded));
  const auto accepts = [&](double rate) {
    const double ft = f.value(x - rate * g);
    return std::isfinite(ft) && ft - fx <= -cfg.armijo_alpha * rate * g2;
  };
  GdStep out;
  // Repeated floor hits can shrink the carried rate into the underflow range;
  // a rate of exactly zero would make the growth loop spin (0 / beta == 0 and
  // a zero step always satisfies the Armijo test with equality). Keep it normal.
  double lr = std::max(std::min(prev_lr, cap), std::numeric_limits<double>::min());
  if (accepts(lr)) {
    for (;;) {
      const double grown = lr / cfg.beta;
      if (grown > cap || !accepts(grown)) break;
      lr = grown;
    }
  } else {
    bool ok = false;
    while (out.shrinks < cfg.max_halvings && !ok) {
      lr *= cfg.beta;
      ++out.shrinks;
      ok = accepts(lr);
    }
    out.hit_floor = !ok;
  }
  out.lr = lr;
  out.x_next = x - lr * g;
  return out;
}

void add_delta(EvalCounts& into, const EvalCounts& now, const EvalCounts& base) {
  into.values += now.values - base.values;
  into.gradients += now.gradients - base.gradients;
  into.hessians += now.hessians - base.hessians;
}

/* Shared driver. step(work, x, g, gn, meta) -> next iterate, filling the step
   metadata that lands on the next record. The trace gets one record per
   visited iterate; record 0 is the start and carries no metadata. */
template <typename StepFn>
RunReport run_loop(const Objective& f0, const Vector& x0, double grad_tol, int max_iters,
                   const ResampleHook& resample, StepFn&& step) {
  if (max_iters < 0) throw std::invalid_argument("run: max_iters must be >= 0");
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  Objective work = resample ? resample(0) : f0;
  EvalCounts base = work.counts();
  const auto retire = [&] { add_delta(report.counts, work.counts(), base); };

  Vector x = x0;
  IterationRecord meta;  // metadata of the step that produced the upcoming record
  for (int k = 0;; ++k) {
    if (k > 0 && resample) {
      retire();
      work = resample(k);
      base = work.counts();
    }
    IterationRecord rec = meta;
    rec.index = k;
    rec.x = x;
    rec.f = work.value(x);
    rec.grad_norm = std::numeric_limits<double>::quiet_NaN();
    rec.elapsed_seconds = seconds_since(t0);
    if (!std::isfinite(rec.f)) {
      report.trace.push_back(std::move(rec));
      report.termination = Termination::NonFinite;
      break;
    }
    Vector g;
    try {
      g = work.gradient(x);
    } catch (const NonFiniteEvaluation&) {
      report.trace.push_back(std::move(rec));
      report.termination = Termination::NonFinite;
      break;
    }
    const double gn = g.norm();
    rec.grad_norm = gn;
    report.trace.push_back(std::move(rec));
    if (!std::isfinite(gn)) {
      report.termination = Termination::NonFinite;
      break;
    }
    if (gn <= grad_tol) {
      report.termination = Termination::GradTol;
      break;
    }
    if (k == max_iters) {
      report.termination = Termination::MaxIters;
      break;
    }
    meta = IterationRecord{};
    try {
      x = step(work, x, g, gn, meta);
    } catch (const ScheduleExhausted&) {
      report.termination = Termination::ScheduleExhausted;
      break;
    } catch (const SingularHessian&) {
      report.termination = Termination::SingularHessian;
      break;
    } catch (const NonFiniteEvaluation&) {
      report.termination = Termination::NonFinite;
      break;
    }
  }
  retire();
  report.total_seconds = seconds_since(t0);
  return report;
}

}  // namespace

std::pair<Vector, IterationRecord> nqn_family_step(const Objective& f, const Vector& x,
                                                   const OptimizerConfig& cfg) {
  const Vector g = f.gradient(x);
  const double gn = g.norm();
  if (!(gn > 0.0) || !std::isfinite(gn))
    throw std::invalid_argument("nqn_family_step: gradient must be nonzero and finite");
  IterationRecord rec;
  const Vector x_next = family_step_impl(f, x, g, gn, cfg, rec);
  rec.x = x_next;
  rec.f = f.value(x_next);
  rec.grad_norm = f.gradient(x_next).norm();
  return {x_next, rec};
}

Vector newton_step(const Objective& f, const Vector& x) {
  const Vector g = f.gradient(x);
  return x - newton_direction(f.hessian(x), g);
}

std::pair<Vector, double> utb_gd_step(const Objective& f, const Vector& x, double prev_lr,
                                      const GDConfig& cfg) {
  const Vector g = f.gradient(x);
  const double gn = g.norm();
  if (!(gn > 0.0) || !std::isfinite(gn))
    throw std::invalid_argument("utb_gd_step: gradient must be nonzero and finite");
  GdStep s = utb_gd_impl(f, x, g, gn, prev_lr, cfg);
  return {std::move(s.x_next), s.lr};
}

RunReport run(const Objective& f, const Vector& x0, const OptimizerConfig& cfg,
              const ResampleHook& resample) {
  if (cfg.algorithm == Algorithm::UTB_GD)
    throw std::invalid_argument("run: UTB_GD takes the GDConfig overload");
  if (cfg.algorithm == Algorithm::Newton) {
    return run_loop(f, x0, cfg.grad_tol, cfg.max_iters, resample,
                    [](const Objective& work, const Vector& x, const Vector& g, double,
                       IterationRecord& meta) {
                      const Vector d = newton_direction(work.hessian(x), g);
                      meta.gamma = 1.0;
                      meta.w_norm = d.norm();
                      return Vector(x - d);
                    });
  }
  return run_loop(f, x0, cfg.grad_tol, cfg.max_iters, resample,
                  [&cfg](const Objective& work, const Vector& x, const Vector& g, double gn,
                         IterationRecord& meta) {
                    return family_step_impl(work, x, g, gn, cfg, meta);
                  });
}

RunReport run(const Objective& f, const Vector& x0, const GDConfig& cfg,
              const ResampleHook& resample) {
  double lr = cfg.delta0;
  return run_loop(f, x0, cfg.grad_tol, cfg.max_iters, resample,
                  [&cfg, lr](const Objective& work, const Vector& x, const Vector& g,
                             double gn, IterationRecord& meta) mutable {
                    GdStep s = utb_gd_impl(work, x, g, gn, lr, cfg);
                    lr = s.lr;
                    meta.gamma = s.lr;
                    meta.w_norm = gn;
                    meta.halvings = s.shrinks;
                    meta.hit_floor = s.hit_floor;
                    return std::move(s.x_next);
                  });
}

std::optional<double> convergence_order(const std::vector<IterationRecord>& trace,
                                        const Vector& x_star) {
  constexpr double kLow = 1e-14, kHigh = 1e-2;
  std::vector<double> u, v;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const double e0 = (trace[k].x - x_star).norm();
    const double e1 = (trace[k + 1].x - x_star).norm();
    if (e0 > kLow && e0 < kHigh && e1 > kLow && e1 < kHigh) {
      u.push_back(std::log(e0));
      v.push_back(std::log(e1));
    }
  }
  if (u.size() < 2) return std::nullopt;
  const double um = std::accumulate(u.begin(), u.end(), 0.0) / u.size();
  const double vm = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - um) * (v[i] - vm);
    den += (u[i] - um) * (u[i] - um);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

double projective_distance(const Vector& x, const Vector& y) {
  if (x.size() != y.size())
    throw std::invalid_argument("projective_distance: dimension mismatch");
  const double c = (1.0 + x.dot(y)) /
                   (std::sqrt(1.0 + x.squaredNorm()) * std::sqrt(1.0 + y.squaredNorm()));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace qnbt
