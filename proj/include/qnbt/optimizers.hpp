#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qnbt/calculus.hpp"
#include "qnbt/spectral.hpp"
#include "qnbt/types.hpp"

namespace qnbt {

/* NQN takes the raw signed-projection Newton step. The other family members
   differ only in how the shift is chosen (first invertible vs. quantitative
   minsp bound), whether the step is capped at unit length, and which line
   search accepts it. Newton and UTB_GD are the baselines. */
enum class Algorithm { NQN, NQN_B, NQN_B_S, V1, V2, V3, V4, Newton, UTB_GD };

std::string to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(const std::string& s);

enum class DeltaRule { Determinant, MinAbsEigenvalue };
enum class SearchRule { None, WeakDescent, Armijo };

struct VariantTraits {
  DeltaRule delta_rule = DeltaRule::Determinant;
  bool cap_step = false;
  SearchRule search = SearchRule::None;
};

/* Family member -> (delta rule, cap, search). Throws for Newton / UTB_GD. */
VariantTraits variant_traits(Algorithm a);

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::NQN_B;
  double alpha = 1.0;
  DeltaSchedule schedule = DeltaSchedule::experiment_default();
  double grad_tol = 1e-10;
  int max_iters = 10000;
  int max_halvings = 60;
  std::uint64_t seed = 0;
};

/* Unbounded two-way backtracking gradient descent. The learning rate starts
   from the previous accepted rate, capped at delta0 * max(1, ||g||^-kappa),
   grows by 1/beta while the Armijo test holds and shrinks by beta until it
   does. The four rate constants are fixed by the protocol being replayed. */
struct GDConfig {
  double delta0 = 1.0;
  double armijo_alpha = 0.5;
  double beta = 0.7;
  double kappa_unbounded = 0.5;
  double grad_tol = 1e-10;
  int max_iters = 10000;
  int max_halvings = 60;
};

enum class Termination {
  GradTol,
  MaxIters,
  NonFinite,
  ScheduleExhausted,
  LineSearchFloor,
  SingularHessian,
};

std::string to_string(Termination t);

/* Record 0 is the initial point and carries no step metadata; record k >= 1
   describes the iterate after step k together with the step that produced it. */
struct IterationRecord {
  int index = 0;
  Vector x;
  double f = 0.0;
  double grad_norm = 0.0;
  std::optional<int> delta_index;  // accepted schedule position
  std::optional<double> gamma;     // accepted step factor (learning rate for UTB_GD)
  std::optional<double> w_norm;    // norm of the uncapped direction (||g|| for UTB_GD)
  std::optional<int> halvings;     // line-search shrink count
  bool hit_floor = false;          // line search ran out of halvings
  double elapsed_seconds = 0.0;    // wall time since run start
};

struct RunReport {
  std::vector<IterationRecord> trace;
  Termination termination = Termination::MaxIters;
  double total_seconds = 0.0;
  EvalCounts counts;

  int iterations() const { return static_cast<int>(trace.size()) - 1; }
  const IterationRecord& final_record() const { return trace.back(); }
};

struct LineSearchResult {
  double gamma = 1.0;
  int halvings = 0;
  bool hit_floor = false;
  double f_trial = 0.0;  // objective at x - gamma * d for the returned gamma
};

/* Largest gamma in {1, 1/2, 1/4, ...} with
   f(x - gamma d) - f(x) <= -gamma * slope / 2, where slope = <d, grad f(x)>.
   Non-finite trial values count as rejections. After max_halvings rejections
   the floor gamma is returned with hit_floor set. */
LineSearchResult armijo_search(const Objective& f, const Vector& x, const Vector& d,
                               double slope, int max_halvings = 60);

/* Same scheme with the weaker acceptance f(x - gamma d) <= f(x). */
LineSearchResult weak_descent_search(const Objective& f, const Vector& x, const Vector& d,
                                     int max_halvings = 60);

/* One step of the configured family member from x, where the gradient is known
   to be nonzero. Returns the next iterate and its record (index 0; callers
   renumber). Throws ScheduleExhausted / SingularHessian / NonFiniteEvaluation. */
std::pair<Vector, IterationRecord> nqn_family_step(const Objective& f, const Vector& x,
                                                   const OptimizerConfig& cfg);

/* Classical Newton step via the eigendecomposition; throws SingularHessian
   when the Hessian has a numerically zero eigenvalue. */
Vector newton_step(const Objective& f, const Vector& x);

/* One two-way backtracking GD step; returns the next iterate and the accepted
   learning rate (which seeds the next call). */
std::pair<Vector, double> utb_gd_step(const Objective& f, const Vector& x, double prev_lr,
                                      const GDConfig& cfg);

/* Called at the top of iteration k (k = 0, 1, ...) to replace the working
   objective; used by mini-batch problems to draw one fresh batch per
   iteration. Called exactly once per index, in order. */
using ResampleHook = std::function<Objective(int iteration)>;

RunReport run(const Objective& f, const Vector& x0, const OptimizerConfig& cfg,
              const ResampleHook& resample = nullptr);
RunReport run(const Objective& f, const Vector& x0, const GDConfig& cfg,
              const ResampleHook& resample = nullptr);

/* Least-squares slope of log e_{k+1} against log e_k over consecutive trace
   pairs whose errors e = ||x_k - x_star|| both lie in (1e-14, 1e-2). Needs at
   least two usable pairs with distinct abscissae; otherwise nullopt. */
std::optional<double> convergence_order(const std::vector<IterationRecord>& trace,
                                        const Vector& x_star);

/* Angle metric on the one-point compactification,
   arccos of (1 + <x, y>) / (sqrt(1 + ||x||^2) sqrt(1 + ||y||^2)), the argument
   clamped to [-1, 1]. Bounded even between diverging iterates. */
double projective_distance(const Vector& x, const Vector& y);

}  // namespace qnbt
