#pragma once

#include <functional>
#include <memory>
#include <string>

#include "qnbt/spectral.hpp"
#include "qnbt/types.hpp"

namespace qnbt {

/* Central-difference step sizes, scaled per coordinate by max(1, |x_i|). */
extern const double kGradStep;  // eps^(1/3)
extern const double kHessStep;  // eps^(1/4)

/* A scalar objective of fixed dimension. Evaluation may return inf/NaN (the
   caller decides what that means); derivative queries prefer attached analytic
   callbacks and fall back to central differences. Each instance carries shared
   evaluation counters; copies share them unless detached via with_fresh_counts. */
class Objective {
 public:
  using EvalFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;
  using HessFn = std::function<SymmetricMatrix(const Vector&)>;

  Objective(std::string name, int dim, EvalFn eval);

  Objective& with_gradient(GradFn grad);
  Objective& with_hessian(HessFn hess);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hess_); }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  SymmetricMatrix hessian(const Vector& x) const;

  EvalCounts counts() const;
  Objective with_fresh_counts() const;

 private:
  struct Counters;

  void check_dim(const Vector& x) const;

  std::string name_;
  int dim_;
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
  std::shared_ptr<Counters> counts_;
};

/* Central differences, h_i = kGradStep * max(1, |x_i|). Throws
   NonFiniteEvaluation if any probe comes back inf/NaN. */
Vector fd_gradient(const Objective& f, const Vector& x);

/* Central second differences: diagonal from the 3-point stencil, off-diagonal
   from the 4-point cross stencil, h_i = kHessStep * max(1, |x_i|). The result
   is exactly symmetric. Throws NonFiniteEvaluation on poisoned probes. */
SymmetricMatrix fd_hessian(const Objective& f, const Vector& x);

}  // namespace qnbt
