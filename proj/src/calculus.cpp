#include "qnbt/calculus.hpp"

#include <atomic>
#include <cmath>
#include <limits>

namespace qnbt {

const double kGradStep = std::cbrt(std::numeric_limits<double>::epsilon());
const double kHessStep = std::sqrt(std::sqrt(std::numeric_limits<double>::epsilon()));

struct Objective::Counters {
  std::atomic<long long> values{0};
  std::atomic<long long> gradients{0};
  std::atomic<long long> hessians{0};
};

Objective::Objective(std::string name, int dim, EvalFn eval)
    : name_(std::move(name)),
      dim_(dim),
      eval_(std::move(eval)),
      counts_(std::make_shared<Counters>()) {
  if (dim_ < 1) throw std::invalid_argument("Objective: dim must be >= 1");
  if (!eval_) throw std::invalid_argument("Objective: eval callback required");
}

Objective& Objective::with_gradient(GradFn grad) {
  grad_ = std::move(grad);
  return *this;
}

Objective& Objective::with_hessian(HessFn hess) {
  hess_ = std::move(hess);
  return *this;
}

void Objective::check_dim(const Vector& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("Objective '" + name_ + "': point has wrong dimension");
}

double Objective::value(const Vector& x) const {
  check_dim(x);
  counts_->values.fetch_add(1, std::memory_order_relaxed);
  return eval_(x);
}

Vector Objective::gradient(const Vector& x) const {
  check_dim(x);
  counts_->gradients.fetch_add(1, std::memory_order_relaxed);
  if (grad_) return grad_(x);
  return fd_gradient(*this, x);
}

SymmetricMatrix Objective::hessian(const Vector& x) const {
  check_dim(x);
  counts_->hessians.fetch_add(1, std::memory_order_relaxed);
  if (hess_) return hess_(x);
  return fd_hessian(*this, x);
}

EvalCounts Objective::counts() const {
  EvalCounts c;
  c.values = counts_->values.load(std::memory_order_relaxed);
  c.gradients = counts_->gradients.load(std::memory_order_relaxed);
  c.hessians = counts_->hessians.load(std::memory_order_relaxed);
  return c;
}

Objective Objective::with_fresh_counts() const {
  Objective copy = *this;
  copy.counts_ = std::make_shared<Counters>();
  return copy;
}

Vector fd_gradient(const Objective& f, const Vector& x) {
  const int m = static_cast<int>(x.size());
  Vector g(m);
  Vector p = x;
  for (int i = 0; i < m; ++i) {
    const double h = kGradStep * std::max(1.0, std::abs(x[i]));
    p[i] = x[i] + h;
    const double fp = f.value(p);
    p[i] = x[i] - h;
    const double fm = f.value(p);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteEvaluation("fd_gradient: non-finite probe of '" + f.name() + "'", p);
    p[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

SymmetricMatrix fd_hessian(const Objective& f, const Vector& x) {
  const int m = static_cast<int>(x.size());
  Vector h(m);
  for (int i = 0; i < m; ++i) h[i] = kHessStep * std::max(1.0, std::abs(x[i]));

  const double f0 = f.value(x);
  if (!std::isfinite(f0))
    throw NonFiniteEvaluation("fd_hessian: non-finite value of '" + f.name() + "'", x);

  Matrix H(m, m);
  Vector p = x;
  for (int i = 0; i < m; ++i) {
    p[i] = x[i] + h[i];
    const double fp = f.value(p);
    p[i] = x[i] - h[i];
    const double fm = f.value(p);
    p[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NonFiniteEvaluation("fd_hessian: non-finite probe of '" + f.name() + "'", p);
    H(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double corners = 0.0;
      for (int si = -1; si <= 1; si += 2) {
        for (int sj = -1; sj <= 1; sj += 2) {
          p[i] = x[i] + si * h[i];
          p[j] = x[j] + sj * h[j];
          const double fc = f.value(p);
          if (!std::isfinite(fc))
            throw NonFiniteEvaluation("fd_hessian: non-finite probe of '" + f.name() + "'", p);
          corners += si * sj * fc;
        }
      }
      p[i] = x[i];
      p[j] = x[j];
      const double hij = corners / (4.0 * h[i] * h[j]);
      H(i, j) = hij;
      H(j, i) = hij;
    }
  }
  return SymmetricMatrix(H);
}

}  // namespace qnbt
