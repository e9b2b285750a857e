#pragma once

#include <cstdint>
#include <vector>

#include "qnbt/types.hpp"

namespace qnbt {

/* Relative tolerance for eigenpair residuals, |A e - lambda e| <= tol * max(1, sp(A)). */
inline constexpr double kEigenPairTol = 1e-10;

/* Relative invertibility floor: |lambda| <= kSingularTol * max(1, sp) counts as zero. */
inline constexpr double kSingularTol = 1e-12;

/* Dense symmetric matrix. Construction symmetrizes (A + A^T)/2 and rejects
   non-square or non-finite input, so downstream spectral code never sees an
   asymmetric or poisoned matrix. */
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(const Matrix& raw);
  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

/* Eigendecomposition with eigenvalues ascending and one deterministic choice of
   eigenvector signs: each column is flipped so its largest-magnitude coordinate
   (first such index on ties) is positive. */
struct SpectralData {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // column i pairs with eigenvalues[i]; orthonormal
};

/* Shift sequence delta_0, delta_1, ... applied to the regularized Hessian.
   Entries must be pairwise distinct; kappa() is half the minimal pairwise gap
   and is undefined (throws) for single-entry schedules. */
class DeltaSchedule {
 public:
  explicit DeltaSchedule(std::vector<double> deltas);

  /* (0, 1, -1): the schedule used for all experiment replays; kappa = 1/2. */
  static DeltaSchedule experiment_default();

  /* delta_j = 2j for j = 0..m, one more entry than the dimension; kappa = 1. */
  static DeltaSchedule theoretical(int dim);

  /* delta_j drawn uniformly from [2j, 2j + 1/2); kappa >= 3/4. */
  static DeltaSchedule theoretical_random(int dim, std::uint64_t seed);

  const std::vector<double>& deltas() const { return deltas_; }
  std::size_t size() const { return deltas_.size(); }
  double kappa() const;

 private:
  std::vector<double> deltas_;
  double kappa_;
};

SpectralData symmetric_eigendecompose(const SymmetricMatrix& A);

double spectral_radius(const SpectralData& s);
double min_abs_eigenvalue(const SpectralData& s);

/* H + delta * ||g||^(1+alpha) * Id. grad_norm must be finite and >= 0, alpha > 0. */
SymmetricMatrix build_regularized_hessian(const SymmetricMatrix& H, double grad_norm,
                                          double delta, double alpha);

struct DeltaSelection {
  int index = 0;         // position of the accepted delta in the schedule
  SpectralData spectral; // decomposition of the accepted shifted matrix
};

/* First j whose shifted matrix is numerically invertible:
   minsp(A_j) > kSingularTol * max(1, sp(A_j)). Decomposes H once and shifts
   eigenvalues; eigenvectors are shared by every A_j. Throws ScheduleExhausted. */
DeltaSelection select_delta_det(const SymmetricMatrix& H, double grad_norm,
                                const DeltaSchedule& schedule, double alpha);

/* First j with minsp(A_j) >= kappa * ||g||^(1+alpha), the quantitative bound
   that drives the convergence-rate analysis. Throws ScheduleExhausted. */
DeltaSelection select_delta_minsp(const SymmetricMatrix& H, double grad_norm,
                                  const DeltaSchedule& schedule, double alpha);

/* w = sum_i <g, e_i> e_i / |lambda_i|: the inverse is applied with every
   eigenvalue replaced by its absolute value, which flips the step over negative
   eigenspaces and makes <w, g> > 0 whenever g != 0. */
Vector step_direction(const SpectralData& s, const Vector& grad);

/* w / max(1, ||w||): rescale to at most unit length, direction preserved. */
template <typename Derived>
Vector cap_direction(const Eigen::MatrixBase<Derived>& w) {
  Vector v = w;
  const double n = v.norm();
  if (n > 1.0) v /= n;
  return v;
}

}  // namespace qnbt
