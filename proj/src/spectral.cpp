#include "qnbt/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qnbt {

SymmetricMatrix::SymmetricMatrix(const Matrix& raw) {
  if (raw.rows() != raw.cols() || raw.rows() < 1)
    throw std::invalid_argument("SymmetricMatrix: input must be square and non-empty");
  if (!raw.allFinite())
    throw std::invalid_argument("SymmetricMatrix: input has non-finite entries");
  entries_ = 0.5 * (raw + raw.transpose());
}

DeltaSchedule::DeltaSchedule(std::vector<double> deltas) : deltas_(std::move(deltas)) {
  if (deltas_.empty()) throw std::invalid_argument("DeltaSchedule: empty");
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < deltas_.size(); ++i) {
    if (!std::isfinite(deltas_[i]))
      throw std::invalid_argument("DeltaSchedule: non-finite entry");
    for (std::size_t j = i + 1; j < deltas_.size(); ++j) {
      const double d = std::abs(deltas_[i] - deltas_[j]);
      if (d == 0.0) throw std::invalid_argument("DeltaSchedule: entries must be distinct");
      gap = std::min(gap, d);
    }
  }
  kappa_ = deltas_.size() >= 2 ? 0.5 * gap : std::numeric_limits<double>::quiet_NaN();
}

DeltaSchedule DeltaSchedule::experiment_default() {
  return DeltaSchedule({0.0, 1.0, -1.0});
}

DeltaSchedule DeltaSchedule::theoretical(int dim) {
  if (dim < 1) throw std::invalid_argument("DeltaSchedule::theoretical: dim must be >= 1");
  std::vector<double> d(static_cast<std::size_t>(dim) + 1);
  for (int j = 0; j <= dim; ++j) d[j] = 2.0 * j;
  return DeltaSchedule(std::move(d));
}

DeltaSchedule DeltaSchedule::theoretical_random(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("DeltaSchedule::theoretical_random: dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 0.5);
  std::vector<double> d(static_cast<std::size_t>(dim) + 1);
  for (int j = 0; j <= dim; ++j) d[j] = 2.0 * j + jitter(rng);
  return DeltaSchedule(std::move(d));
}

double DeltaSchedule::kappa() const {
  if (!std::isfinite(kappa_))
    throw std::logic_error("DeltaSchedule::kappa: undefined for single-entry schedules");
  return kappa_;
}

SpectralData symmetric_eigendecompose(const SymmetricMatrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(A.entries());
  if (solver.info() != Eigen::Success)
    throw EigendecompositionFailure("symmetric_eigendecompose: solver did not converge",
                                    A.entries());
  SpectralData s{solver.eigenvalues(), solver.eigenvectors()};
  for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) {
    Eigen::Index top = 0;
    s.eigenvectors.col(c).cwiseAbs().maxCoeff(&top);
    if (s.eigenvectors(top, c) < 0.0) s.eigenvectors.col(c) = -s.eigenvectors.col(c);
  }
  return s;
}

double spectral_radius(const SpectralData& s) {
  return s.eigenvalues.cwiseAbs().maxCoeff();
}

double min_abs_eigenvalue(const SpectralData& s) {
  return s.eigenvalues.cwiseAbs().minCoeff();
}

SymmetricMatrix build_regularized_hessian(const SymmetricMatrix& H, double grad_norm,
                                          double delta, double alpha) {
  if (!(std::isfinite(grad_norm) && grad_norm >= 0.0))
    throw std::invalid_argument("build_regularized_hessian: grad_norm must be finite and >= 0");
  if (!(std::isfinite(delta)))
    throw std::invalid_argument("build_regularized_hessian: delta must be finite");
  if (!(alpha > 0.0))
    throw std::invalid_argument("build_regularized_hessian: alpha must be positive");
  const double shift = delta * std::pow(grad_norm, 1.0 + alpha);
  return SymmetricMatrix(H.entries() + shift * Matrix::Identity(H.dim(), H.dim()));
}

namespace {

/* Shared scan: decompose H once, walk the schedule shifting only eigenvalues. */
template <typename Accept>
DeltaSelection scan_schedule(const SymmetricMatrix& H, double grad_norm,
                             const DeltaSchedule& schedule, double alpha, Accept accept,
                             const char* rule_name) {
  if (!(std::isfinite(grad_norm) && grad_norm > 0.0))
    throw std::invalid_argument("select_delta: grad_norm must be finite and positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("select_delta: alpha must be positive");
  const SpectralData base = symmetric_eigendecompose(H);
  const double power = std::pow(grad_norm, 1.0 + alpha);
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    Vector shifted = base.eigenvalues.array() + schedule.deltas()[j] * power;
    const double mn = shifted.cwiseAbs().minCoeff();
    const double sp = shifted.cwiseAbs().maxCoeff();
    if (accept(mn, sp, power))
      return DeltaSelection{static_cast<int>(j), SpectralData{std::move(shifted), base.eigenvectors}};
  }
  std::ostringstream msg;
  msg << "select_delta_" << rule_name << ": all " << schedule.size()
      << " shifts numerically unusable (||g|| = " << grad_norm << ")";
  throw ScheduleExhausted(msg.str());
}

}  // namespace

DeltaSelection select_delta_det(const SymmetricMatrix& H, double grad_norm,
                                const DeltaSchedule& schedule, double alpha) {
  return scan_schedule(
      H, grad_norm, schedule, alpha,
      [](double mn, double sp, double) { return mn > kSingularTol * std::max(1.0, sp); }, "det");
}

DeltaSelection select_delta_minsp(const SymmetricMatrix& H, double grad_norm,
                                  const DeltaSchedule& schedule, double alpha) {
  const double kappa = schedule.kappa();
  return scan_schedule(
      H, grad_norm, schedule, alpha,
      [kappa](double mn, double, double power) { return mn >= kappa * power; }, "minsp");
}

Vector step_direction(const SpectralData& s, const Vector& grad) {
  if (s.eigenvalues.size() != grad.size() || s.eigenvectors.rows() != grad.size())
    throw std::invalid_argument("step_direction: dimension mismatch");
  const double sp = spectral_radius(s);
  const double floor = kSingularTol * std::max(1.0, sp);
  if ((s.eigenvalues.cwiseAbs().array() <= floor).any())
    throw SingularHessian("step_direction: eigenvalue at numerical zero");
  const Vector a = s.eigenvectors.transpose() * grad;
  return s.eigenvectors * (a.array() / s.eigenvalues.array().abs()).matrix();
}

}  // namespace qnbt
