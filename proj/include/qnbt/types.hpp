#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>

namespace qnbt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/* Evaluation totals for one objective instance (or one optimizer run). */
struct EvalCounts {
  long long values = 0;
  long long gradients = 0;
  long long hessians = 0;
};

/* An objective, or a finite-difference probe of it, produced inf or NaN. */
class NonFiniteEvaluation : public std::runtime_error {
 public:
  NonFiniteEvaluation(const std::string& what, Vector where)
      : std::runtime_error(what), where_(std::move(where)) {}
  const Vector& where() const { return where_; }

 private:
  Vector where_;
};

/* Every shift in the delta schedule left the matrix numerically singular. */
class ScheduleExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* A matrix that must be inverted has an eigenvalue at numerical zero. */
class SingularHessian : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/* The symmetric eigensolver failed to converge; carries the offending matrix. */
class EigendecompositionFailure : public std::runtime_error {
 public:
  EigendecompositionFailure(const std::string& what, Matrix m)
      : std::runtime_error(what), matrix_(std::move(m)) {}
  const Matrix& matrix() const { return matrix_; }

 private:
  Matrix matrix_;
};

}  // namespace qnbt
