#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace quadlik {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Rng;

/// A parameter vector or NaO ("not an object"), the value Newton's method
/// produces when the negative Hessian is not positive definite. NaO is a
/// single distinguished value and propagates through every operation.
class MaybeParam {
 public:
  MaybeParam(Vector value) : value_(std::move(value)) {}

  static MaybeParam nao() { return MaybeParam(); }

  bool is_nao() const { return !value_.has_value(); }
  explicit operator bool() const { return value_.has_value(); }

  /// Throws std::logic_error on NaO.
  const Vector& value() const;

  friend bool operator==(const MaybeParam& a, const MaybeParam& b);

 private:
  MaybeParam() = default;
  std::optional<Vector> value_;
};

std::string to_string(const MaybeParam& p);

/// Value, gradient and Hessian of an objective at one point.
struct ObjectiveEval {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

using MaybeEval = std::optional<ObjectiveEval>;

/// An evaluable C² objective. Returns nullopt (NaO) where it is undefined.
using Objective = std::function<MaybeEval(const Vector&)>;

MaybeEval evaluate(const Objective& q, const MaybeParam& at);

/// u + z'θ − ½θ'Kθ with K exactly symmetric.
class QuadraticForm {
 public:
  /// Symmetrizes k; rejects asymmetry beyond 1e-12 relative to max|k|.
  QuadraticForm(double u, Vector z, Matrix k);

  double u() const { return u_; }
  const Vector& z() const { return z_; }
  const Matrix& k() const { return k_; }
  int dim() const { return static_cast<int>(z_.size()); }

 private:
  double u_;
  Vector z_;
  Matrix k_;
};

ObjectiveEval quadratic_loglik(const QuadraticForm& q, const Vector& theta);
MaybeEval quadratic_loglik(const QuadraticForm& q, const MaybeParam& theta);

/// K⁻¹Z when K passes the pivot test, NaO otherwise.
MaybeParam quadratic_mle(const QuadraticForm& q);

Objective as_objective(QuadraticForm q);

/// Lower Cholesky factor of a symmetric matrix, or nullopt when some pivot
/// falls at or below p · ε · max|K|. This is the single positive-definiteness
/// test used wherever NaO is decided.
std::optional<Matrix> cholesky_factor(const Matrix& k);
bool is_positive_definite(const Matrix& k);
Vector cholesky_solve(const Matrix& lower, const Vector& b);
double cholesky_log_det(const Matrix& lower);

bool is_symmetric(const Matrix& m, double rel_tol);
Matrix symmetrized(const Matrix& m);

/// Open axis-aligned box (per-axis open intervals, possibly infinite).
class Box {
 public:
  Box(Vector lower, Vector upper);
  static Box unbounded(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  bool contains(const Vector& x) const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Datasets are flat real vectors; each model documents its layout.
using Data = Vector;

/// Evaluation contract for a parametric family of log likelihoods.
/// Implementations are immutable after construction and safe to share
/// across threads.
class LikModel {
 public:
  virtual ~LikModel() = default;

  virtual int dim() const = 0;
  virtual const Box& domain() const = 0;
  virtual MaybeEval eval(const Data& data, const Vector& theta) const = 0;
  virtual Data simulate(const Vector& theta, Rng& rng) const = 0;
  /// Starting point for Newton refits.
  virtual Vector start(const Data& data) const = 0;
  virtual std::string name() const = 0;
};

/// θ ↦ l(θ) for fixed data; NaO outside the domain or on non-finite output.
Objective bind(std::shared_ptr<const LikModel> model, Data data);

/// δ ↦ l(ψ + δ/τ) − l(ψ). Throws std::invalid_argument if l(ψ) is NaO.
Objective local_shift(const Objective& loglik, const Vector& psi, double tau);
Objective local_shift(std::shared_ptr<const LikModel> model, Data data,
                      const Vector& psi, double tau);

}  // namespace quadlik
