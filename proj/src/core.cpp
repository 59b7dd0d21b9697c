#include "quadlik/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace quadlik {

const Vector& MaybeParam::value() const {
  if (!value_) throw std::logic_error("value() called on NaO");
  return *value_;
}

bool operator==(const MaybeParam& a, const MaybeParam& b) {
  if (a.is_nao() || b.is_nao()) return a.is_nao() && b.is_nao();
  return a.value_->size() == b.value_->size() && *a.value_ == *b.value_;
}

std::string to_string(const MaybeParam& p) {
  if (p.is_nao()) return "NaO";
  std::ostringstream out;
  out << '[';
  for (Eigen::Index i = 0; i < p.value().size(); ++i) {
    if (i) out << ", ";
    out << p.value()(i);
  }
  out << ']';
  return out.str();
}

MaybeEval evaluate(const Objective& q, const MaybeParam& at) {
  if (at.is_nao()) return std::nullopt;
  return q(at.value());
}

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

QuadraticForm::QuadraticForm(double u, Vector z, Matrix k)
    : u_(u), z_(std::move(z)), k_(std::move(k)) {
  if (k_.rows() != z_.size() || k_.cols() != z_.size())
    throw std::invalid_argument("QuadraticForm: k must be p x p with p = length(z)");
  if (z_.size() > 0 && !is_symmetric(k_, 1e-12))
    throw std::invalid_argument("QuadraticForm: k is not symmetric");
  k_ = symmetrized(k_);
}

ObjectiveEval quadratic_loglik(const QuadraticForm& q, const Vector& theta) {
  if (theta.size() != q.dim())
    throw std::invalid_argument("quadratic_loglik: dimension mismatch");
  const Vector k_theta = q.k() * theta;
  return {q.u() + q.z().dot(theta) - 0.5 * theta.dot(k_theta), q.z() - k_theta, -q.k()};
}

MaybeEval quadratic_loglik(const QuadraticForm& q, const MaybeParam& theta) {
  if (theta.is_nao()) return std::nullopt;
  return quadratic_loglik(q, theta.value());
}

MaybeParam quadratic_mle(const QuadraticForm& q) {
  const auto lower = cholesky_factor(q.k());
  if (!lower) return MaybeParam::nao();
  return cholesky_solve(*lower, q.z());
}

Objective as_objective(QuadraticForm q) {
  return [q = std::move(q)](const Vector& theta) -> MaybeEval {
    return quadratic_loglik(q, theta);
  };
}

std::optional<Matrix> cholesky_factor(const Matrix& k) {
  const Eigen::Index p = k.rows();
  if (k.cols() != p || p == 0) return std::nullopt;
  if (!k.allFinite()) return std::nullopt;
  const double floor =
      static_cast<double>(p) * std::numeric_limits<double>::epsilon() * k.cwiseAbs().maxCoeff();
  Matrix lower = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double pivot = k(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) return std::nullopt;
    const double root = std::sqrt(pivot);
    lower(j, j) = root;
    for (Eigen::Index i = j + 1; i < p; ++i) {
      lower(i, j) = (k(i, j) - lower.row(i).head(j).dot(lower.row(j).head(j))) / root;
    }
  }
  return lower;
}

bool is_positive_definite(const Matrix& k) { return cholesky_factor(k).has_value(); }

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  const Vector y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

double cholesky_log_det(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

Box::Box(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw std::invalid_argument("Box: bound lengths differ");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_(i) < upper_(i))) throw std::invalid_argument("Box: lower must be < upper");
  }
}

Box Box::unbounded(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box(Vector::Constant(dim, -inf), Vector::Constant(dim, inf));
}

bool Box::contains(const Vector& x) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x(i) > lower_(i) && x(i) < upper_(i))) return false;
  }
  return true;
}

namespace {

bool finite_eval(const ObjectiveEval& e) {
  return std::isfinite(e.value) && e.gradient.allFinite() && e.hessian.allFinite();
}

}  // namespace

Objective bind(std::shared_ptr<const LikModel> model, Data data) {
  return [model = std::move(model), data = std::move(data)](const Vector& theta) -> MaybeEval {
    if (!model->domain().contains(theta)) return std::nullopt;
    auto e = model->eval(data, theta);
    if (!e || !finite_eval(*e)) return std::nullopt;
    return e;
  };
}

Objective local_shift(const Objective& loglik, const Vector& psi, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("local_shift: tau must be positive");
  const auto at_psi = loglik(psi);
  if (!at_psi) throw std::invalid_argument("local_shift: log likelihood is NaO at psi");
  const double base = at_psi->value;
  return [loglik, psi, tau, base](const Vector& delta) -> MaybeEval {
    if (delta.size() != psi.size()) return std::nullopt;
    auto e = loglik(psi + delta / tau);
    if (!e) return std::nullopt;
    return ObjectiveEval{e->value - base, e->gradient / tau, e->hessian / (tau * tau)};
  };
}

Objective local_shift(std::shared_ptr<const LikModel> model, Data data, const Vector& psi,
                      double tau) {
  return local_shift(bind(std::move(model), std::move(data)), psi, tau);
}

}  // namespace quadlik
