#include "quadlik/inference.hpp"

#include "quadlik/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace quadlik {

MleResult fit_mle(const Objective& loglik, const Vector& start, std::optional<double> tol,
                  int max_steps) {
  MleResult fit;
  auto run = safeguarded_maximize(loglik, start, tol, max_steps);
  fit.trace = std::move(run.trace);
  if (!fit.trace.converged) return fit;
  const auto e = evaluate(loglik, run.estimate);
  if (!e) return fit;
  // A flat or saddle stationary point is not a maximizer we can do inference at.
  const Matrix info = -symmetrized(e->hessian);
  if (!is_positive_definite(info)) return fit;
  fit.theta_hat = run.estimate;
  fit.observed_info = info;
  return fit;
}

MleResult fit_mle(std::shared_ptr<const LikModel> model, const Data& data) {
  const Vector start = model->start(data);
  const Objective loglik = bind(model, data);
  if (!loglik(start)) return MleResult{};
  return fit_mle(loglik, start);
}

bool ConfidenceRegion::contains(const Vector& theta) const {
  return wald_pivot(center, theta, shape) < radius_sq;
}

std::optional<Matrix> symmetric_sqrt(const Matrix& m) {
  if (!is_positive_definite(m)) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) return std::nullopt;
  const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
                      eig.eigenvectors().transpose();
  return symmetrized(root);
}

double wald_pivot(const Vector& theta_hat, const Vector& theta, const Matrix& h) {
  if (theta_hat.size() != theta.size() || h.rows() != theta.size() || h.cols() != theta.size())
    throw std::invalid_argument("wald_pivot: dimension mismatch");
  const Vector d = theta_hat - theta;
  return d.dot(h * d);
}

std::optional<double> wald_pivot(const MleResult& fit, const Vector& theta) {
  if (fit.theta_hat.is_nao()) return std::nullopt;
  return wald_pivot(fit.theta_hat.value(), theta, fit.observed_info);
}

namespace {

double chisq_density(double x, double dof) {
  const double a = 0.5 * dof;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 - std::lgamma(a));
}

double normal_upper_quantile(double alpha) {
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - stats::normal_cdf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double chisq_upper_quantile(int dof, double alpha) {
  if (dof < 1) throw std::invalid_argument("chisq_upper_quantile: dof must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("chisq_upper_quantile: alpha must lie in (0, 1)");
  const double p = dof;

  // Wilson–Hilferty starting point.
  const double z = normal_upper_quantile(alpha);
  const double c = 2.0 / (9.0 * p);
  double x = std::max(1e-8, p * std::pow(std::max(1.0 - c + z * std::sqrt(c), 1e-3), 3.0));

  // Bracket the root of sf(x) − α, which is decreasing in x.
  double lo = 0.0;
  double hi = x;
  while (stats::chisq_sf(hi, p) > alpha) {
    lo = hi;
    hi *= 2.0;
  }

  for (int i = 0; i < 200; ++i) {
    const double f = stats::chisq_sf(x, p) - alpha;
    if (f > 0.0) lo = x; else hi = x;
    if (std::abs(f) <= 1e-15 * alpha || hi - lo <= 1e-15 * hi) break;
    const double step = f / chisq_density(x, p);
    double next = x + step;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

std::optional<ConfidenceRegion> confidence_region(const MleResult& fit, double alpha) {
  if (fit.theta_hat.is_nao()) return std::nullopt;
  if (!is_positive_definite(fit.observed_info)) return std::nullopt;
  const int p = static_cast<int>(fit.theta_hat.value().size());
  return ConfidenceRegion{fit.theta_hat.value(), fit.observed_info,
                          chisq_upper_quantile(p, alpha), 1.0 - alpha};
}

MaybeParam standardized_estimator(const MleResult& fit, const Vector& psi) {
  if (fit.theta_hat.is_nao()) return MaybeParam::nao();
  const auto root = symmetric_sqrt(fit.observed_info);
  if (!root) return MaybeParam::nao();
  return Vector(*root * (fit.theta_hat.value() - psi));
}

std::optional<Vector> standard_errors(const MleResult& fit) {
  if (fit.theta_hat.is_nao()) return std::nullopt;
  const auto lower = cholesky_factor(fit.observed_info);
  if (!lower) return std::nullopt;
  const auto p = fit.observed_info.rows();
  Vector se(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    se(i) = std::sqrt(cholesky_solve(*lower, Vector::Unit(p, i))(i));
  }
  return se;
}

double restricted_coverage_bound(double alpha, double p_escape) {
  if (!(alpha > 0.0 && alpha < 1.0) || !(p_escape >= 0.0 && p_escape <= 1.0))
    throw std::invalid_argument("restricted_coverage_bound: arguments out of range");
  return std::max(0.0, 1.0 - alpha - p_escape);
}

}  // namespace quadlik
