#pragma once

#include "quadlik/core.hpp"
#include "quadlik/newton.hpp"

#include <memory>
#include <optional>

namespace quadlik {

struct MleResult {
  MaybeParam theta_hat = MaybeParam::nao();
  /// −∇²l(θ̂); empty when theta_hat is NaO.
  Matrix observed_info;
  NewtonTrace trace;
};

/// Safeguarded Newton from `start`. A run that does not converge, or stops
/// where −∇²l is not positive definite, is reported as NaO.
MleResult fit_mle(const Objective& loglik, const Vector& start,
                  std::optional<double> tol = std::nullopt, int max_steps = 100);
MleResult fit_mle(std::shared_ptr<const LikModel> model, const Data& data);

struct ConfidenceRegion {
  Vector center;
  Matrix shape;
  double radius_sq = 0.0;
  double level = 0.0;

  /// (θ − center)'·shape·(θ − center) < radius_sq.
  bool contains(const Vector& theta) const;
};

std::optional<Matrix> symmetric_sqrt(const Matrix& m);

/// (θ̂ − θ)'H(θ̂ − θ).
double wald_pivot(const Vector& theta_hat, const Vector& theta, const Matrix& h);
std::optional<double> wald_pivot(const MleResult& fit, const Vector& theta);

/// κ with Pr(χ²_p ≥ κ) = α.
double chisq_upper_quantile(int dof, double alpha);

std::optional<ConfidenceRegion> confidence_region(const MleResult& fit, double alpha);

/// (−∇²l(θ̂))^{1/2}(θ̂ − ψ).
MaybeParam standardized_estimator(const MleResult& fit, const Vector& psi);

/// Square roots of the inverse observed information diagonal.
std::optional<Vector> standard_errors(const MleResult& fit);

/// max(0, 1 − α − p_escape).
double restricted_coverage_bound(double alpha, double p_escape);

}  // namespace quadlik
