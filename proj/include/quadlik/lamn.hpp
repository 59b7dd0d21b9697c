#pragma once

#include "quadlik/core.hpp"
#include "quadlik/rng.hpp"

#include <cstdint>
#include <memory>
#include <variant>

namespace quadlik {

struct ConstantCurvature {
  Matrix k;
};

struct WishartCurvature {
  double dof = 0.0;
  Matrix scale;
};

/// Law of the random curvature K of an exactly LAMN model. Construction
/// rejects non-SPD matrices and dof ≤ p − 1.
class LamnSpec {
 public:
  LamnSpec(int dim, ConstantCurvature law);
  LamnSpec(int dim, WishartCurvature law);

  int dim() const { return dim_; }
  const std::variant<ConstantCurvature, WishartCurvature>& law() const { return law_; }
  bool is_constant() const { return std::holds_alternative<ConstantCurvature>(law_); }

 private:
  int dim_;
  std::variant<ConstantCurvature, WishartCurvature> law_;
  Matrix scale_factor_;
  friend Matrix sample_curvature(const LamnSpec&, Rng&);
};

struct LamnDraw {
  Vector z;
  Matrix k;
};

/// Wishart(dof, scale) via the Bartlett decomposition.
Matrix sample_wishart(double dof, const Matrix& scale_factor, Rng& rng);
Matrix sample_curvature(const LamnSpec& spec, Rng& rng);

/// K from the curvature law, then Z | K ~ N(Kθ, K).
LamnDraw sample_lamn(const LamnSpec& spec, const Vector& theta, Rng& rng);

/// δ'z − ½δ'kδ.
double lamn_loglik(const LamnDraw& draw, const Vector& delta);

struct MonteCarloMean {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and standard error of exp(q(δ)) over draws at θ = 0.
MonteCarloMean contiguity_estimate(const LamnSpec& spec, const Vector& delta,
                                   int nsim, std::uint64_t seed, int workers = 1);

/// Mean and standard error of exp(l(ψ + δ) − l(ψ)) over data drawn at ψ.
/// For a genuine likelihood the mean is at most one (equal when no mass
/// escapes the domain).
MonteCarloMean likelihood_ratio_mean(std::shared_ptr<const LikModel> model,
                                     const Vector& psi, const Vector& delta,
                                     int nsim, std::uint64_t seed, int workers = 1);

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;  // Bonferroni-adjusted minimum
  double raw_p_min = 1.0;
  int tests = 0;
  int n_nao = 0;
  int n_used = 0;
};

/// Two-sample KS tests on the entries and log-determinant of −∇²l at the
/// true parameter, data simulated at θ_a and θ_b.
TestReport hessian_invariance_test(std::shared_ptr<const LikModel> model,
                                   const Vector& theta_a, const Vector& theta_b,
                                   int nsim, std::uint64_t seed, int workers = 1);

/// KS tests of each coordinate of (−∇²l(θ))^{−1/2}∇l(θ) against N(0, 1).
TestReport score_normality_test(std::shared_ptr<const LikModel> model,
                                const Vector& theta, int nsim, std::uint64_t seed,
                                int workers = 1);

/// KS tests of each coordinate of a sample of vectors against N(0, 1),
/// Bonferroni-adjusted. NaO entries are counted and skipped.
TestReport coordinate_normality_test(const std::vector<MaybeParam>& sample);

}  // namespace quadlik
