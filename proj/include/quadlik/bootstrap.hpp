#pragma once

#include "quadlik/core.hpp"
#include "quadlik/inference.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace quadlik {

struct PivotSamples {
  std::vector<double> values;  // NaO replicates excluded, replicate order
  int n_nao = 0;
  std::uint64_t seed = 0;
  int B = 0;
};

struct CalibrationResult {
  double nominal_quantile = 0.0;
  double calibrated_quantile = 0.0;
  double level = 0.0;
};

/// pivot(data*, fit*, θ̂) for a bootstrap replicate; nullopt means NaO.
using PivotFunction =
    std::function<std::optional<double>(const Data&, const MleResult&, const Vector&)>;
using StartFunction = std::function<Vector(const Data&)>;

/// Wald quadratic form (θ̂* − θ̂)'(−∇²l(θ̂*))(θ̂* − θ̂).
PivotFunction wald_pivot_function();

struct BootstrapOptions {
  std::uint64_t seed = 0;
  int workers = 1;
  std::optional<double> tol;
  int max_steps = 100;
};

/// Replicate i simulates at θ̂ from stream (seed, 0, i), refits by
/// safeguarded Newton from start(y*), then evaluates the pivot.
PivotSamples parametric_bootstrap(std::shared_ptr<const LikModel> model,
                                  const Vector& theta_hat, int B,
                                  const PivotFunction& pivot,
                                  const StartFunction& start,
                                  const BootstrapOptions& options);

/// Upper quantile (type 7) of the pivots at `level`, next to the χ²_p one.
CalibrationResult calibrate(const PivotSamples& samples, double level, int dof);

struct DoubleBootstrapReport {
  PivotSamples outer;
  /// Inner calibration per outer replicate; nullopt for NaO outer fits or
  /// all-NaO inner samples.
  std::vector<std::optional<CalibrationResult>> per_outer_calibrations;
  /// Outer pivot ≤ inner calibrated quantile, per usable outer replicate.
  std::vector<int> inner_coverage;
  /// Outer pivot ≤ χ² nominal quantile, per usable outer replicate.
  std::vector<int> nominal_coverage;
  double level = 0.0;
  long long simulations = 0;
};

/// Outer replicate i is simulated from stream (seed, 0, i); its inner
/// bootstrap draws from streams (seed, 1, i, j).
DoubleBootstrapReport double_bootstrap(std::shared_ptr<const LikModel> model,
                                       const Vector& theta_hat, int B1, int B2,
                                       const PivotFunction& pivot,
                                       const StartFunction& start,
                                       const BootstrapOptions& options,
                                       double level = 0.95);

/// mean_i g_i · exp(logratio_i).
double importance_reweight(const std::vector<double>& g_values,
                           const std::vector<double>& logratio_values);

}  // namespace quadlik
