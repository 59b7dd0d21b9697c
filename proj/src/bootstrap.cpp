#include "quadlik/bootstrap.hpp"

#include "quadlik/parallel.hpp"
#include "quadlik/rng.hpp"
#include "quadlik/stats.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quadlik {

PivotFunction wald_pivot_function() {
  return [](const Data&, const MleResult& fit, const Vector& theta_hat) -> std::optional<double> {
    if (fit.theta_hat.is_nao() || !is_positive_definite(fit.observed_info)) return std::nullopt;
    return wald_pivot(fit.theta_hat.value(), theta_hat, fit.observed_info);
  };
}

namespace {

struct Replicate {
  std::optional<double> pivot;
  MleResult fit;
};

Replicate run_replicate(const std::shared_ptr<const LikModel>& model, const Vector& theta,
                        const PivotFunction& pivot, const StartFunction& start,
                        const BootstrapOptions& options, Rng rng) {
  const Data data = model->simulate(theta, rng);
  const Objective loglik = bind(model, data);
  Replicate out;
  const Vector from = start(data);
  if (!loglik(from)) return out;
  out.fit = fit_mle(loglik, from, options.tol, options.max_steps);
  if (out.fit.theta_hat.is_nao()) return out;
  out.pivot = pivot(data, out.fit, theta);
  if (out.pivot && !std::isfinite(*out.pivot)) out.pivot.reset();
  return out;
}

PivotSamples bootstrap_at(const std::shared_ptr<const LikModel>& model, const Vector& theta,
                          int B, const PivotFunction& pivot, const StartFunction& start,
                          const BootstrapOptions& options, const Rng& streams) {
  if (B < 1) throw std::invalid_argument("parametric_bootstrap: B must be positive");
  std::vector<std::optional<double>> pivots(static_cast<std::size_t>(B));
  parallel_for(pivots.size(), options.workers, [&](std::size_t i) {
    pivots[i] = run_replicate(model, theta, pivot, start, options, streams.split(i)).pivot;
  });
  PivotSamples out;
  out.seed = options.seed;
  out.B = B;
  for (const auto& v : pivots) {
    if (v) out.values.push_back(*v); else ++out.n_nao;
  }
  return out;
}

}  // namespace

PivotSamples parametric_bootstrap(std::shared_ptr<const LikModel> model, const Vector& theta_hat,
                                  int B, const PivotFunction& pivot, const StartFunction& start,
                                  const BootstrapOptions& options) {
  if (!model->domain().contains(theta_hat))
    throw std::invalid_argument("parametric_bootstrap: theta_hat outside the parameter domain");
  return bootstrap_at(model, theta_hat, B, pivot, start, options, Rng(options.seed).split(0));
}

CalibrationResult calibrate(const PivotSamples& samples, double level, int dof) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("calibrate: level must lie in (0, 1)");
  if (samples.values.empty()) throw std::invalid_argument("calibrate: all bootstrap replicates were NaO");
  return {chisq_upper_quantile(dof, 1.0 - level), stats::quantile_type7(samples.values, level),
          level};
}

DoubleBootstrapReport double_bootstrap(std::shared_ptr<const LikModel> model,
                                       const Vector& theta_hat, int B1, int B2,
                                       const PivotFunction& pivot, const StartFunction& start,
                                       const BootstrapOptions& options, double level) {
  if (B1 < 1 || B2 < 1) throw std::invalid_argument("double_bootstrap: B1 and B2 must be positive");
  if (!model->domain().contains(theta_hat))
    throw std::invalid_argument("double_bootstrap: theta_hat outside the parameter domain");
  const Rng root(options.seed);
  const Rng outer_streams = root.split(0);
  const Rng inner_streams = root.split(1);
  const int dof = model->dim();
  const double nominal = chisq_upper_quantile(dof, 1.0 - level);

  struct Outer {
    Replicate replicate;
    std::optional<CalibrationResult> calibration;
    bool inner_ran = false;
  };
  std::vector<Outer> outer(static_cast<std::size_t>(B1));
  // Inner loops run serially inside each outer task so the outer level owns
  // the parallelism.
  BootstrapOptions inner_options = options;
  inner_options.workers = 1;
  parallel_for(outer.size(), options.workers, [&](std::size_t i) {
    auto& o = outer[i];
    o.replicate = run_replicate(model, theta_hat, pivot, start, options, outer_streams.split(i));
    const auto& fit = o.replicate.fit;
    if (fit.theta_hat.is_nao() || !model->domain().contains(fit.theta_hat.value())) return;
    o.inner_ran = true;
    const auto inner = bootstrap_at(model, fit.theta_hat.value(), B2, pivot, start,
                                    inner_options, inner_streams.split(i));
    if (!inner.values.empty()) o.calibration = calibrate(inner, level, dof);
  });

  DoubleBootstrapReport report;
  report.level = level;
  report.outer.seed = options.seed;
  report.outer.B = B1;
  for (const auto& o : outer) {
    report.simulations += 1 + (o.inner_ran ? B2 : 0);
    const auto& v = o.replicate.pivot;
    if (v) report.outer.values.push_back(*v); else ++report.outer.n_nao;
    report.per_outer_calibrations.push_back(o.calibration);
    if (v && o.calibration) {
      report.inner_coverage.push_back(*v <= o.calibration->calibrated_quantile ? 1 : 0);
      report.nominal_coverage.push_back(*v <= nominal ? 1 : 0);
    }
  }
  return report;
}

double importance_reweight(const std::vector<double>& g_values,
                           const std::vector<double>& logratio_values) {
  if (g_values.empty() || g_values.size() != logratio_values.size())
    throw std::invalid_argument("importance_reweight: need equal, nonzero lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    const double w = std::exp(logratio_values[i]);
    if (!std::isfinite(w) || !std::isfinite(g_values[i])) {
      std::ostringstream msg;
      msg << "importance_reweight: non-finite weight at index " << i;
      throw std::domain_error(msg.str());
    }
    sum += g_values[i] * w;
  }
  return sum / static_cast<double>(g_values.size());
}

}  // namespace quadlik
