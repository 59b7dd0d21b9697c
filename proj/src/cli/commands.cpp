#include "quadlik/cli/commands.hpp"

#include "quadlik/bootstrap.hpp"
#include "quadlik/inference.hpp"
#include "quadlik/lamn.hpp"
#include "quadlik/parallel.hpp"
#include "quadlik/rng.hpp"
#include "quadlik/stats.hpp"

#include <cmath>
#include <limits>

namespace quadlik::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Independent seed for the k-th sub-experiment of a command.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return Rng(seed).split(k).key(); }

Data load_data(const ExperimentConfig& config, const LikModel& model) {
  if (!config.data) throw InputError("config: this command needs a 'data' file");
  Data data = load_column_csv(*config.data);
  try {
    model.eval(data, model.start(data));
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("data does not fit the model: ") + e.what());
  }
  return data;
}

Vector require_dim(const std::optional<Vector>& v, int p, const char* key, const Vector& fallback) {
  if (!v) return fallback;
  if (v->size() != p) throw InputError(std::string("config ") + key + ": expected length " + std::to_string(p));
  return *v;
}

void header(ReportRecord& r, const char* command, const ExperimentConfig& c, const LikModel& model) {
  r.set("command", command);
  r.set("schema_version", kSchemaVersion);
  r.set("model", model.name());
  r.set("seed", static_cast<long long>(c.seed));
}

void report_trace(ReportRecord& r, const NewtonTrace& trace) {
  r.set("trace_steps", trace.steps);
  r.set("trace_converged", trace.converged);
  r.set("trace_values", trace.values);
  r.set("trace_grad_norms", trace.grad_norms);
}

void report_animal(ReportRecord& r, const AnimalModel& model, const Data& y, const Vector& phi) {
  const AnimalParams natural = AnimalModel::to_natural(phi);
  r.set("mu", natural.mu);
  r.set("sigma2", natural.sigma2);
  r.set("tau2", natural.tau2);
  r.set("logit_heritability", logit_heritability(natural));
  const auto e = model.kernel().loglik(y, natural);
  const auto se = e ? logit_heritability_se(natural, -e->hessian) : std::nullopt;
  r.set("logit_heritability_se", se.value_or(kNaN));
}

struct Fitted {
  std::shared_ptr<const LikModel> model;
  Data data;
  MleResult fit;
};

Fitted fit_from_config(const ExperimentConfig& config) {
  Fitted f;
  f.model = build_model(config.model);
  f.data = load_data(config, *f.model);
  f.fit = fit_mle(f.model, f.data);
  return f;
}

// Writes the fit summary; returns false when the fit is NaO.
bool report_fit(ReportRecord& r, const Fitted& f, double alpha) {
  report_trace(r, f.fit.trace);
  if (f.fit.theta_hat.is_nao()) {
    r.set("status", "NaO");
    return false;
  }
  r.set("status", "ok");
  r.set("theta_hat", f.fit.theta_hat.value());
  r.set_matrix("observed_info", f.fit.observed_info);
  const auto se = standard_errors(f.fit);
  r.set("standard_errors", se ? *se : Vector::Constant(f.model->dim(), kNaN));
  const auto region = confidence_region(f.fit, alpha);
  r.set("alpha", alpha);
  r.set("region_status", region ? "ok" : "NaO");
  r.set("region_radius_sq", region ? region->radius_sq : kNaN);
  if (const auto* animal = dynamic_cast<const AnimalModel*>(f.model.get()))
    report_animal(r, *animal, f.data, f.fit.theta_hat.value());
  return true;
}

MleResult fit_at(const std::shared_ptr<const LikModel>& model, const Vector& theta, Rng rng) {
  return fit_mle(model, model->simulate(theta, rng));
}

}  // namespace

CommandResult run_fit(const ExperimentConfig& config, int) {
  CommandResult out;
  const Fitted f = fit_from_config(config);
  header(out.report, "fit", config, *f.model);
  if (!report_fit(out.report, f, config.alpha)) out.exit_code = kExitNaO;
  return out;
}

CommandResult run_diagnose(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  const Fitted f = fit_from_config(config);
  header(r, "diagnose", config, *f.model);
  if (!report_fit(r, f, config.alpha)) {
    out.exit_code = kExitNaO;
    return out;
  }
  const int p = f.model->dim();
  const Vector theta_hat = f.fit.theta_hat.value();
  const auto se = standard_errors(f.fit);
  if (!se) {
    r.set("diagnostics_status", "NaO");
    out.exit_code = kExitNaO;
    return out;
  }

  // Quadraticity of δ ↦ l(θ̂ + δ) − l(θ̂) about δ = 0.
  const Vector half = require_dim(config.box.half_width, p, "box.half_width", 3.0 * *se);
  GridBox box = p <= 3 && !config.box.points_per_axis
                    ? GridBox::with_default_resolution(-half, half)
                    : GridBox(-half, half,
                              std::vector<int>(static_cast<std::size_t>(p),
                                               config.box.points_per_axis.value_or(1)));
  const Objective q = local_shift(f.model, f.data, theta_hat, 1.0);
  r.set("quad_box_half_width", half);
  try {
    const auto quad = quadraticity_report(q, Vector::Zero(p), box, 10000, sub_seed(config.seed, 0));
    r.set("quad_status", "ok");
    r.set("quad_d0", quad.d0);
    r.set("quad_d1", quad.d1);
    r.set("quad_d2", quad.d2);
    r.set("quad_rudin", quad.rudin);
    r.set("quad_rudin_tail_bound", quad.rudin_tail_bound);
    r.set("quad_points", static_cast<long long>(quad.points));
    r.set("quad_points_per_axis",
          std::vector<double>(quad.points_per_axis.begin(), quad.points_per_axis.end()));
  } catch (const GridEvaluationError& e) {
    // The box reaches outside where the likelihood can be evaluated.
    r.set("quad_status", "NaO");
    r.set("quad_nao_point", e.point());
  }

  const Vector perturbation = require_dim(config.perturbation, p, "perturbation", 3.0 * *se);
  const Vector theta_b = theta_hat + perturbation;
  r.set("invariance_theta_b", theta_b);
  // Both tests throw when every simulated replicate is NaO.
  try {
    const auto inv = hessian_invariance_test(f.model, theta_hat, theta_b, config.nsim,
                                             sub_seed(config.seed, 1), workers);
    r.set("invariance_status", "ok");
    r.set("invariance_statistic", inv.statistic);
    r.set("invariance_p_value", inv.p_value);
    r.set("invariance_n_nao", inv.n_nao);
  } catch (const std::runtime_error&) {
    r.set("invariance_status", "NaO");
  }

  try {
    const auto score = score_normality_test(f.model, theta_hat, config.nsim, sub_seed(config.seed, 2), workers);
    r.set("score_normality_status", "ok");
    r.set("score_normality_statistic", score.statistic);
    r.set("score_normality_p_value", score.p_value);
    r.set("score_normality_n_nao", score.n_nao);
  } catch (const std::runtime_error&) {
    r.set("score_normality_status", "NaO");
  }

  const auto lr = likelihood_ratio_mean(f.model, theta_hat, *se, config.nsim, sub_seed(config.seed, 3), workers);
  r.set("contiguity_delta", *se);
  r.set("contiguity_mean", lr.mean);
  r.set("contiguity_se", lr.se);
  return out;
}

CommandResult run_bootstrap(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  const Fitted f = fit_from_config(config);
  header(r, "bootstrap", config, *f.model);
  if (!report_fit(r, f, config.alpha)) {
    out.exit_code = kExitNaO;
    return out;
  }
  const Vector theta_hat = f.fit.theta_hat.value();
  const double level = config.bootstrap.level.value_or(1.0 - config.alpha);
  const auto model = f.model;
  const StartFunction start = [model](const Data& d) { return model->start(d); };
  BootstrapOptions options;
  options.seed = config.seed;
  options.workers = workers;

  const auto samples = parametric_bootstrap(model, theta_hat, config.bootstrap.B, wald_pivot_function(),
                                            start, options);
  r.set("bootstrap_B", samples.B);
  r.set("bootstrap_n_values", static_cast<long long>(samples.values.size()));
  r.set("bootstrap_n_nao", samples.n_nao);
  r.set("bootstrap_level", level);
  r.set("pivots", samples.values);
  if (samples.values.empty()) {
    r.set("calibration_status", "NaO");
    out.exit_code = kExitNaO;
    return out;
  }
  const auto cal = calibrate(samples, level, model->dim());
  r.set("calibration_status", "ok");
  r.set("nominal_quantile", cal.nominal_quantile);
  r.set("calibrated_quantile", cal.calibrated_quantile);
  // Calibrated region: same center and shape, bootstrap radius.
  r.set("calibrated_region_radius_sq", cal.calibrated_quantile);

  if (config.bootstrap.B2 > 0) {
    BootstrapOptions nested = options;
    nested.seed = sub_seed(config.seed, 1);
    const auto dbl = double_bootstrap(model, theta_hat, config.bootstrap.B, config.bootstrap.B2,
                                      wald_pivot_function(), start, nested, level);
    std::vector<double> inner_q;
    for (const auto& c : dbl.per_outer_calibrations)
      inner_q.push_back(c ? c->calibrated_quantile : kNaN);
    double inner_cov = 0.0;
    double nominal_cov = 0.0;
    for (std::size_t i = 0; i < dbl.inner_coverage.size(); ++i) {
      inner_cov += dbl.inner_coverage[i];
      nominal_cov += dbl.nominal_coverage[i];
    }
    const double used = static_cast<double>(dbl.inner_coverage.size());
    r.set("double_B2", config.bootstrap.B2);
    r.set("double_simulations", dbl.simulations);
    r.set("double_outer_n_nao", dbl.outer.n_nao);
    r.set("double_inner_quantiles", inner_q);
    r.set("double_inner_coverage", used > 0 ? inner_cov / used : kNaN);
    r.set("double_nominal_coverage", used > 0 ? nominal_cov / used : kNaN);
  }
  return out;
}

CommandResult run_lamn_verify(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  const auto& m = config.model;
  std::optional<LamnSpec> spec;
  try {
    if (m.type == "lan") spec.emplace(static_cast<int>(m.k.rows()), ConstantCurvature{m.k});
    else if (m.type == "wishart-lamn") spec.emplace(static_cast<int>(m.scale.rows()), WishartCurvature{m.dof, m.scale});
    else throw InputError("lamn-verify needs a 'lan' or 'wishart-lamn' model");
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  const auto model = std::make_shared<WishartLamnModel>(*spec);
  const int p = spec->dim();
  header(r, "lamn-verify", config, *model);
  r.set("curvature_law", spec->is_constant() ? "constant" : "wishart");

  const Vector theta = require_dim(config.theta, p, "theta", Vector::Zero(p));
  const Vector theta_b = require_dim(config.theta_b, p, "theta_b", theta + Vector::Ones(p));
  std::vector<Vector> deltas = config.deltas;
  if (deltas.empty()) deltas.push_back(Vector::Constant(p, 0.5));

  std::vector<double> means, ses, zs;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (deltas[k].size() != p) throw InputError("config deltas: wrong length");
    const auto c = contiguity_estimate(*spec, deltas[k], config.nsim, sub_seed(config.seed, 10 + k), workers);
    means.push_back(c.mean);
    ses.push_back(c.se);
    zs.push_back(c.se > 0 ? (c.mean - 1.0) / c.se : 0.0);
  }
  r.set("contiguity_mean", means);
  r.set("contiguity_se", ses);
  r.set("contiguity_z", zs);

  // Every sampled curvature must pass the pivot test.
  int non_pd = 0;
  {
    std::vector<int> flags(static_cast<std::size_t>(config.nsim), 0);
    const Rng root(sub_seed(config.seed, 1));
    parallel_for(flags.size(), workers, [&](std::size_t i) {
      Rng rng = root.split(i);
      flags[i] = is_positive_definite(sample_curvature(*spec, rng)) ? 0 : 1;
    });
    for (int v : flags) non_pd += v;
  }
  r.set("curvature_draws", config.nsim);
  r.set("curvature_non_pd", non_pd);

  const auto inv = hessian_invariance_test(model, theta, theta_b, config.nsim, sub_seed(config.seed, 2), workers);
  r.set("invariance_p_value", inv.p_value);
  const auto score = score_normality_test(model, theta, config.nsim, sub_seed(config.seed, 3), workers);
  r.set("score_normality_p_value", score.p_value);

  std::vector<MaybeParam> standardized(static_cast<std::size_t>(config.replications), MaybeParam::nao());
  std::vector<int> covered(standardized.size(), 0);
  const Rng root(sub_seed(config.seed, 4));
  parallel_for(standardized.size(), workers, [&](std::size_t i) {
    const auto fit = fit_at(model, theta, root.split(i));
    standardized[i] = standardized_estimator(fit, theta);
    const auto region = confidence_region(fit, config.alpha);
    covered[i] = region && region->contains(theta) ? 1 : 0;
  });
  const auto norm = coordinate_normality_test(standardized);
  double cov = 0.0;
  for (int c : covered) cov += c;
  r.set("standardized_normality_p_value", norm.p_value);
  r.set("standardized_n_nao", norm.n_nao);
  r.set("wald_coverage", cov / config.replications);
  r.set("replications", config.replications);
  return out;
}

CommandResult run_ar1_study(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  if (config.model.type != "ar1") throw InputError("ar1-study needs an 'ar1' model");
  const auto model = std::static_pointer_cast<const Ar1Model>(build_model(config.model));
  header(r, "ar1-study", config, *model);
  const int n = config.model.n;
  const double x0_sq_mean = config.model.random_x0 ? 1.0 : config.model.x0 * config.model.x0;
  const Vector thetas = config.theta.value_or(Vector{{0.0, 0.5, 0.9, 1.0}});
  const double kappa = chisq_upper_quantile(1, config.alpha);

  std::vector<double> expected, mc_mean, mc_se, z, d2, coverage;
  for (Eigen::Index t = 0; t < thetas.size(); ++t) {
    const Vector theta = Vector::Constant(1, thetas(t));
    expected.push_back(ar1_expected_info(thetas(t), n, std::sqrt(x0_sq_mean)));
    std::vector<double> k(static_cast<std::size_t>(config.nsim));
    const Rng root(sub_seed(config.seed, 100 + static_cast<std::uint64_t>(t)));
    parallel_for(k.size(), workers, [&](std::size_t i) {
      Rng rng = root.split(i);
      k[i] = -ar1_loglik(Ar1Data{model->simulate(theta, rng)}, thetas(t)).hessian(0, 0);
    });
    const auto s = stats::mean_and_se(k);
    mc_mean.push_back(s.mean);
    mc_se.push_back(s.se);
    z.push_back(s.se > 0 ? (s.mean - expected.back()) / s.se : 0.0);

    Rng rng = Rng(sub_seed(config.seed, 200 + static_cast<std::uint64_t>(t)));
    const Data x = model->simulate(theta, rng);
    const double width = 3.0 / std::sqrt(std::max(1.0, expected.back()));
    const auto quad = quadraticity_report(local_shift(model, x, theta, 1.0), Vector::Zero(1),
                                          GridBox::with_default_resolution(Vector::Constant(1, -width),
                                                                           Vector::Constant(1, width)));
    d2.push_back(quad.d2);

    std::vector<int> hit(static_cast<std::size_t>(config.replications), 0);
    const Rng cov_root(sub_seed(config.seed, 300 + static_cast<std::uint64_t>(t)));
    parallel_for(hit.size(), workers, [&](std::size_t i) {
      const auto fit = fit_at(model, theta, cov_root.split(i));
      const auto pivot = wald_pivot(fit, theta);
      hit[i] = pivot && *pivot < kappa ? 1 : 0;
    });
    double c = 0.0;
    for (int h : hit) c += h;
    coverage.push_back(c / config.replications);
  }
  r.set("n", n);
  r.set("theta", thetas);
  r.set("expected_info", expected);
  r.set("mc_mean_info", mc_mean);
  r.set("mc_se_info", mc_se);
  r.set("info_z", z);
  r.set("quad_d2", d2);
  r.set("wald_coverage", coverage);

  std::vector<double> inv_theta, inv_p;
  for (Eigen::Index t = 1; t < thetas.size(); ++t) {
    const auto inv = hessian_invariance_test(model, Vector::Constant(1, thetas(0)),
                                             Vector::Constant(1, thetas(t)), config.nsim,
                                             sub_seed(config.seed, 400 + static_cast<std::uint64_t>(t)), workers);
    inv_theta.push_back(thetas(t));
    inv_p.push_back(inv.p_value);
  }
  r.set("invariance_theta_a", thetas(0));
  r.set("invariance_theta_b", inv_theta);
  r.set("invariance_p_value", inv_p);
  return out;
}

AnimalStudy animal_study(const RelationshipMatrix& a, const AnimalParams& truth, int replications,
                         int bootstrap_b, double alpha, std::uint64_t seed, int workers) {
  const auto model = std::make_shared<AnimalModel>(a);
  const Vector truth_phi = AnimalModel::to_internal(truth);
  const double h_true = logit_heritability(truth);
  const double z_crit = std::sqrt(chisq_upper_quantile(1, alpha));

  struct Studentized {
    double h = 0.0;
    double se = 0.0;
  };
  // logit h = log σ² − log τ² is linear on the internal scale, so its se
  // comes straight from the fit's information there.
  auto studentize = [](const MleResult& fit) -> std::optional<Studentized> {
    if (fit.theta_hat.is_nao()) return std::nullopt;
    const auto lower = cholesky_factor(fit.observed_info);
    if (!lower) return std::nullopt;
    const Vector c{{0.0, 1.0, -1.0}};
    const double se = std::sqrt(c.dot(cholesky_solve(*lower, c)));
    if (!(se > 0.0) || !std::isfinite(se)) return std::nullopt;
    return Studentized{c.dot(fit.theta_hat.value()), se};
  };
  auto h_of = [](const Vector& phi) { return phi(1) - phi(2); };
  const PivotFunction squared_t = [studentize, h_of](const Data&, const MleResult& fit,
                                                     const Vector& phi_hat) -> std::optional<double> {
    const auto s = studentize(fit);
    if (!s) return std::nullopt;
    const double t = (s->h - h_of(phi_hat)) / s->se;
    return t * t;
  };
  const PivotFunction difference = [h_of](const Data&, const MleResult& fit,
                                          const Vector& phi_hat) -> std::optional<double> {
    if (fit.theta_hat.is_nao()) return std::nullopt;
    return h_of(fit.theta_hat.value()) - h_of(phi_hat);
  };
  const StartFunction start = [model](const Data& y) { return model->start(y); };
  const double level = 1.0 - alpha;

  struct Row {
    int converged = 0, start_ok = 0, wald_usable = 0, wald_cov = 0;
    int cal_usable = 0, cal_cov = 0, bc_cov = 0;
    double quantile = kNaN, shift = kNaN;
  };
  std::vector<Row> rows(static_cast<std::size_t>(replications));
  const Rng root(seed);
  const Rng data_streams = root.split(0);
  const Rng boot_seeds = root.split(1);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    Row& row = rows[i];
    Rng rng = data_streams.split(i);
    const Data y = model->simulate(truth_phi, rng);
    const AnimalParams s = method_of_moments_start(a, y);
    row.start_ok = s.sigma2 >= truth.sigma2 / 3 && s.sigma2 <= truth.sigma2 * 3 &&
                   s.tau2 >= truth.tau2 / 3 && s.tau2 <= truth.tau2 * 3;
    const auto fit = fit_mle(model, y);
    if (fit.theta_hat.is_nao()) return;
    row.converged = 1;
    const auto est = studentize(fit);
    if (!est) return;
    const double t = (est->h - h_true) / est->se;
    row.wald_usable = 1;
    row.wald_cov = t * t < z_crit * z_crit;
    if (bootstrap_b <= 0) return;
    // Both passes use one seed, so they see the same bootstrap data sets.
    BootstrapOptions options;
    options.seed = boot_seeds.split(i).key();
    const auto pivots = parametric_bootstrap(model, fit.theta_hat.value(), bootstrap_b, squared_t, start, options);
    const auto diffs = parametric_bootstrap(model, fit.theta_hat.value(), bootstrap_b, difference, start, options);
    if (pivots.values.size() < 2 || diffs.values.empty()) return;
    row.cal_usable = 1;
    row.quantile = calibrate(pivots, level, 1).calibrated_quantile;
    row.cal_cov = t * t < row.quantile;
    row.shift = stats::median(diffs.values);
    row.bc_cov = std::abs(est->h - row.shift - h_true) < z_crit * est->se;
  });

  AnimalStudy study;
  study.replications = replications;
  study.nominal_quantile = z_crit * z_crit;
  for (const auto& row : rows) {
    study.converged += row.converged;
    study.start_within_factor3 += row.start_ok;
    study.wald_usable += row.wald_usable;
    study.wald_covered += row.wald_cov;
    study.calibrated_usable += row.cal_usable;
    study.calibrated_covered += row.cal_cov;
    study.bias_corrected_covered += row.bc_cov;
    if (row.cal_usable) {
      study.calibrated_quantiles.push_back(row.quantile);
      study.bias_shifts.push_back(row.shift);
    }
  }
  return study;
}

CommandResult run_animal_study(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  if (config.model.type != "animal") throw InputError("animal-study needs an 'animal' model");
  const auto model = std::static_pointer_cast<const AnimalModel>(build_model(config.model));
  header(r, "animal-study", config, *model);
  const Vector t = require_dim(config.theta, 3, "theta", Vector{{0.0, 1.0, 1.0}});
  if (!(t(1) > 0.0 && t(2) > 0.0)) throw InputError("config theta: variances must be positive");
  const AnimalParams truth{t(0), t(1), t(2)};
  const int b = config.bootstrap.present ? config.bootstrap.B : 0;
  const RelationshipMatrix a{model->kernel().a()};
  const auto study = animal_study(a, truth, config.replications, b, config.alpha, config.seed, workers);

  const double reps = study.replications;
  r.set("individuals", static_cast<long long>(model->kernel().size()));
  r.set("a_clamp_magnitude", model->kernel().clamp_magnitude());
  r.set("truth", t);
  r.set("logit_heritability_true", logit_heritability(truth));
  r.set("replications", study.replications);
  r.set("converged", study.converged);
  r.set("convergence_rate", study.converged / reps);
  r.set("start_within_factor3_rate", study.start_within_factor3 / reps);
  r.set("nominal_quantile", study.nominal_quantile);
  r.set("wald_usable", study.wald_usable);
  r.set("wald_coverage", study.wald_usable ? static_cast<double>(study.wald_covered) / study.wald_usable : kNaN);
  r.set("bootstrap_B", b);
  if (b > 0) {
    const double usable = study.calibrated_usable;
    r.set("calibrated_usable", study.calibrated_usable);
    r.set("calibrated_coverage", usable > 0 ? study.calibrated_covered / usable : kNaN);
    r.set("calibrated_quantile_median",
          study.calibrated_quantiles.empty() ? kNaN : stats::median(study.calibrated_quantiles));
    r.set("bias_corrected_coverage", usable > 0 ? study.bias_corrected_covered / usable : kNaN);
    const double shift = study.bias_shifts.empty() ? kNaN : stats::median(study.bias_shifts);
    r.set("bias_shift_median", shift);
    // The corrected interval moves opposite to the estimated bias.
    r.set("interval_shift_direction", shift > 0 ? "down" : shift < 0 ? "up" : "none");
    r.set("calibrated_quantiles", study.calibrated_quantiles);
    r.set("bias_shifts", study.bias_shifts);
  }
  return out;
}

ClassicalRow classical_comparison_row(const std::string& unit, int n, bool sqrt_n_scaling,
                                      int replications, const GridBox& box, std::uint64_t seed,
                                      int workers) {
  std::shared_ptr<const LikModel> model;
  if (unit == "normal") {
    // n iid N(θ, 1) units through their sufficient statistic Σx ~ N(nθ, n).
    model = std::make_shared<LanNormalLocation>(Matrix::Constant(1, 1, n));
  } else if (unit == "exponential") {
    model = std::make_shared<ExponentialRateModel>(n);
  } else {
    throw InputError("unknown iid unit " + unit);
  }
  const Vector psi = Vector::Zero(1);
  const double tau = sqrt_n_scaling ? std::sqrt(static_cast<double>(n)) : 1.0;
  const auto points = box.points();
  std::vector<double> d0(static_cast<std::size_t>(replications));
  std::vector<double> d1(d0.size());
  std::vector<double> d2(d0.size());
  const Rng root(seed);
  parallel_for(d0.size(), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    const Objective q = local_shift(model, model->simulate(psi, rng), psi, tau);
    // Limit quadratic: same score at zero, unit information.
    const QuadraticForm limit(0.0, q(Vector::Zero(1))->gradient, Matrix::Identity(1, 1));
    const auto d = c2_distance_on_points(q, as_objective(limit), points);
    d0[i] = d.d0;
    d1[i] = d.d1;
    d2[i] = d.d2;
  });
  return {n, stats::median(d0), stats::median(d1), stats::median(d2)};
}

CommandResult run_classical_comparison(const ExperimentConfig& config, int workers) {
  CommandResult out;
  auto& r = out.report;
  r.set("command", "classical-comparison");
  r.set("schema_version", kSchemaVersion);
  r.set("seed", static_cast<long long>(config.seed));
  r.set("unit", config.unit);
  r.set("tau", config.tau);
  const Vector half = require_dim(config.box.half_width, 1, "box.half_width", Vector::Constant(1, 3.0));
  const GridBox box(-half, half, {config.box.points_per_axis.value_or(33)});
  std::vector<double> ns, d0, d1, d2;
  for (std::size_t k = 0; k < config.n_ladder.size(); ++k) {
    const auto row = classical_comparison_row(config.unit, config.n_ladder[k], config.tau == "sqrt_n",
                                              config.replications, box, sub_seed(config.seed, k), workers);
    ns.push_back(row.n);
    d0.push_back(row.median_d0);
    d1.push_back(row.median_d1);
    d2.push_back(row.median_d2);
  }
  r.set("replications", config.replications);
  r.set("box_half_width", half(0));
  r.set("n", ns);
  r.set("median_d0", d0);
  r.set("median_d1", d1);
  r.set("median_d2", d2);
  return out;
}

CommandResult run_command(const std::string& command, const ExperimentConfig& config, int workers) {
  if (command != config.experiment)
    throw InputError("config experiment '" + config.experiment + "' does not match command '" + command + "'");
  if (command == "fit") return run_fit(config, workers);
  if (command == "diagnose") return run_diagnose(config, workers);
  if (command == "bootstrap") return run_bootstrap(config, workers);
  if (command == "lamn-verify") return run_lamn_verify(config, workers);
  if (command == "ar1-study") return run_ar1_study(config, workers);
  if (command == "animal-study") return run_animal_study(config, workers);
  if (command == "classical-comparison") return run_classical_comparison(config, workers);
  throw InputError("unknown command " + command);
}

}  // namespace quadlik::cli
