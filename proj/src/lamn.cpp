#include "quadlik/lamn.hpp"

#include "quadlik/inference.hpp"
#include "quadlik/parallel.hpp"
#include "quadlik/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace quadlik {

namespace {

Matrix require_spd_factor(const Matrix& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument(std::string(what) + ": wrong dimensions");
  if (!is_symmetric(m, 1e-12)) throw std::invalid_argument(std::string(what) + ": not symmetric");
  auto lower = cholesky_factor(symmetrized(m));
  if (!lower) throw std::invalid_argument(std::string(what) + ": not positive definite");
  return *lower;
}

}  // namespace

LamnSpec::LamnSpec(int dim, ConstantCurvature law) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("LamnSpec: dim must be positive");
  scale_factor_ = require_spd_factor(law.k, dim, "LamnSpec constant K");
  law.k = symmetrized(law.k);
  law_ = std::move(law);
}

LamnSpec::LamnSpec(int dim, WishartCurvature law) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("LamnSpec: dim must be positive");
  if (!(law.dof > dim - 1)) throw std::invalid_argument("LamnSpec: Wishart dof must exceed p - 1");
  scale_factor_ = require_spd_factor(law.scale, dim, "LamnSpec Wishart scale");
  law.scale = symmetrized(law.scale);
  law_ = std::move(law);
}

Matrix sample_wishart(double dof, const Matrix& scale_factor, Rng& rng) {
  const auto p = scale_factor.rows();
  Matrix bartlett = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    bartlett(i, i) = std::sqrt(rng.chi_squared(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
  }
  const Matrix la = scale_factor * bartlett;
  return symmetrized(la * la.transpose());
}

Matrix sample_curvature(const LamnSpec& spec, Rng& rng) {
  if (const auto* constant = std::get_if<ConstantCurvature>(&spec.law())) return constant->k;
  const auto& wishart = std::get<WishartCurvature>(spec.law());
  for (int attempt = 0; attempt < 2; ++attempt) {
    Matrix k = sample_wishart(wishart.dof, spec.scale_factor_, rng);
    if (is_positive_definite(k)) return k;
  }
  throw std::runtime_error("sample_curvature: Wishart draw numerically singular twice");
}

LamnDraw sample_lamn(const LamnSpec& spec, const Vector& theta, Rng& rng) {
  if (theta.size() != spec.dim()) throw std::invalid_argument("sample_lamn: dimension mismatch");
  Matrix k = sample_curvature(spec, rng);
  const auto lower = cholesky_factor(k);
  if (!lower) throw std::runtime_error("sample_lamn: curvature not positive definite");
  Vector noise(spec.dim());
  for (int i = 0; i < spec.dim(); ++i) noise(i) = rng.normal();
  Vector z = k * theta + *lower * noise;
  return {std::move(z), std::move(k)};
}

double lamn_loglik(const LamnDraw& draw, const Vector& delta) {
  if (delta.size() != draw.z.size()) throw std::invalid_argument("lamn_loglik: dimension mismatch");
  return delta.dot(draw.z) - 0.5 * delta.dot(draw.k * delta);
}

namespace {

MonteCarloMean summarize(const std::vector<double>& values) {
  const auto s = stats::mean_and_se(values);
  return {s.mean, s.se};
}

}  // namespace

MonteCarloMean contiguity_estimate(const LamnSpec& spec, const Vector& delta, int nsim,
                                   std::uint64_t seed, int workers) {
  if (nsim < 2) throw std::invalid_argument("contiguity_estimate: nsim must be >= 2");
  const Rng root(seed);
  const Vector zero = Vector::Zero(spec.dim());
  std::vector<double> ratios(static_cast<std::size_t>(nsim));
  parallel_for(ratios.size(), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    ratios[i] = std::exp(lamn_loglik(sample_lamn(spec, zero, rng), delta));
  });
  return summarize(ratios);
}

MonteCarloMean likelihood_ratio_mean(std::shared_ptr<const LikModel> model, const Vector& psi,
                                     const Vector& delta, int nsim, std::uint64_t seed,
                                     int workers) {
  if (nsim < 2) throw std::invalid_argument("likelihood_ratio_mean: nsim must be >= 2");
  const Rng root(seed);
  std::vector<double> ratios(static_cast<std::size_t>(nsim));
  parallel_for(ratios.size(), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    const Data data = model->simulate(psi, rng);
    const Objective q = local_shift(model, data, psi, 1.0);
    const auto e = q(delta);
    // Outside the domain the likelihood ratio is zero.
    ratios[i] = e ? std::exp(e->value) : 0.0;
  });
  return summarize(ratios);
}

namespace {

// Upper-triangle entries of −∇²l(θ) followed by its log determinant.
std::optional<std::vector<double>> curvature_summaries(const LikModel& model, const Data& data,
                                                       const Vector& theta) {
  const auto e = model.eval(data, theta);
  if (!e || !e->hessian.allFinite()) return std::nullopt;
  const Matrix info = -symmetrized(e->hessian);
  const auto lower = cholesky_factor(info);
  if (!lower) return std::nullopt;
  std::vector<double> out;
  for (Eigen::Index i = 0; i < info.rows(); ++i)
    for (Eigen::Index j = i; j < info.cols(); ++j) out.push_back(info(i, j));
  out.push_back(cholesky_log_det(*lower));
  return out;
}

std::vector<std::optional<std::vector<double>>> simulate_summaries(
    const std::shared_ptr<const LikModel>& model, const Vector& theta, int nsim, const Rng& root,
    int workers) {
  std::vector<std::optional<std::vector<double>>> out(static_cast<std::size_t>(nsim));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    out[i] = curvature_summaries(*model, model->simulate(theta, rng), theta);
  });
  return out;
}

}  // namespace

TestReport hessian_invariance_test(std::shared_ptr<const LikModel> model, const Vector& theta_a,
                                   const Vector& theta_b, int nsim, std::uint64_t seed,
                                   int workers) {
  if (nsim < 1) throw std::invalid_argument("hessian_invariance_test: nsim must be positive");
  const Rng root(seed);
  const auto a = simulate_summaries(model, theta_a, nsim, root.split(0), workers);
  const auto b = simulate_summaries(model, theta_b, nsim, root.split(1), workers);

  const int p = model->dim();
  const int m = p * (p + 1) / 2 + 1;
  std::vector<std::vector<double>> cols_a(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> cols_b(static_cast<std::size_t>(m));
  TestReport report;
  report.tests = m;
  auto collect = [&](const auto& sample, auto& cols) {
    for (const auto& s : sample) {
      if (!s) {
        ++report.n_nao;
        continue;
      }
      ++report.n_used;
      for (int k = 0; k < m; ++k) cols[static_cast<std::size_t>(k)].push_back((*s)[static_cast<std::size_t>(k)]);
    }
  };
  collect(a, cols_a);
  collect(b, cols_b);
  if (cols_a[0].empty() || cols_b[0].empty())
    throw std::runtime_error("hessian_invariance_test: every replicate was NaO in one sample");

  for (int k = 0; k < m; ++k) {
    const auto ks = stats::ks_two_sample(cols_a[static_cast<std::size_t>(k)], cols_b[static_cast<std::size_t>(k)]);
    if (k == 0 || ks.p_value < report.raw_p_min) {
      report.raw_p_min = ks.p_value;
      report.statistic = ks.statistic;
    }
  }
  report.p_value = stats::bonferroni(report.raw_p_min, m);
  return report;
}

TestReport coordinate_normality_test(const std::vector<MaybeParam>& sample) {
  TestReport report;
  std::vector<std::vector<double>> cols;
  for (const auto& t : sample) {
    if (t.is_nao()) {
      ++report.n_nao;
      continue;
    }
    const auto& v = t.value();
    if (cols.empty()) cols.resize(static_cast<std::size_t>(v.size()));
    for (Eigen::Index k = 0; k < v.size(); ++k) cols[static_cast<std::size_t>(k)].push_back(v(k));
    ++report.n_used;
  }
  if (cols.empty()) throw std::runtime_error("coordinate_normality_test: no non-NaO replicates");
  report.tests = static_cast<int>(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto ks = stats::ks_one_sample(cols[k], stats::normal_cdf);
    if (k == 0 || ks.p_value < report.raw_p_min) {
      report.raw_p_min = ks.p_value;
      report.statistic = ks.statistic;
    }
  }
  report.p_value = stats::bonferroni(report.raw_p_min, report.tests);
  return report;
}

TestReport score_normality_test(std::shared_ptr<const LikModel> model, const Vector& theta,
                                int nsim, std::uint64_t seed, int workers) {
  if (nsim < 1) throw std::invalid_argument("score_normality_test: nsim must be positive");
  const Rng root(seed);
  std::vector<MaybeParam> standardized(static_cast<std::size_t>(nsim), MaybeParam::nao());
  parallel_for(standardized.size(), workers, [&](std::size_t i) {
    Rng rng = root.split(i);
    const auto e = model->eval(model->simulate(theta, rng), theta);
    if (!e) return;
    const auto root_info = symmetric_sqrt(-symmetrized(e->hessian));
    if (!root_info) return;
    const auto lower = cholesky_factor(*root_info);
    if (!lower) return;
    standardized[i] = cholesky_solve(*lower, e->gradient);
  });
  return coordinate_normality_test(standardized);
}

}  // namespace quadlik
