#pragma once

#include <functional>
#include <span>
#include <vector>

namespace quadlik::stats {

double normal_cdf(double x);

/// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chisq_cdf(double x, double dof);
double chisq_sf(double x, double dof);

/// Survival function of the Kolmogorov distribution, Pr(K > lambda).
double kolmogorov_sf(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_one_sample(std::span<const double> sample,
                       const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Type-7 (linear interpolation) quantile of an unsorted sample.
double quantile_type7(std::vector<double> values, double prob);
double median(std::vector<double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> values);

/// min(1, m · p) for m simultaneous tests.
double bonferroni(double p_min, int tests);

}  // namespace quadlik::stats
