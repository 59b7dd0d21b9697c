#include "support.hpp"

#include "quadlik/parallel.hpp"
#include "quadlik/stats.hpp"

#include <algorithm>
#include <numbers>
#include <set>

using namespace quadlik;

TEST_CASE("Rng streams") {
  Rng a(1), b(1), c(2);
  CHECK(a() == b());
  CHECK(Rng(1)() != c());
  const Rng root(9);
  CHECK(root.split(3).key() == Rng(9).split(3).key());
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.split(i).key());
  CHECK(keys.size() == 1000);
  // Splitting does not advance the parent.
  Rng p(4), q(4);
  (void)p.split(0);
  CHECK(p() == q());
}

TEST_CASE("Rng distributions") {
  Rng rng(10);
  const int n = 200000;
  std::vector<double> u, z, e, c;
  for (int i = 0; i < n; ++i) {
    u.push_back(rng.uniform());
    z.push_back(rng.normal());
    e.push_back(rng.exponential());
    c.push_back(rng.chi_squared(3.5));
  }
  CHECK(*std::min_element(u.begin(), u.end()) > 0.0);
  CHECK(*std::max_element(u.begin(), u.end()) < 1.0);
  CHECK(stats::ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.001);
  CHECK(stats::ks_one_sample(z, stats::normal_cdf).p_value > 0.001);
  CHECK(stats::ks_one_sample(e, [](double x) { return x > 0 ? 1 - std::exp(-x) : 0.0; }).p_value > 0.001);
  CHECK(stats::ks_one_sample(c, [](double x) { return stats::chisq_cdf(x, 3.5); }).p_value > 0.001);
}

TEST_CASE("special functions") {
  CHECK(stats::normal_cdf(0.0) == 0.5);
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  // χ²₂ is exponential with mean 2.
  for (double x : {0.1, 1.0, 5.0, 30.0}) {
    CHECK(stats::chisq_sf(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-12));
    CHECK(stats::chisq_cdf(x, 2) + stats::chisq_sf(x, 2) == doctest::Approx(1.0));
  }
  // χ²₁ through the normal.
  CHECK(stats::chisq_cdf(4.0, 1) == doctest::Approx(2 * stats::normal_cdf(2.0) - 1).epsilon(1e-12));
  CHECK(stats::gamma_p(1.0, 0.0) == 0.0);
  CHECK(stats::gamma_q(3.0, 0.0) == 1.0);
  // Kolmogorov tail: 2 Σ (−1)^{k−1} e^{−2k²λ²}.
  double series = 0.0;
  for (int k = 1; k < 50; ++k) series += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * 1.2 * 1.2);
  CHECK(stats::kolmogorov_sf(1.2) == doctest::Approx(series).epsilon(1e-10));
  CHECK(stats::kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("KS tests") {
  const std::vector<double> one{0.5};
  const auto r = stats::ks_one_sample(one, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(r.statistic == doctest::Approx(0.5));
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(stats::ks_two_sample(a, b).statistic == 1.0);
  CHECK(stats::ks_two_sample(a, a).statistic == 0.0);
  Rng rng(11);
  std::vector<double> shifted;
  for (int i = 0; i < 2000; ++i) shifted.push_back(rng.normal() + 0.3);
  CHECK(stats::ks_one_sample(shifted, stats::normal_cdf).p_value < 1e-6);
}

TEST_CASE("quantiles and summaries") {
  CHECK(stats::quantile_type7({3, 1, 2, 4}, 0.5) == 2.5);
  CHECK(stats::quantile_type7({1, 2, 3, 4, 5}, 0.0) == 1.0);
  CHECK(stats::quantile_type7({1, 2, 3, 4, 5}, 1.0) == 5.0);
  CHECK(stats::quantile_type7({1, 2}, 0.25) == 1.25);
  CHECK(stats::median({5, 1, 3}) == 3.0);
  const std::vector<double> v{1, 2, 3, 4};
  const auto ms = stats::mean_and_se(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(stats::bonferroni(0.01, 3) == doctest::Approx(0.03));
  CHECK(stats::bonferroni(0.5, 3) == 1.0);
}

TEST_CASE("parallel_for visits every index once") {
  for (int workers : {1, 2, 8}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  CHECK_THROWS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}
