#include "support.hpp"

#include "quadlik/bootstrap.hpp"
#include "quadlik/models.hpp"
#include "quadlik/stats.hpp"

using namespace quadlik;

namespace {

StartFunction start_of(std::shared_ptr<const LikModel> m) {
  return [m](const Data& d) { return m->start(d); };
}

}  // namespace

TEST_CASE("LAN Wald pivots follow chi-square") {
  const Matrix k{{2.0, 0.4}, {0.4, 1.0}};
  const auto model = std::make_shared<LanNormalLocation>(k);
  const auto s = parametric_bootstrap(model, Vector{{0.3, -0.2}}, 2000, wald_pivot_function(), start_of(model),
                                      {.seed = 11});
  CHECK(s.n_nao == 0);
  CHECK(s.values.size() == 2000);
  CHECK(stats::ks_one_sample(s.values, [](double x) { return stats::chisq_cdf(x, 2); }).p_value > 0.01);
  const auto cal = calibrate(s, 0.95, 2);
  CHECK(cal.nominal_quantile == doctest::Approx(-2.0 * std::log(0.05)));
  CHECK(std::abs(cal.calibrated_quantile - cal.nominal_quantile) < 0.6);
}

TEST_CASE("parametric_bootstrap bookkeeping") {
  const auto model = std::make_shared<LanNormalLocation>(Matrix::Identity(1, 1));
  const Vector hat{{0.0}};
  SUBCASE("B = 1 is deterministic in the seed") {
    const auto a = parametric_bootstrap(model, hat, 1, wald_pivot_function(), start_of(model), {.seed = 3});
    const auto b = parametric_bootstrap(model, hat, 1, wald_pivot_function(), start_of(model), {.seed = 3});
    REQUIRE(a.values.size() == 1);
    CHECK(a.values == b.values);
    CHECK(a.B == 1);
    CHECK(a.seed == 3);
  }
  SUBCASE("NaO pivots are counted, not dropped silently") {
    const PivotFunction half = [](const Data& d, const MleResult&, const Vector&) -> std::optional<double> {
      if (d(0) > 0) return std::nullopt;
      return d(0);
    };
    const auto s = parametric_bootstrap(model, hat, 400, half, start_of(model), {.seed = 4});
    CHECK(s.n_nao + static_cast<int>(s.values.size()) == 400);
    CHECK(s.n_nao > 150);
    CHECK(s.n_nao < 250);
    for (double v : s.values) CHECK(v <= 0.0);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS(parametric_bootstrap(model, hat, 0, wald_pivot_function(), start_of(model), {}));
    const auto ar = std::make_shared<Ar1Model>(5, 1.0);
    CHECK_NOTHROW(parametric_bootstrap(ar, Vector{{0.5}}, 2, wald_pivot_function(), start_of(ar), {}));
  }
}

TEST_CASE("calibrate") {
  PivotSamples s;
  for (int i = 1; i <= 100; ++i) s.values.push_back(i);
  const auto c = calibrate(s, 0.95, 1);
  CHECK(c.calibrated_quantile == doctest::Approx(95.05));
  CHECK(c.level == 0.95);
  double previous = -1.0;
  for (double level : {0.5, 0.8, 0.9, 0.95, 0.99}) {
    const double q = calibrate(s, level, 1).calibrated_quantile;
    CHECK(q >= previous);
    previous = q;
  }
  CHECK_THROWS(calibrate(PivotSamples{}, 0.95, 1));
  CHECK_THROWS(calibrate(s, 1.0, 1));
}

TEST_CASE("bootstrap output does not depend on the worker count") {
  const auto model = std::make_shared<Ar1Model>(20, 1.0);
  const auto one = parametric_bootstrap(model, Vector{{0.6}}, 300, wald_pivot_function(), start_of(model),
                                        {.seed = 5, .workers = 1});
  const auto four = parametric_bootstrap(model, Vector{{0.6}}, 300, wald_pivot_function(), start_of(model),
                                         {.seed = 5, .workers = 4});
  CHECK(one.values == four.values);
  CHECK(one.n_nao == four.n_nao);
}

TEST_CASE("double_bootstrap") {
  const auto model = std::make_shared<LanNormalLocation>(Matrix{{1.5, 0.2}, {0.2, 1.0}});
  SUBCASE("shape") {
    const auto r = double_bootstrap(model, Vector::Zero(2), 2, 2, wald_pivot_function(), start_of(model), {.seed = 1});
    CHECK(r.outer.values.size() == 2);
    CHECK(r.per_outer_calibrations.size() == 2);
    CHECK(r.simulations == 2 * (1 + 2));
    CHECK(r.inner_coverage.size() == 2);
    CHECK(r.nominal_coverage.size() == 2);
  }
  SUBCASE("LAN inner calibrations sit near the nominal quantile") {
    const auto r =
        double_bootstrap(model, Vector::Zero(2), 40, 400, wald_pivot_function(), start_of(model), {.seed = 2});
    std::vector<double> q;
    for (const auto& c : r.per_outer_calibrations) {
      REQUIRE(c);
      q.push_back(c->calibrated_quantile);
      CHECK(c->nominal_quantile == doctest::Approx(-2.0 * std::log(0.05)));
    }
    CHECK(std::abs(stats::median(q) - (-2.0 * std::log(0.05))) < 0.5);
  }
  SUBCASE("worker count invariance") {
    const auto a = double_bootstrap(model, Vector::Zero(2), 6, 10, wald_pivot_function(), start_of(model),
                                    {.seed = 3, .workers = 1});
    const auto b = double_bootstrap(model, Vector::Zero(2), 6, 10, wald_pivot_function(), start_of(model),
                                    {.seed = 3, .workers = 3});
    CHECK(a.outer.values == b.outer.values);
    CHECK(a.inner_coverage == b.inner_coverage);
  }
}

TEST_CASE("importance_reweight") {
  CHECK(importance_reweight({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}) == doctest::Approx(2.0));
  CHECK_THROWS(importance_reweight({}, {}));
  CHECK_THROWS(importance_reweight({1.0}, {0.0, 1.0}));

  // Draws from N(0, 1) reweighted to N(μ, 1): E_μ[X] = μ and E[1] = 1.
  Rng rng(12);
  const double mu = 0.5;
  std::vector<double> x, ones, lr;
  for (int i = 0; i < 200000; ++i) {
    const double v = rng.normal();
    x.push_back(v);
    ones.push_back(1.0);
    lr.push_back(mu * v - 0.5 * mu * mu);
  }
  // Var of the weight is e^{μ²} − 1.
  const double se_one = std::sqrt((std::exp(mu * mu) - 1) / x.size());
  CHECK(std::abs(importance_reweight(ones, lr) - 1.0) < 4 * se_one);
  CHECK(std::abs(importance_reweight(x, lr) - mu) < 4 * 2 * se_one);
}

TEST_CASE("AR(1) n = 20 calibration improves on chi-square") {
  // At θ near the unit root the Wald pivot is visibly non-χ²₁.
  const auto model = std::make_shared<Ar1Model>(20, 0.0, true);
  const Vector truth{{0.95}};
  const auto cal = calibrate(
      parametric_bootstrap(model, truth, 4000, wald_pivot_function(), start_of(model), {.seed = 6}), 0.95, 1);
  MESSAGE("AR(1) n=20 calibrated 95% quantile " << cal.calibrated_quantile << " vs chi-square "
                                                << cal.nominal_quantile << ", difference "
                                                << cal.calibrated_quantile - cal.nominal_quantile);
  CHECK(cal.calibrated_quantile != doctest::Approx(cal.nominal_quantile).epsilon(0.02));

  // Harness: fresh data at the truth, coverage with each quantile.
  Rng root(7);
  int nominal = 0, calibrated = 0, used = 0;
  const auto pivot = wald_pivot_function();
  for (int i = 0; i < 4000; ++i) {
    Rng rng = root.split(i);
    const Data x = model->simulate(truth, rng);
    const auto fit = fit_mle(model, x);
    const auto v = pivot(x, fit, truth);
    if (!v) continue;
    ++used;
    nominal += *v <= cal.nominal_quantile;
    calibrated += *v <= cal.calibrated_quantile;
  }
  const double cov_nom = nominal / double(used), cov_cal = calibrated / double(used);
  MESSAGE("coverage nominal " << cov_nom << ", calibrated " << cov_cal);
  CHECK(std::abs(cov_cal - 0.95) < std::abs(cov_nom - 0.95));
}
