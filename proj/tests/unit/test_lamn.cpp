#include "support.hpp"

#include "quadlik/lamn.hpp"
#include "quadlik/models.hpp"
#include "quadlik/stats.hpp"

using namespace quadlik;

TEST_CASE("LamnSpec validation") {
  CHECK_NOTHROW(LamnSpec(2, ConstantCurvature{Matrix::Identity(2, 2)}));
  CHECK_THROWS(LamnSpec(2, ConstantCurvature{Matrix{{1.0, 0.0}, {0.0, 0.0}}}));
  CHECK_THROWS(LamnSpec(2, ConstantCurvature{Matrix::Identity(3, 3)}));
  CHECK_THROWS(LamnSpec(3, WishartCurvature{2.0, Matrix::Identity(3, 3)}));
  CHECK_NOTHROW(LamnSpec(3, WishartCurvature{2.5, Matrix::Identity(3, 3)}));
  CHECK_THROWS(LamnSpec(2, WishartCurvature{5.0, Matrix{{1.0, 2.0}, {2.0, 1.0}}}));
}

TEST_CASE("sample_lamn with constant curvature") {
  const Matrix k{{2.0, 0.7}, {0.7, 1.5}};
  const LamnSpec spec(2, ConstantCurvature{k});
  const int n = 100000;
  Rng rng(41);
  Vector mean = Vector::Zero(2);
  Matrix second = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const auto d = sample_lamn(spec, Vector::Zero(2), rng);
    mean += d.z;
    second += d.z * d.z.transpose();
  }
  mean /= n;
  const Matrix cov = second / n - mean * mean.transpose();
  CHECK(std::abs(mean(0)) < 4 * std::sqrt(k(0, 0) / n));
  CHECK(std::abs(mean(1)) < 4 * std::sqrt(k(1, 1) / n));
  CHECK((cov - k).norm() / k.norm() < 0.05);
  // Entrywise, against the normal-theory se of a sample covariance.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt((k(i, i) * k(j, j) + k(i, j) * k(i, j)) / n);
      CHECK(std::abs(cov(i, j) - k(i, j)) < 4 * se);
    }
}

TEST_CASE("sample_lamn with identity curvature is a location shift") {
  const LamnSpec spec(2, ConstantCurvature{Matrix::Identity(2, 2)});
  const Vector t{{1.5, -0.5}};
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) {
    const auto shifted = sample_lamn(spec, t, a);
    const auto centred = sample_lamn(spec, Vector::Zero(2), b);
    CHECK((shifted.z - t - centred.z).norm() < 1e-14);
  }
}

TEST_CASE("Wishart curvature law does not depend on theta") {
  const LamnSpec spec(2, WishartCurvature{5.0, Matrix{{0.3, 0.1}, {0.1, 0.2}}});
  Rng a(1), b(2);
  std::vector<double> ea, eb;
  for (int i = 0; i < 3000; ++i) {
    ea.push_back(Eigen::SelfAdjointEigenSolver<Matrix>(sample_lamn(spec, Vector::Zero(2), a).k).eigenvalues()(0));
    eb.push_back(Eigen::SelfAdjointEigenSolver<Matrix>(sample_lamn(spec, Vector{{3.0, -2.0}}, b).k).eigenvalues()(0));
  }
  CHECK(stats::ks_two_sample(ea, eb).p_value > 0.01);
}

TEST_CASE("Wishart sampler moments") {
  // E K = dof · scale.
  const Matrix scale{{0.5, 0.2}, {0.2, 0.4}};
  const double dof = 6.0;
  const LamnSpec spec(2, WishartCurvature{dof, scale});
  Rng rng(44);
  const int n = 40000;
  Matrix mean = Matrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Matrix k = sample_curvature(spec, rng);
    CHECK(is_positive_definite(k));
    mean += k;
  }
  mean /= n;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double var = dof * (scale(i, j) * scale(i, j) + scale(i, i) * scale(j, j));
      CHECK(std::abs(mean(i, j) - dof * scale(i, j)) < 4 * std::sqrt(var / n));
    }
}

TEST_CASE("lamn_loglik") {
  const LamnDraw d{Vector{{1.0}}, Matrix{{1.0}}};
  CHECK(lamn_loglik(d, Vector{{0.0}}) == 0.0);
  CHECK(lamn_loglik(d, Vector{{1.0}}) == 0.5);
  const LamnDraw e{Vector{{1.0, 2.0}}, Matrix{{2.0, 0.5}, {0.5, 1.0}}};
  const Vector argmax = e.k.ldlt().solve(e.z);
  Rng rng(3);
  for (int i = 0; i < 20; ++i)
    CHECK(lamn_loglik(e, argmax) >= lamn_loglik(e, argmax + qt::random_vector(2, rng, 0.1)));
}

TEST_CASE("contiguity_estimate") {
  const LamnSpec unit(1, ConstantCurvature{Matrix{{1.0}}});
  const auto c = contiguity_estimate(unit, Vector{{1.0}}, 20000, 5);
  CHECK(std::abs(c.mean - 1.0) < 3 * c.se);
  const auto zero = contiguity_estimate(unit, Vector{{0.0}}, 100, 5);
  CHECK(zero.mean == 1.0);
  CHECK(zero.se == 0.0);

  const LamnSpec wishart(2, WishartCurvature{5.0, Matrix::Identity(2, 2) / 5.0});
  Rng rng(6);
  for (int i = 0; i < 3; ++i) {
    Vector delta(2);
    delta << rng.uniform() - 0.5, rng.uniform() - 0.5;
    const auto w = contiguity_estimate(wishart, delta, 20000, 100 + i);
    CHECK(std::abs(w.mean - 1.0) < 4 * w.se);
  }
}

TEST_CASE("likelihood ratio means never exceed one beyond noise") {
  const auto expo = std::make_shared<ExponentialRateModel>(10);
  const auto r1 = likelihood_ratio_mean(expo, Vector{{0.0}}, Vector{{0.3}}, 20000, 1);
  CHECK(r1.mean <= 1.0 + 4 * r1.se);
  CHECK(std::abs(r1.mean - 1.0) < 4 * r1.se);
  const auto ar = std::make_shared<Ar1Model>(10, 1.0);
  const auto r2 = likelihood_ratio_mean(ar, Vector{{0.5}}, Vector{{0.1}}, 20000, 2);
  CHECK(r2.mean <= 1.0 + 4 * r2.se);
}

TEST_CASE("hessian_invariance_test") {
  SUBCASE("constant K never rejects") {
    const auto lan = std::make_shared<LanNormalLocation>(Matrix{{2.0, 0.3}, {0.3, 1.0}});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = hessian_invariance_test(lan, Vector::Zero(2), Vector{{1.0, 2.0}}, 500, seed);
      CHECK(r.p_value > 0.01);
      CHECK(r.tests == 4);
    }
  }
  SUBCASE("AR(1) curvature depends on theta") {
    const auto ar = std::make_shared<Ar1Model>(50, 1.0);
    const auto r = hessian_invariance_test(ar, Vector{{0.0}}, Vector{{0.9}}, 2000, 3);
    CHECK(r.p_value < 0.01);
  }
  SUBCASE("Wishart LAMN model") {
    const auto m = std::make_shared<WishartLamnModel>(LamnSpec(2, WishartCurvature{5.0, Matrix::Identity(2, 2)}));
    // Size at most 0.01 per run; allow binomial noise over 1000 runs.
    int reject = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed)
      reject += hessian_invariance_test(m, Vector::Zero(2), Vector{{1.0, -1.0}}, 200, seed).p_value <= 0.01;
    CHECK(reject <= 20);
  }
}

TEST_CASE("score_normality_test") {
  SUBCASE("exact LAMN and LAN") {
    const auto m = std::make_shared<WishartLamnModel>(LamnSpec(2, WishartCurvature{5.0, Matrix::Identity(2, 2)}));
    const auto lan = std::make_shared<LanNormalLocation>(Matrix{{2.0, 0.3}, {0.3, 1.0}});
    int pass_m = 0, pass_lan = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      pass_m += score_normality_test(m, Vector{{0.5, -0.5}}, 1000, seed).p_value > 0.01;
      pass_lan += score_normality_test(lan, Vector{{0.5, -0.5}}, 1000, seed).p_value > 0.01;
    }
    CHECK(pass_m >= 19);
    CHECK(pass_lan >= 19);
  }
  SUBCASE("AR(1) with n = 5 is not yet normal") {
    const auto ar = std::make_shared<Ar1Model>(5, 1.0);
    int reject = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      reject += score_normality_test(ar, Vector{{0.5}}, 2000, seed).p_value < 0.01;
    MESSAGE("AR(1) n=5 score normality rejections: " << reject << "/20");
    CHECK(reject > 0);
  }
}

TEST_CASE("coordinate_normality_test counts NaO") {
  std::vector<MaybeParam> sample;
  Rng rng(8);
  for (int i = 0; i < 500; ++i) sample.push_back(i % 50 == 0 ? MaybeParam::nao() : MaybeParam(qt::random_vector(2, rng)));
  const auto r = coordinate_normality_test(sample);
  CHECK(r.n_nao == 10);
  CHECK(r.n_used == 490);
  CHECK(r.tests == 2);
}

TEST_CASE("parallel simulation is schedule invariant") {
  const LamnSpec spec(2, WishartCurvature{5.0, Matrix::Identity(2, 2) / 5.0});
  const auto one = contiguity_estimate(spec, Vector{{0.3, 0.2}}, 3000, 9, 1);
  const auto many = contiguity_estimate(spec, Vector{{0.3, 0.2}}, 3000, 9, 8);
  CHECK(one.mean == many.mean);
  CHECK(one.se == many.se);
  const auto ar = std::make_shared<Ar1Model>(20, 1.0);
  CHECK(hessian_invariance_test(ar, Vector{{0.0}}, Vector{{0.5}}, 500, 4, 1).p_value ==
        hessian_invariance_test(ar, Vector{{0.0}}, Vector{{0.5}}, 500, 4, 3).p_value);
}
