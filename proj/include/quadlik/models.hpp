#pragma once

#include "quadlik/core.hpp"
#include "quadlik/lamn.hpp"
#include "quadlik/rng.hpp"

#include <optional>
#include <string>
#include <vector>

namespace quadlik {

// ---------------------------------------------------------------------------
// Normal location and Wishart-mixed LAMN

/// Data Z ~ N(Kθ, K); log likelihood Z'θ − ½θ'Kθ.
class LanNormalLocation final : public LikModel {
 public:
  explicit LanNormalLocation(Matrix k);

  int dim() const override { return static_cast<int>(k_.rows()); }
  const Box& domain() const override { return domain_; }
  MaybeEval eval(const Data& z, const Vector& theta) const override;
  Data simulate(const Vector& theta, Rng& rng) const override;
  Vector start(const Data& z) const override;
  std::string name() const override { return "lan"; }

  const Matrix& curvature() const { return k_; }

 private:
  Matrix k_;
  Matrix factor_;
  Box domain_;
};

/// Exactly LAMN model with K drawn from a LamnSpec. Data layout: [z; vec(K)]
/// with K stored column-major.
class WishartLamnModel final : public LikModel {
 public:
  explicit WishartLamnModel(LamnSpec spec);

  int dim() const override { return spec_.dim(); }
  const Box& domain() const override { return domain_; }
  MaybeEval eval(const Data& data, const Vector& theta) const override;
  Data simulate(const Vector& theta, Rng& rng) const override;
  Vector start(const Data& data) const override;
  std::string name() const override { return "wishart-lamn"; }

  static Data pack(const LamnDraw& draw);
  LamnDraw unpack(const Data& data) const;

 private:
  LamnSpec spec_;
  Box domain_;
};

// ---------------------------------------------------------------------------
// AR(1) with unit innovation variance

struct Ar1Data {
  Vector x;  // X_0 .. X_n
};

Ar1Data ar1_simulate(double theta, int n, double x0, Rng& rng);
/// Path X_i = θX_{i−1} + innovations_i from X_0 = x0.
Ar1Data ar1_path(double theta, double x0, const Vector& innovations);
ObjectiveEval ar1_loglik(const Ar1Data& data, double theta);

/// E_θ(K_n | X_0 = x0) by the recursion e_j = θ²e_{j−1} + 1, e_0 = x0².
double ar1_expected_info(double theta, int n, double x0);

class Ar1Model final : public LikModel {
 public:
  /// X_0 = x0, or X_0 ~ N(0, 1) when random_x0 is set.
  Ar1Model(int n, double x0, bool random_x0 = false);

  int dim() const override { return 1; }
  const Box& domain() const override { return domain_; }
  MaybeEval eval(const Data& x, const Vector& theta) const override;
  Data simulate(const Vector& theta, Rng& rng) const override;
  /// Least squares Σ X_{i−1}X_i / Σ X_{i−1}².
  Vector start(const Data& x) const override;
  std::string name() const override { return "ar1"; }

  int length() const { return n_; }

 private:
  int n_;
  double x0_;
  bool random_x0_;
  Box domain_;
};

// ---------------------------------------------------------------------------
// iid exponential observations, parameterized by log rate

class ExponentialRateModel final : public LikModel {
 public:
  explicit ExponentialRateModel(int n);

  int dim() const override { return 1; }
  const Box& domain() const override { return domain_; }
  MaybeEval eval(const Data& x, const Vector& theta) const override;
  Data simulate(const Vector& theta, Rng& rng) const override;
  Vector start(const Data& x) const override;
  std::string name() const override { return "exponential"; }

 private:
  int n_;
  Box domain_;
};

// ---------------------------------------------------------------------------
// Animal model Y = μ + B + E, B ~ N(0, σ²A), E ~ N(0, τ²I)

struct PedigreeRecord {
  int id = 0;
  std::optional<int> sire;  // index of an earlier record
  std::optional<int> dam;
};

/// Records in topological order; parents refer to earlier records by index.
class Pedigree {
 public:
  /// Throws std::invalid_argument naming the offending record.
  explicit Pedigree(std::vector<PedigreeRecord> records);

  /// CSV with header `id,sire,dam`, empty field for unknown parents.
  /// Throws std::invalid_argument with the line number on malformed input.
  static Pedigree parse_csv(const std::string& text);
  static Pedigree load_csv(const std::string& path);

  /// Founders, then two generations of offspring, ~N/5 founders.
  static Pedigree synthetic(int n, std::uint64_t seed);

  std::size_t size() const { return records_.size(); }
  const std::vector<PedigreeRecord>& records() const { return records_; }

 private:
  std::vector<PedigreeRecord> records_;
};

struct RelationshipMatrix {
  Matrix a;
};

/// Tabular method in record order.
RelationshipMatrix relationship_matrix(const Pedigree& pedigree);

struct AnimalParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  double tau2 = 1.0;
};

/// Eigendecomposition of A, computed once and reused for every (σ², τ²).
class AnimalKernel {
 public:
  explicit AnimalKernel(const RelationshipMatrix& a);

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues_.size()); }
  const Matrix& a() const { return a_; }

  /// Gaussian log likelihood in (μ, σ², τ²), constants dropped.
  MaybeEval loglik(const Vector& y, const AnimalParams& params) const;
  /// Same, with precomputed rotated data Q'y.
  MaybeEval loglik_rotated(const Vector& qty, const AnimalParams& params) const;
  Vector rotate(const Vector& y) const;

  Vector simulate(const AnimalParams& params, Rng& rng) const;
  /// Magnitude of the most negative eigenvalue of A clamped to zero.
  double clamp_magnitude() const { return clamp_; }

 private:
  Matrix a_;
  Matrix q_;
  Vector eigenvalues_;
  Vector q_ones_;
  Matrix sim_factor_;
  double clamp_ = 0.0;
};

MaybeEval animal_loglik(const RelationshipMatrix& a, const Vector& y,
                        const AnimalParams& params);
Vector animal_simulate(const RelationshipMatrix& a, const AnimalParams& params, Rng& rng);

/// log σ² − log τ².
double logit_heritability(const AnimalParams& params);

/// Delta-method standard error from the (μ, σ², τ²) observed information.
std::optional<double> logit_heritability_se(const AnimalParams& params,
                                            const Matrix& observed_info);

AnimalParams method_of_moments_start(const RelationshipMatrix& a, const Vector& y);

/// Animal model on the unconstrained scale (μ, log σ², log τ²).
class AnimalModel final : public LikModel {
 public:
  explicit AnimalModel(const RelationshipMatrix& a);

  int dim() const override { return 3; }
  const Box& domain() const override { return domain_; }
  MaybeEval eval(const Data& y, const Vector& phi) const override;
  Data simulate(const Vector& phi, Rng& rng) const override;
  Vector start(const Data& y) const override;
  std::string name() const override { return "animal"; }

  const AnimalKernel& kernel() const { return kernel_; }

  static Vector to_internal(const AnimalParams& params);
  static AnimalParams to_natural(const Vector& phi);

 private:
  RelationshipMatrix a_;
  AnimalKernel kernel_;
  Box domain_;
};

}  // namespace quadlik
