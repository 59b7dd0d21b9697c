#include "quadlik/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace quadlik {

// ---------------------------------------------------------------------------
// LanNormalLocation

LanNormalLocation::LanNormalLocation(Matrix k)
    : k_(symmetrized(k)), domain_(Box::unbounded(static_cast<int>(k.rows()))) {
  if (k.rows() != k.cols() || !is_symmetric(k, 1e-12))
    throw std::invalid_argument("LanNormalLocation: K must be square and symmetric");
  auto lower = cholesky_factor(k_);
  if (!lower) throw std::invalid_argument("LanNormalLocation: K must be positive definite");
  factor_ = std::move(*lower);
}

MaybeEval LanNormalLocation::eval(const Data& z, const Vector& theta) const {
  if (z.size() != dim() || theta.size() != dim())
    throw std::invalid_argument("LanNormalLocation: dimension mismatch");
  const Vector k_theta = k_ * theta;
  return ObjectiveEval{z.dot(theta) - 0.5 * theta.dot(k_theta), z - k_theta, -k_};
}

Data LanNormalLocation::simulate(const Vector& theta, Rng& rng) const {
  Vector noise(dim());
  for (int i = 0; i < dim(); ++i) noise(i) = rng.normal();
  return k_ * theta + factor_ * noise;
}

Vector LanNormalLocation::start(const Data&) const { return Vector::Zero(dim()); }

// ---------------------------------------------------------------------------
// WishartLamnModel

WishartLamnModel::WishartLamnModel(LamnSpec spec)
    : spec_(std::move(spec)), domain_(Box::unbounded(spec_.dim())) {}

Data WishartLamnModel::pack(const LamnDraw& draw) {
  const auto p = draw.z.size();
  Data data(p + p * p);
  data.head(p) = draw.z;
  data.tail(p * p) = draw.k.reshaped();
  return data;
}

LamnDraw WishartLamnModel::unpack(const Data& data) const {
  const int p = dim();
  if (data.size() != p + p * p) throw std::invalid_argument("WishartLamnModel: bad data layout");
  return {data.head(p), data.tail(p * p).reshaped(p, p)};
}

MaybeEval WishartLamnModel::eval(const Data& data, const Vector& theta) const {
  const LamnDraw draw = unpack(data);
  const Vector k_theta = draw.k * theta;
  return ObjectiveEval{draw.z.dot(theta) - 0.5 * theta.dot(k_theta), draw.z - k_theta, -draw.k};
}

Data WishartLamnModel::simulate(const Vector& theta, Rng& rng) const {
  return pack(sample_lamn(spec_, theta, rng));
}

Vector WishartLamnModel::start(const Data&) const { return Vector::Zero(dim()); }

// ---------------------------------------------------------------------------
// AR(1)

Ar1Data ar1_path(double theta, double x0, const Vector& innovations) {
  Vector x(innovations.size() + 1);
  x(0) = x0;
  for (Eigen::Index i = 1; i < x.size(); ++i) x(i) = theta * x(i - 1) + innovations(i - 1);
  return {std::move(x)};
}

Ar1Data ar1_simulate(double theta, int n, double x0, Rng& rng) {
  if (n < 1) throw std::invalid_argument("ar1_simulate: n must be positive");
  Vector z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  return ar1_path(theta, x0, z);
}

ObjectiveEval ar1_loglik(const Ar1Data& data, double theta) {
  const auto& x = data.x;
  if (x.size() < 2) throw std::invalid_argument("ar1_loglik: need n >= 1");
  double value = 0.0;
  double gradient = 0.0;
  double k = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    const double resid = x(i) - theta * x(i - 1);
    value += resid * resid;
    gradient += x(i - 1) * resid;
    k += x(i - 1) * x(i - 1);
  }
  return {-0.5 * value, Vector::Constant(1, gradient), Matrix::Constant(1, 1, -k)};
}

double ar1_expected_info(double theta, int n, double x0) {
  if (n < 1) throw std::invalid_argument("ar1_expected_info: n must be positive");
  double e = x0 * x0;
  double sum = e;
  for (int j = 1; j < n; ++j) {
    e = theta * theta * e + 1.0;
    sum += e;
  }
  return sum;
}

Ar1Model::Ar1Model(int n, double x0, bool random_x0)
    : n_(n), x0_(x0), random_x0_(random_x0), domain_(Box::unbounded(1)) {
  if (n < 1) throw std::invalid_argument("Ar1Model: n must be positive");
}

MaybeEval Ar1Model::eval(const Data& x, const Vector& theta) const {
  if (x.size() != n_ + 1) throw std::invalid_argument("Ar1Model: data must hold n + 1 values");
  return ar1_loglik(Ar1Data{x}, theta(0));
}

Data Ar1Model::simulate(const Vector& theta, Rng& rng) const {
  const double x0 = random_x0_ ? rng.normal() : x0_;
  return ar1_simulate(theta(0), n_, x0, rng).x;
}

Vector Ar1Model::start(const Data& x) const {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    num += x(i - 1) * x(i);
    den += x(i - 1) * x(i - 1);
  }
  return Vector::Constant(1, den > 0.0 ? num / den : 0.0);
}

// ---------------------------------------------------------------------------
// Exponential rate

ExponentialRateModel::ExponentialRateModel(int n) : n_(n), domain_(Box::unbounded(1)) {
  if (n < 1) throw std::invalid_argument("ExponentialRateModel: n must be positive");
}

MaybeEval ExponentialRateModel::eval(const Data& x, const Vector& theta) const {
  if (x.size() != n_) throw std::invalid_argument("ExponentialRateModel: data must hold n values");
  const double total = x.sum();
  const double scaled = std::exp(theta(0)) * total;
  return ObjectiveEval{n_ * theta(0) - scaled, Vector::Constant(1, n_ - scaled),
                       Matrix::Constant(1, 1, -scaled)};
}

Data ExponentialRateModel::simulate(const Vector& theta, Rng& rng) const {
  const double rate = std::exp(theta(0));
  Vector x(n_);
  for (int i = 0; i < n_; ++i) x(i) = rng.exponential() / rate;
  return x;
}

Vector ExponentialRateModel::start(const Data& x) const {
  return Vector::Constant(1, std::log(n_ / x.sum()));
}

// ---------------------------------------------------------------------------
// Pedigree and relationship matrix

Pedigree::Pedigree(std::vector<PedigreeRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    for (const auto& parent : {r.sire, r.dam}) {
      if (!parent) continue;
      if (*parent < 0 || static_cast<std::size_t>(*parent) >= i) {
        std::ostringstream msg;
        msg << "Pedigree: record " << r.id << " (position " << i + 1 << ") has a parent that "
            << (static_cast<std::size_t>(*parent) == i ? "is itself" : "does not precede it");
        throw std::invalid_argument(msg.str());
      }
    }
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

int parse_id(const std::string& field, std::size_t line, const char* what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != field.size() || field.empty() || v < 1 || v > std::numeric_limits<int>::max()) {
    std::ostringstream msg;
    msg << "pedigree line " << line << ": invalid " << what << " '" << field << "'";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(v);
}

}  // namespace

Pedigree Pedigree::parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<PedigreeRecord> records;
  std::map<int, int> index_of;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto fields = split_commas(trimmed);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"id", "sire", "dam"}) {
        throw std::invalid_argument("pedigree line " + std::to_string(line_no) +
                                    ": expected header 'id,sire,dam'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw std::invalid_argument("pedigree line " + std::to_string(line_no) +
                                  ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    PedigreeRecord rec;
    rec.id = parse_id(fields[0], line_no, "id");
    if (index_of.contains(rec.id)) {
      throw std::invalid_argument("pedigree line " + std::to_string(line_no) + ": duplicate id " +
                                  fields[0]);
    }
    auto parent = [&](const std::string& field, const char* what) -> std::optional<int> {
      if (field.empty()) return std::nullopt;
      const int pid = parse_id(field, line_no, what);
      if (pid == rec.id) {
        throw std::invalid_argument("pedigree line " + std::to_string(line_no) + ": individual " +
                                    fields[0] + " is its own " + what);
      }
      const auto it = index_of.find(pid);
      if (it == index_of.end()) {
        throw std::invalid_argument("pedigree line " + std::to_string(line_no) + ": " + what +
                                    " " + field + " does not precede individual " + fields[0]);
      }
      return it->second;
    };
    rec.sire = parent(fields[1], "sire");
    rec.dam = parent(fields[2], "dam");
    index_of[rec.id] = static_cast<int>(records.size());
    records.push_back(rec);
  }
  if (!header_seen) throw std::invalid_argument("pedigree line 1: missing header 'id,sire,dam'");
  return Pedigree(std::move(records));
}

Pedigree Pedigree::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open pedigree file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

Pedigree Pedigree::synthetic(int n, std::uint64_t seed) {
  if (n < 6) throw std::invalid_argument("Pedigree::synthetic: need at least 6 individuals");
  Rng rng(seed);
  auto pick = [&](int count) {
    return static_cast<int>(std::min<double>(count - 1, std::floor(rng.uniform() * count)));
  };
  int founders = std::max(2, n / 5);
  founders += founders % 2;
  const int gen1 = (n - founders) / 2;
  const int sizes[] = {founders, gen1, n - founders - gen1};

  std::vector<PedigreeRecord> records;
  int generation_start = 0;
  int previous_start = 0;
  for (int g = 0; g < 3; ++g) {
    const int previous_size = g ? sizes[g - 1] : 0;
    for (int k = 0; k < sizes[g]; ++k) {
      PedigreeRecord r;
      r.id = static_cast<int>(records.size()) + 1;
      if (g > 0) {
        // Even offsets within a generation are sires, odd are dams.
        const int males = (previous_size + 1) / 2;
        const int females = previous_size / 2;
        r.sire = previous_start + 2 * pick(males);
        r.dam = previous_start + 2 * pick(females) + 1;
      }
      records.push_back(r);
    }
    previous_start = generation_start;
    generation_start += sizes[g];
  }
  return Pedigree(std::move(records));
}

RelationshipMatrix relationship_matrix(const Pedigree& pedigree) {
  const auto n = static_cast<Eigen::Index>(pedigree.size());
  Matrix a = Matrix::Zero(n, n);
  const auto& recs = pedigree.records();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = recs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < i; ++j) {
      double v = 0.0;
      if (r.sire) v += a(j, *r.sire);
      if (r.dam) v += a(j, *r.dam);
      a(i, j) = a(j, i) = 0.5 * v;
    }
    a(i, i) = 1.0 + ((r.sire && r.dam) ? 0.5 * a(*r.sire, *r.dam) : 0.0);
  }
  return {std::move(a)};
}

// ---------------------------------------------------------------------------
// Animal model

AnimalKernel::AnimalKernel(const RelationshipMatrix& a) : a_(a.a) {
  if (a_.rows() != a_.cols() || a_.rows() == 0)
    throw std::invalid_argument("AnimalKernel: A must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(a_));
  if (eig.info() != Eigen::Success) throw std::runtime_error("AnimalKernel: eigensolver failed");
  q_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();
  q_ones_ = q_.transpose() * Vector::Ones(a_.rows());
  clamp_ = std::max(0.0, -eigenvalues_.minCoeff());
  sim_factor_ = q_ * eigenvalues_.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Vector AnimalKernel::rotate(const Vector& y) const {
  if (y.size() != a_.rows()) throw std::invalid_argument("AnimalKernel: y has wrong length");
  return q_.transpose() * y;
}

MaybeEval AnimalKernel::loglik(const Vector& y, const AnimalParams& params) const {
  return loglik_rotated(rotate(y), params);
}

MaybeEval AnimalKernel::loglik_rotated(const Vector& qty, const AnimalParams& params) const {
  const double s2 = params.sigma2;
  const double t2 = params.tau2;
  if (!std::isfinite(params.mu) || !std::isfinite(s2) || !std::isfinite(t2)) return std::nullopt;
  const Eigen::ArrayXd lambda = eigenvalues_.array();
  const Eigen::ArrayXd d = s2 * lambda + t2;
  const double floor = static_cast<double>(d.size()) * std::numeric_limits<double>::epsilon() *
                       d.abs().maxCoeff();
  if (!(d.minCoeff() > floor)) return std::nullopt;

  const Eigen::ArrayXd r = qty.array() - params.mu * q_ones_.array();
  const Eigen::ArrayXd s = q_ones_.array();
  const Eigen::ArrayXd inv = d.inverse();
  const Eigen::ArrayXd inv2 = inv.square();
  const Eigen::ArrayXd inv3 = inv2 * inv;
  const Eigen::ArrayXd r2 = r.square();

  ObjectiveEval e;
  e.value = -0.5 * d.log().sum() - 0.5 * (r2 * inv).sum();
  e.gradient.resize(3);
  e.gradient(0) = (r * s * inv).sum();
  e.gradient(1) = -0.5 * (lambda * inv).sum() + 0.5 * (r2 * lambda * inv2).sum();
  e.gradient(2) = -0.5 * inv.sum() + 0.5 * (r2 * inv2).sum();
  Matrix& h = e.hessian;
  h.resize(3, 3);
  h(0, 0) = -(s.square() * inv).sum();
  h(0, 1) = h(1, 0) = -(r * s * lambda * inv2).sum();
  h(0, 2) = h(2, 0) = -(r * s * inv2).sum();
  h(1, 1) = 0.5 * (lambda.square() * inv2).sum() - (r2 * lambda.square() * inv3).sum();
  h(1, 2) = h(2, 1) = 0.5 * (lambda * inv2).sum() - (r2 * lambda * inv3).sum();
  h(2, 2) = 0.5 * inv2.sum() - (r2 * inv3).sum();
  if (!std::isfinite(e.value) || !e.gradient.allFinite() || !h.allFinite()) return std::nullopt;
  return e;
}

Vector AnimalKernel::simulate(const AnimalParams& params, Rng& rng) const {
  if (!(params.sigma2 >= 0.0) || !(params.tau2 >= 0.0))
    throw std::invalid_argument("animal_simulate: variances must be nonnegative");
  const auto n = a_.rows();
  Vector xi(n);
  Vector eta(n);
  for (Eigen::Index i = 0; i < n; ++i) xi(i) = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) eta(i) = rng.normal();
  return Vector::Constant(n, params.mu) + std::sqrt(params.sigma2) * (sim_factor_ * xi) +
         std::sqrt(params.tau2) * eta;
}

MaybeEval animal_loglik(const RelationshipMatrix& a, const Vector& y, const AnimalParams& params) {
  return AnimalKernel(a).loglik(y, params);
}

Vector animal_simulate(const RelationshipMatrix& a, const AnimalParams& params, Rng& rng) {
  return AnimalKernel(a).simulate(params, rng);
}

double logit_heritability(const AnimalParams& params) {
  return std::log(params.sigma2) - std::log(params.tau2);
}

std::optional<double> logit_heritability_se(const AnimalParams& params, const Matrix& observed_info) {
  const auto lower = cholesky_factor(observed_info);
  if (!lower) return std::nullopt;
  Vector g(3);
  g << 0.0, 1.0 / params.sigma2, -1.0 / params.tau2;
  return std::sqrt(g.dot(cholesky_solve(*lower, g)));
}

AnimalParams method_of_moments_start(const RelationshipMatrix& a, const Vector& y) {
  const auto n = y.size();
  if (n < 3 || a.a.rows() != n) throw std::invalid_argument("method_of_moments_start: need N >= 3");
  const double mean = y.mean();
  const Vector e = y.array() - mean;
  const double var = e.squaredNorm() / static_cast<double>(n - 1);

  // Normal equations of regressing e e' on (A, I): match tr(AV) and tr(V).
  const double tr_a = a.a.trace();
  const double tr_a2 = a.a.cwiseAbs2().sum();
  const double nn = static_cast<double>(n);
  const double det = tr_a2 * nn - tr_a * tr_a;
  AnimalParams start{mean, 0.5 * var, 0.5 * var};
  if (det > 1e-10 * tr_a2 * nn) {
    const double rhs_a = e.dot(a.a * e);
    const double rhs_i = e.squaredNorm();
    start.sigma2 = (nn * rhs_a - tr_a * rhs_i) / det;
    start.tau2 = (tr_a2 * rhs_i - tr_a * rhs_a) / det;
  }
  const double floor = 1e-3 * var;
  start.sigma2 = std::max(start.sigma2, floor);
  start.tau2 = std::max(start.tau2, floor);
  if (!(start.sigma2 > 0.0) || !(start.tau2 > 0.0)) {
    // Constant y: var is zero and no interior start exists on this scale.
    start.sigma2 = start.tau2 = 1.0;
  }
  return start;
}

AnimalModel::AnimalModel(const RelationshipMatrix& a) : a_(a), kernel_(a), domain_(Box::unbounded(3)) {}

Vector AnimalModel::to_internal(const AnimalParams& params) {
  return Vector{{params.mu, std::log(params.sigma2), std::log(params.tau2)}};
}

AnimalParams AnimalModel::to_natural(const Vector& phi) {
  return {phi(0), std::exp(phi(1)), std::exp(phi(2))};
}

MaybeEval AnimalModel::eval(const Data& y, const Vector& phi) const {
  const AnimalParams natural = to_natural(phi);
  auto e = kernel_.loglik(y, natural);
  if (!e) return std::nullopt;
  // Chain rule to (μ, log σ², log τ²).
  const Vector scale{{1.0, natural.sigma2, natural.tau2}};
  ObjectiveEval out;
  out.value = e->value;
  out.gradient = scale.cwiseProduct(e->gradient);
  out.hessian = scale.asDiagonal() * e->hessian * scale.asDiagonal();
  out.hessian(1, 1) += out.gradient(1);
  out.hessian(2, 2) += out.gradient(2);
  return out;
}

Data AnimalModel::simulate(const Vector& phi, Rng& rng) const {
  return kernel_.simulate(to_natural(phi), rng);
}

Vector AnimalModel::start(const Data& y) const {
  return to_internal(method_of_moments_start(a_, y));
}

}  // namespace quadlik
