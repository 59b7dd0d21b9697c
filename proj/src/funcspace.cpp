#include "quadlik/funcspace.hpp"

#include "quadlik/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quadlik {

namespace {

std::string describe(const Vector& x) {
  std::ostringstream out;
  out << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x(i);
  out << ')';
  return out.str();
}

[[noreturn]] void fail_at(const char* what, const Vector& x) {
  throw GridEvaluationError(std::string(what) + " at " + describe(x), x);
}

double finite_or_throw(double v, const Vector& x) {
  if (!std::isfinite(v)) fail_at("non-finite evaluation", x);
  return v;
}

ObjectiveEval eval_or_throw(MaybeEval e, const Vector& x) {
  if (!e) fail_at("NaO evaluation", x);
  if (!std::isfinite(e->value) || !e->gradient.allFinite() || !e->hessian.allFinite())
    fail_at("non-finite evaluation", x);
  return std::move(*e);
}

}  // namespace

GridEvaluationError::GridEvaluationError(const std::string& what, Vector point)
    : std::runtime_error(what), point_(std::move(point)) {}

GridBox::GridBox(Vector lower, Vector upper, std::vector<int> points_per_axis)
    : lower_(std::move(lower)), upper_(std::move(upper)), points_(std::move(points_per_axis)) {
  if (lower_.size() != upper_.size() || static_cast<std::size_t>(lower_.size()) != points_.size())
    throw std::invalid_argument("GridBox: inconsistent dimensions");
  if (lower_.size() == 0) throw std::invalid_argument("GridBox: empty dimension");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!(lower_(i) < upper_(i))) throw std::invalid_argument("GridBox: lower must be < upper");
    if (points_[static_cast<std::size_t>(i)] < 1)
      throw std::invalid_argument("GridBox: points_per_axis must be positive");
  }
}

GridBox GridBox::with_default_resolution(Vector lower, Vector upper) {
  const auto p = lower.size();
  if (p > 3)
    throw std::invalid_argument("GridBox: grid diagnostics need p <= 3; use sample_points");
  const int per_axis = p <= 2 ? 33 : 9;
  return GridBox(std::move(lower), std::move(upper),
                 std::vector<int>(static_cast<std::size_t>(p), per_axis));
}

std::size_t GridBox::size() const {
  std::size_t n = 1;
  for (int k : points_) n *= static_cast<std::size_t>(k);
  return n;
}

bool GridBox::contains(const Vector& x) const {
  return x.size() == lower_.size() && (x.array() >= lower_.array()).all() &&
         (x.array() <= upper_.array()).all();
}

std::vector<Vector> GridBox::points() const {
  const auto p = static_cast<std::size_t>(dim());
  std::vector<std::vector<double>> axes(p);
  for (std::size_t d = 0; d < p; ++d) {
    const int k = points_[d];
    const auto i = static_cast<Eigen::Index>(d);
    if (k == 1) {
      axes[d] = {0.5 * (lower_(i) + upper_(i))};
      continue;
    }
    axes[d].resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      const double t = static_cast<double>(j) / (k - 1);
      axes[d][static_cast<std::size_t>(j)] = j == k - 1 ? upper_(i) : lower_(i) + t * (upper_(i) - lower_(i));
    }
  }
  std::vector<Vector> out;
  out.reserve(size());
  std::vector<std::size_t> index(p, 0);
  for (std::size_t n = 0; n < size(); ++n) {
    Vector x(static_cast<Eigen::Index>(p));
    for (std::size_t d = 0; d < p; ++d) x(static_cast<Eigen::Index>(d)) = axes[d][index[d]];
    out.push_back(std::move(x));
    for (std::size_t d = p; d-- > 0;) {
      if (++index[d] < axes[d].size()) break;
      index[d] = 0;
    }
  }
  return out;
}

GridBox GridBox::refined() const {
  std::vector<int> finer(points_.size());
  for (std::size_t d = 0; d < points_.size(); ++d)
    finer[d] = points_[d] == 1 ? 1 : 2 * points_[d] - 1;
  return GridBox(lower_, upper_, std::move(finer));
}

GridBox GridBox::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("GridBox::scaled: factor must be positive");
  const Vector c = center();
  const Vector half = 0.5 * (upper_ - lower_) * factor;
  return GridBox(c - half, c + half, points_);
}

std::vector<Vector> sample_points(const GridBox& box, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    Vector x(box.dim());
    for (int d = 0; d < box.dim(); ++d)
      x(d) = box.lower()(d) + rng.uniform() * (box.upper()(d) - box.lower()(d));
    out.push_back(std::move(x));
  }
  return out;
}

NestedBoxes::NestedBoxes(std::vector<GridBox> boxes) : boxes_(std::move(boxes)) {
  if (boxes_.empty()) throw std::invalid_argument("NestedBoxes: need at least one box");
  for (std::size_t i = 1; i < boxes_.size(); ++i) {
    const auto& inner = boxes_[i - 1];
    const auto& outer = boxes_[i];
    if (inner.dim() != outer.dim() ||
        (inner.lower().array() < outer.lower().array()).any() ||
        (inner.upper().array() > outer.upper().array()).any())
      throw std::invalid_argument("NestedBoxes: boxes must be increasing");
  }
}

NestedBoxes NestedBoxes::shrinking(const GridBox& box, int count) {
  if (count < 1) throw std::invalid_argument("NestedBoxes: count must be positive");
  std::vector<GridBox> boxes;
  for (int n = 1; n <= count; ++n) {
    boxes.push_back(n == count ? box : box.scaled(static_cast<double>(n) / count));
  }
  return NestedBoxes(std::move(boxes));
}

double sup_norm_on_points(const ScalarFunction& f, const ScalarFunction& g,
                          const std::vector<Vector>& points) {
  double sup = 0.0;
  for (const auto& x : points) {
    sup = std::max(sup, std::abs(finite_or_throw(f(x), x) - finite_or_throw(g(x), x)));
  }
  return sup;
}

double sup_norm_on_box(const ScalarFunction& f, const ScalarFunction& g, const GridBox& box) {
  return sup_norm_on_points(f, g, box.points());
}

namespace {

RudinDistance rudin_from_norms(const std::vector<double>& norms) {
  RudinDistance out;
  double weight = 1.0;
  for (double norm : norms) {
    weight *= 0.5;
    out.distance = std::max(out.distance, weight * norm / (1.0 + norm));
  }
  out.tail_bound = 0.5 * weight;
  return out;
}

}  // namespace

RudinDistance rudin_distance(const ScalarFunction& f, const ScalarFunction& g,
                             const NestedBoxes& nested) {
  std::vector<double> norms;
  for (const auto& box : nested.boxes()) norms.push_back(sup_norm_on_box(f, g, box));
  return rudin_from_norms(norms);
}

C2Distance c2_distance_on_points(const Objective& f, const Objective& g,
                                 const std::vector<Vector>& points) {
  C2Distance d;
  for (const auto& x : points) {
    const auto a = eval_or_throw(f(x), x);
    const auto b = eval_or_throw(g(x), x);
    d.d0 = std::max(d.d0, std::abs(a.value - b.value));
    d.d1 = std::max(d.d1, (a.gradient - b.gradient).cwiseAbs().maxCoeff());
    d.d2 = std::max(d.d2, (a.hessian - b.hessian).cwiseAbs().maxCoeff());
  }
  return d;
}

C2Distance c2_distance(const Objective& f, const Objective& g, const GridBox& box) {
  return c2_distance_on_points(f, g, box.points());
}

QuadraticForm quadratic_fit_at(const Objective& q, const Vector& delta0) {
  const auto e = eval_or_throw(q(delta0), delta0);
  const Matrix k = -symmetrized(e.hessian);
  const Vector z = e.gradient + k * delta0;
  const double u = e.value - z.dot(delta0) + 0.5 * delta0.dot(k * delta0);
  return QuadraticForm(u, z, k);
}

QuadraticityReport quadraticity_report(const Objective& q, const Vector& delta0,
                                       const GridBox& box, std::size_t cloud_points,
                                       std::uint64_t cloud_seed) {
  if (!box.contains(delta0))
    throw std::invalid_argument("quadraticity_report: delta0 must lie in the box");
  const Objective fit = as_objective(quadratic_fit_at(q, delta0));
  const bool use_grid = box.dim() <= 3;

  QuadraticityReport report;
  std::vector<Vector> points;
  if (use_grid) {
    points = box.points();
    report.points_per_axis = box.points_per_axis();
  } else {
    points = sample_points(box, cloud_points, cloud_seed);
  }
  report.points = points.size();

  const C2Distance d = c2_distance_on_points(q, fit, points);
  report.d0 = d.d0;
  report.d1 = d.d1;
  report.d2 = d.d2;

  const ScalarFunction qv = [&](const Vector& x) {
    return eval_or_throw(q(x), x).value;
  };
  const ScalarFunction fv = [&](const Vector& x) { return fit(x)->value; };
  const auto nested = NestedBoxes::shrinking(box);
  std::vector<double> norms;
  for (std::size_t n = 0; n < nested.boxes().size(); ++n) {
    const auto& b = nested.boxes()[n];
    if (use_grid) {
      norms.push_back(sup_norm_on_box(qv, fv, b));
    } else {
      // Same cloud contracted toward the center.
      const double factor = static_cast<double>(n + 1) / nested.boxes().size();
      const Vector c = box.center();
      std::vector<Vector> scaled;
      scaled.reserve(points.size());
      for (const auto& x : points) scaled.push_back(c + factor * (x - c));
      norms.push_back(sup_norm_on_points(qv, fv, scaled));
    }
  }
  const auto rudin = rudin_from_norms(norms);
  report.rudin = rudin.distance;
  report.rudin_tail_bound = rudin.tail_bound;
  return report;
}

}  // namespace quadlik
