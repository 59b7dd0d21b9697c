#pragma once

#include "quadlik/core.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

// Distances between realized log likelihoods viewed as elements of C(W) and
// C²(W). Sup norms are taken over finite point sets, so every distance here
// is a lower bound to the true sup over the compact set.

namespace quadlik {

using ScalarFunction = std::function<double(const Vector&)>;

/// Non-finite (or NaO) evaluation at a grid point.
class GridEvaluationError : public std::runtime_error {
 public:
  GridEvaluationError(const std::string& what, Vector point);
  const Vector& point() const { return point_; }

 private:
  Vector point_;
};

/// Compact box [lower, upper] discretized with points_per_axis points per axis.
class GridBox {
 public:
  GridBox(Vector lower, Vector upper, std::vector<int> points_per_axis);

  /// 33 points per axis for p ≤ 2, 9 for p = 3; throws for p > 3.
  static GridBox with_default_resolution(Vector lower, Vector upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const std::vector<int>& points_per_axis() const { return points_; }
  std::size_t size() const;

  Vector center() const { return 0.5 * (lower_ + upper_); }
  bool contains(const Vector& x) const;

  /// Grid points, row-major over axes. Endpoints included when an axis has
  /// at least two points; a single point sits at the axis midpoint.
  std::vector<Vector> points() const;

  /// Same box with each axis interval count doubled (n → 2n − 1 points), so
  /// the old grid is a subset of the new one.
  GridBox refined() const;

  /// Box scaled about its center by `factor`, same resolution.
  GridBox scaled(double factor) const;

 private:
  Vector lower_;
  Vector upper_;
  std::vector<int> points_;
};

/// Uniform point cloud on the box, for dimensions where grids are too large.
std::vector<Vector> sample_points(const GridBox& box, std::size_t count,
                                  std::uint64_t seed);

/// Increasing sequence of compact boxes B_1 ⊆ B_2 ⊆ ... ⊆ B_N.
class NestedBoxes {
 public:
  explicit NestedBoxes(std::vector<GridBox> boxes);

  /// B_n = box scaled about its center by n/N, n = 1..N.
  static NestedBoxes shrinking(const GridBox& box, int count = 8);

  const std::vector<GridBox>& boxes() const { return boxes_; }

 private:
  std::vector<GridBox> boxes_;
};

double sup_norm_on_points(const ScalarFunction& f, const ScalarFunction& g,
                          const std::vector<Vector>& points);
double sup_norm_on_box(const ScalarFunction& f, const ScalarFunction& g,
                       const GridBox& box);

struct RudinDistance {
  double distance = 0.0;
  /// Bound on every omitted term n > N of the infinite max.
  double tail_bound = 0.0;
};

/// max_n 2⁻ⁿ‖f − g‖_{B_n} / (1 + ‖f − g‖_{B_n}), n = 1..N.
RudinDistance rudin_distance(const ScalarFunction& f, const ScalarFunction& g,
                             const NestedBoxes& nested);

struct C2Distance {
  double d0 = 0.0;  // values
  double d1 = 0.0;  // gradients, max-abs component
  double d2 = 0.0;  // Hessians, max-abs entry
};

C2Distance c2_distance_on_points(const Objective& f, const Objective& g,
                                 const std::vector<Vector>& points);
C2Distance c2_distance(const Objective& f, const Objective& g, const GridBox& box);

/// Second-order Taylor quadratic of q at delta0.
QuadraticForm quadratic_fit_at(const Objective& q, const Vector& delta0);

struct QuadraticityReport {
  double d0 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double rudin = 0.0;
  double rudin_tail_bound = 0.0;
  std::size_t points = 0;
  std::vector<int> points_per_axis;  // empty when a point cloud was used
};

/// Distance of q from its Taylor quadratic at delta0 over the box. For
/// p > 3 a uniform cloud of `cloud_points` points (seeded) replaces the grid.
QuadraticityReport quadraticity_report(const Objective& q, const Vector& delta0,
                                       const GridBox& box,
                                       std::size_t cloud_points = 10000,
                                       std::uint64_t cloud_seed = 0);

}  // namespace quadlik
