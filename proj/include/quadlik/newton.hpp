#pragma once

#include "quadlik/core.hpp"

#include <optional>
#include <vector>

namespace quadlik {

struct NewtonTrace {
  std::vector<MaybeParam> iterates;
  std::vector<double> grad_norms;
  std::vector<double> values;
  bool converged = false;
  int steps = 0;
};

struct NewtonResult {
  MaybeParam estimate;
  NewtonTrace trace;
};

/// δ + (−∇²q(δ))⁻¹∇q(δ) when −∇²q(δ) passes the pivot test, NaO otherwise.
MaybeParam newton_step(const Objective& q, const MaybeParam& delta);

/// Default gradient tolerance: 1e-8 · (1 + |q(δ0)|).
double default_tolerance(double value_at_start);

/// Plain Newton iterated until ‖∇q‖∞ ≤ tol. Returns NaO when a step is NaO
/// or max_steps is exhausted.
NewtonResult newton_iterate(const Objective& q, const MaybeParam& delta0,
                            std::optional<double> tol = std::nullopt,
                            int max_steps = 100);

/// Newton with a λI Hessian shift and Armijo backtracking. Objective values
/// along the trace never decrease. Returns the last iterate (converged or
/// not); throws std::invalid_argument when q is NaO or non-finite at δ0.
NewtonResult safeguarded_maximize(const Objective& q, const Vector& delta0,
                                  std::optional<double> tol = std::nullopt,
                                  int max_steps = 100);

}  // namespace quadlik
