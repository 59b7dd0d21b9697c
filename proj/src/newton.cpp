#include "quadlik/newton.hpp"

#include <cmath>
#include <stdexcept>

namespace quadlik {

namespace {

double grad_norm(const ObjectiveEval& e) {
  return e.gradient.size() ? e.gradient.cwiseAbs().maxCoeff() : 0.0;
}

bool finite(const ObjectiveEval& e) {
  return std::isfinite(e.value) && e.gradient.allFinite() && e.hessian.allFinite();
}

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr int kMaxShifts = 40;

}  // namespace

MaybeParam newton_step(const Objective& q, const MaybeParam& delta) {
  const auto e = evaluate(q, delta);
  if (!e || !finite(*e)) return MaybeParam::nao();
  const auto lower = cholesky_factor(-symmetrized(e->hessian));
  if (!lower) return MaybeParam::nao();
  return Vector(delta.value() + cholesky_solve(*lower, e->gradient));
}

double default_tolerance(double value_at_start) {
  return 1e-8 * (1.0 + std::abs(value_at_start));
}

NewtonResult newton_iterate(const Objective& q, const MaybeParam& delta0,
                            std::optional<double> tol, int max_steps) {
  NewtonResult out{MaybeParam::nao(), {}};
  if (delta0.is_nao()) return out;
  auto& trace = out.trace;

  MaybeParam current = delta0;
  auto e = evaluate(q, current);
  if (!e || !finite(*e)) return out;
  const double tolerance = tol.value_or(default_tolerance(e->value));

  trace.iterates.push_back(current);
  trace.values.push_back(e->value);
  trace.grad_norms.push_back(grad_norm(*e));
  while (true) {
    if (trace.grad_norms.back() <= tolerance) {
      trace.converged = true;
      out.estimate = current;
      return out;
    }
    if (trace.steps >= max_steps) return out;

    current = newton_step(q, current);
    ++trace.steps;
    trace.iterates.push_back(current);
    e = evaluate(q, current);
    if (current.is_nao() || !e || !finite(*e)) {
      // A NaO iterate ends the sequence; record it so steps = iterates − 1.
      trace.values.push_back(std::nan(""));
      trace.grad_norms.push_back(std::nan(""));
      return out;
    }
    trace.values.push_back(e->value);
    trace.grad_norms.push_back(grad_norm(*e));
  }
}

NewtonResult safeguarded_maximize(const Objective& q, const Vector& delta0,
                                  std::optional<double> tol, int max_steps) {
  auto e = q(delta0);
  if (!e || !finite(*e))
    throw std::invalid_argument("safeguarded_maximize: objective not finite at start");
  const double tolerance = tol.value_or(default_tolerance(e->value));

  NewtonResult out{MaybeParam(delta0), {}};
  auto& trace = out.trace;
  Vector current = delta0;
  trace.iterates.emplace_back(current);
  trace.values.push_back(e->value);
  trace.grad_norms.push_back(grad_norm(*e));

  while (true) {
    if (trace.grad_norms.back() <= tolerance) {
      trace.converged = true;
      break;
    }
    if (trace.steps >= max_steps) break;

    const Matrix h = -symmetrized(e->hessian);
    auto lower = cholesky_factor(h);
    if (!lower) {
      const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
      double lambda = std::max(1e-8 * scale, 1e-8 * scale - h.diagonal().minCoeff());
      const Matrix identity = Matrix::Identity(h.rows(), h.cols());
      for (int k = 0; k < kMaxShifts && !lower; ++k, lambda *= 10.0) {
        lower = cholesky_factor(h + lambda * identity);
      }
      if (!lower) break;
    }
    const Vector direction = cholesky_solve(*lower, e->gradient);
    const double slope = e->gradient.dot(direction);

    double t = 1.0;
    bool accepted = false;
    MaybeEval next;
    Vector candidate;
    for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
      candidate = current + t * direction;
      next = q(candidate);
      if (next && finite(*next) && next->value >= e->value + kArmijo * t * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    current = candidate;
    e = next;
    ++trace.steps;
    trace.iterates.emplace_back(current);
    trace.values.push_back(e->value);
    trace.grad_norms.push_back(grad_norm(*e));
  }
  out.estimate = MaybeParam(current);
  return out;
}

}  // namespace quadlik
