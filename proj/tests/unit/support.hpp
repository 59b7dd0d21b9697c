#pragma once

#include "quadlik/core.hpp"
#include "quadlik/rng.hpp"

#include <doctest.h>

#include <cmath>

namespace qt {

using quadlik::Matrix;
using quadlik::Vector;

inline Vector random_vector(int p, quadlik::Rng& rng, double scale = 1.0) {
  Vector v(p);
  for (int i = 0; i < p; ++i) v(i) = scale * rng.normal();
  return v;
}

// Random SPD matrix with eigenvalues roughly in [0.5, 5].
inline Matrix random_spd(int p, quadlik::Rng& rng) {
  Matrix g(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
  Matrix k = g * g.transpose() / p + 0.5 * Matrix::Identity(p, p);
  return 0.5 * (k + k.transpose());
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// Central differences of the value and of the gradient.
struct FiniteDiff {
  Vector gradient;
  Matrix hessian;
};

inline FiniteDiff finite_diff(const quadlik::Objective& f, const Vector& x, double h = 1e-5) {
  const int p = static_cast<int>(x.size());
  FiniteDiff out{Vector(p), Matrix(p, p)};
  for (int i = 0; i < p; ++i) {
    Vector up = x, dn = x;
    up(i) += h;
    dn(i) -= h;
    const auto fu = f(up);
    const auto fd = f(dn);
    REQUIRE(fu);
    REQUIRE(fd);
    out.gradient(i) = (fu->value - fd->value) / (2 * h);
    out.hessian.col(i) = (fu->gradient - fd->gradient) / (2 * h);
  }
  return out;
}

}  // namespace qt
