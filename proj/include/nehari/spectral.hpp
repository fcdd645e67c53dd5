#pragma once

#include "nehari/fields.hpp"

namespace nehari {

/// First Dirichlet eigenvalue of the Laplacian on (0,1) x (-a,a).
inline double lambda1(double a) {
  if (a <= 0.0) throw DomainError("lambda1: a must be positive, got " + std::to_string(a));
  const double h = M_PI / (2.0 * a);
  return M_PI * M_PI + h * h;
}

inline double lambda_mk(int m, int k, double a) {
  if (m < 1 || k < 1) throw IndexError("lambda_mk: indices must be >= 1");
  if (a <= 0.0) throw DomainError("lambda_mk: a must be positive");
  const double kh = k * M_PI / (2.0 * a);
  return m * m * M_PI * M_PI + kh * kh;
}

/// Normalized eigenfunction: sqrt(2/a) sin(m pi x) * cos(k pi y / 2a) for odd
/// k, sine branch for even k.
inline ScalarField eigenfunction(int m, int k, double a) {
  if (m < 1 || k < 1) throw IndexError("eigenfunction: indices must be >= 1");
  if (a <= 0.0) throw DomainError("eigenfunction: a must be positive");
  const double c = std::sqrt(2.0 / a);
  const double mx = m * M_PI;
  const double ky = k * M_PI / (2.0 * a);
  const bool odd_k = (k % 2 == 1);
  ScalarField out;
  out.value = [=](double x, double y) {
    const double sy = odd_k ? std::cos(ky * y) : std::sin(ky * y);
    return c * std::sin(mx * x) * sy;
  };
  out.gradient = [=](double x, double y) {
    const double sy = odd_k ? std::cos(ky * y) : std::sin(ky * y);
    const double dy = odd_k ? -ky * std::sin(ky * y) : ky * std::cos(ky * y);
    return Vec2{c * mx * std::cos(mx * x) * sy, c * std::sin(mx * x) * dy};
  };
  return out;
}

/// Unnormalized ground state u = sin(pi x) cos(pi y / 2a), with the Hessian
/// entries the optimal-corrector right-hand side needs.
inline ScalarField ground_state(double a) {
  if (a <= 0.0) throw DomainError("ground_state: a must be positive");
  const double ky = M_PI / (2.0 * a);
  ScalarField out;
  out.value = [=](double x, double y) { return std::sin(M_PI * x) * std::cos(ky * y); };
  out.gradient = [=](double x, double y) {
    return Vec2{M_PI * std::cos(M_PI * x) * std::cos(ky * y),
                -ky * std::sin(M_PI * x) * std::sin(ky * y)};
  };
  out.hessian = [=](double x, double y) {
    return Hessian2{-M_PI * M_PI * std::sin(M_PI * x) * std::cos(ky * y),
                    -M_PI * ky * std::cos(M_PI * x) * std::sin(ky * y)};
  };
  return out;
}

}  // namespace nehari
