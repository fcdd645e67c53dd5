#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <memory>
#include <sstream>

#include "nehari/shapederiv.hpp"

namespace nehari {

/// Trajectory value on the deformed domain, computed by pullback quadrature
/// on the reference rectangle: the Rayleigh quotient nu(t) for the eigenvalue
/// problem, the Nehari-normalized energy m(t) for Lane-Emden.
inline double trajectory_value(const ProblemSpec& s, const DeformationField& field,
                               const QuadratureRule& rule, const ScalarField& v, double t) {
  const auto [A, B] = trajectory_integrals(s, field, rule, v, t);
  if (s.kind == ProblemKind::eigenvalue) {
    if (B <= 0.0) throw DegenerateTrajectoryError("trajectory_value: mass integral not positive");
    return A / B;
  }
  if (A <= 0.0 || B <= 0.0)
    throw DegenerateTrajectoryError("trajectory_value: degenerate Nehari trajectory");
  const double alpha = std::pow(A / B, 1.0 / (s.q - s.p));
  return std::pow(alpha, s.p) / s.p * A - std::pow(alpha, s.q) / s.q * B;
}

struct FdDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Central differences of the trajectory value with one Richardson
/// extrapolation. The corrector is expected gamma*-rescaled, so d2 matches
/// the line-optimized second_order.
inline FdDerivatives fd_trajectory_derivatives(const ProblemSpec& s,
                                               const DeformationField& field,
                                               const QuadratureRule& rule, const ScalarField& v,
                                               double step = 1e-3) {
  if (step < 1e-5 || step > 1e-2)
    throw PreconditionError("fd_trajectory_derivatives: step " + std::to_string(step) +
                            " outside [1e-5, 1e-2]");
  auto value = [&](double t) { return trajectory_value(s, field, rule, v, t); };
  const double v0 = value(0.0);
  auto stencil = [&](double h) {
    const double vp = value(h), vm = value(-h);
    return std::pair<double, double>{(vp - vm) / (2.0 * h), (vp - 2.0 * v0 + vm) / (h * h)};
  };
  const auto [d1a, d2a] = stencil(step);
  const auto [d1b, d2b] = stencil(0.5 * step);
  return {(4.0 * d1b - d1a) / 3.0, (4.0 * d2b - d2a) / 3.0};
}

/// Dirichlet form of the deformed domain pulled back to the fixed rectangle:
/// coefficients A = phi_t Psi_t Psi_t^T and weight phi_t, discretized with
/// bilinear elements on an nx x ny grid.
struct GridProblem {
  int nx = 129, ny = 129;
  double a = 1.0;
  double t = 0.0;
  DeformationField field = zero_deformation();
};

/// Smallest eigenvalue of the pulled-back form by shifted inverse power
/// iteration (shift 0, sparse Cholesky), tolerance on eigenvalue increments.
inline double grid_lambda1(const GridProblem& gp, double tol = 1e-10, int max_iter = 400) {
  if (gp.nx < 32 || gp.ny < 32)
    throw PreconditionError("grid_lambda1: grid must be at least 32 x 32");
  const int nx = gp.nx, ny = gp.ny;
  const double hx = 1.0 / (nx - 1), hy = 2.0 * gp.a / (ny - 1);
  const int mx = nx - 2, my = ny - 2;  // interior nodes
  const int n = mx * my;
  auto dof = [&](int i, int j) { return (i - 1) * my + (j - 1); };

  std::vector<Eigen::Triplet<double>> kt, mt;
  kt.reserve(static_cast<std::size_t>(n) * 9);
  mt.reserve(static_cast<std::size_t>(n) * 9);
  const double g1 = 0.5 - 0.5 / std::sqrt(3.0), g2 = 0.5 + 0.5 / std::sqrt(3.0);
  const double gauss[2] = {g1, g2};
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      const int nodes[4][2] = {{i, j}, {i + 1, j}, {i, j + 1}, {i + 1, j + 1}};
      double ke[4][4] = {}, me[4][4] = {};
      for (double xi : gauss) {
        for (double eta : gauss) {
          const double x = (i + xi) * hx;
          const double y = -gp.a + (j + eta) * hy;
          const auto pb = pullback_at(gp.field, x, y, gp.t);
          const Mat2 coef = pb.phi * pb.psi * pb.psi.transpose();
          const double w = 0.25 * hx * hy;
          const double shape[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta,
                                   xi * eta};
          const Vec2 grad[4] = {{-(1 - eta) / hx, -(1 - xi) / hy},
                                {(1 - eta) / hx, -xi / hy},
                                {-eta / hx, (1 - xi) / hy},
                                {eta / hx, xi / hy}};
          for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
              ke[r][c] += w * grad[r].dot(coef * grad[c]);
              me[r][c] += w * pb.phi * shape[r] * shape[c];
            }
        }
      }
      for (int r = 0; r < 4; ++r) {
        const int ri = nodes[r][0], rj = nodes[r][1];
        if (ri == 0 || ri == nx - 1 || rj == 0 || rj == ny - 1) continue;
        for (int c = 0; c < 4; ++c) {
          const int ci = nodes[c][0], cj = nodes[c][1];
          if (ci == 0 || ci == nx - 1 || cj == 0 || cj == ny - 1) continue;
          kt.emplace_back(dof(ri, rj), dof(ci, cj), ke[r][c]);
          mt.emplace_back(dof(ri, rj), dof(ci, cj), me[r][c]);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(n, n), M(n, n);
  K.setFromTriplets(kt.begin(), kt.end());
  M.setFromTriplets(mt.begin(), mt.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(K);
  if (solver.info() != Eigen::Success)
    throw SolverError("grid_lambda1: stiffness factorization failed");

  Eigen::VectorXd x(n);
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 1; j + 1 < ny; ++j)
      x[dof(i, j)] =
          std::sin(M_PI * i * hx) * std::cos(M_PI * (-gp.a + j * hy) / (2.0 * gp.a));
  x /= std::sqrt(x.dot(M * x));

  double lambda_prev = 0.0;
  std::ostringstream trace;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = solver.solve(M * x);
    x = y / std::sqrt(y.dot(M * y));
    const double lambda = x.dot(K * x);
    const double incr = std::abs(lambda - lambda_prev);
    if (it > 0 && incr <= tol) return lambda;
    lambda_prev = lambda;
    if (it >= max_iter - 5) trace << " it" << it << ": lambda=" << lambda << " incr=" << incr;
  }
  throw ConvergenceError("grid_lambda1: power iteration stagnated;" + trace.str());
}

/// Discrete Lane-Emden ground state (p = 2): -Delta u = |u|^{q-2} u with the
/// 5-point stencil, plus the measured residual and Nehari defect of the
/// returned iterate.
struct GroundStateSolution {
  int nx = 0, ny = 0;
  double a = 1.0, q = 4.0;
  std::vector<double> values;  // row-major i*ny + j, boundary zeros
  double residual_inf = 0.0;
  double nehari_defect = 0.0;  // relative
  double energy = 0.0;
  int newton_iterations = 0;
  int restarts = 0;

  ScalarField interpolant() const;
};

namespace detail {

/// Strong-form residual -Delta_h u - |u|^{q-2} u on interior nodes, evaluated
/// in the scalar type of the iterate.
template <class T>
void lane_emden_residual(const std::vector<T>& u, int nx, int ny, T ihx2, T ihy2, double q,
                         std::vector<T>& r) {
  const int my = ny - 2;
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 1; j + 1 < ny; ++j) {
      const T uc = u[i * ny + j];
      const T lap = (2 * uc - u[(i - 1) * ny + j] - u[(i + 1) * ny + j]) * ihx2 +
                    (2 * uc - u[i * ny + j - 1] - u[i * ny + j + 1]) * ihy2;
      const T nl = q == 4.0 ? uc * uc * uc : T(std::pow(std::abs((double)uc), q - 2.0)) * uc;
      r[(i - 1) * my + (j - 1)] = lap - nl;
    }
  }
}

template <class T>
T lane_emden_dirichlet(const std::vector<T>& u, int nx, int ny, T ihx2, T ihy2) {
  // u' A u with A the 5-point stiffness: sum of squared differences.
  T s = 0;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const T d = u[(i + 1) * ny + j] - u[i * ny + j];
      s += d * d * ihx2;
    }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j + 1 < ny; ++j) {
      const T d = u[i * ny + j + 1] - u[i * ny + j];
      s += d * d * ihy2;
    }
  return s;
}

template <class T>
T lane_emden_mass(const std::vector<T>& u, double q) {
  T s = 0;
  for (const T& v : u) s += q == 4.0 ? v * v * v * v : T(std::pow(std::abs((double)v), q));
  return s;
}

}  // namespace detail

inline GroundStateSolution lane_emden_ground_state(double q, double a, int nx, int ny) {
  if (q <= 2.0) throw DomainError("lane_emden_ground_state: q must exceed 2");
  if (nx < 17 || ny < 17) throw PreconditionError("lane_emden_ground_state: grid too coarse");
  const double hx = 1.0 / (nx - 1), hy = 2.0 * a / (ny - 1);
  const double ihx2 = 1.0 / (hx * hx), ihy2 = 1.0 / (hy * hy);
  const int my = ny - 2;
  const int n = (nx - 2) * my;
  auto dof = [&](int i, int j) { return (i - 1) * my + (j - 1); };

  // 5-point stiffness on interior unknowns.
  std::vector<Eigen::Triplet<double>> at;
  at.reserve(static_cast<std::size_t>(n) * 5);
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 1; j + 1 < ny; ++j) {
      const int d = dof(i, j);
      at.emplace_back(d, d, 2.0 * ihx2 + 2.0 * ihy2);
      if (i > 1) at.emplace_back(d, dof(i - 1, j), -ihx2);
      if (i + 2 < nx) at.emplace_back(d, dof(i + 1, j), -ihx2);
      if (j > 1) at.emplace_back(d, dof(i, j - 1), -ihy2);
      if (j + 2 < ny) at.emplace_back(d, dof(i, j + 1), -ihy2);
    }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(at.begin(), at.end());

  std::vector<double> u(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int i = 1; i + 1 < nx; ++i)
    for (int j = 1; j + 1 < ny; ++j)
      u[i * ny + j] = std::sin(M_PI * i * hx) * std::cos(M_PI * (-a + j * hy) / (2.0 * a));

  auto vec_of = [&](const std::vector<double>& g) {
    Eigen::VectorXd v(n);
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) v[dof(i, j)] = g[i * ny + j];
    return v;
  };
  auto grid_of = [&](const Eigen::VectorXd& v, std::vector<double>& g) {
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) g[i * ny + j] = v[dof(i, j)];
  };
  auto nehari_project = [&](std::vector<double>& g) {
    const double d = detail::lane_emden_dirichlet(g, nx, ny, ihx2, ihy2);
    const double m = detail::lane_emden_mass(g, q);
    const double alpha = std::pow(d / m, 1.0 / (q - 2.0));
    for (auto& v : g) v *= alpha;
  };
  auto nonlinearity = [&](const std::vector<double>& g) {
    Eigen::VectorXd f(n);
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) {
        const double v = g[i * ny + j];
        f[dof(i, j)] = q == 4.0 ? v * v * v : std::pow(std::abs(v), q - 2.0) * v;
      }
    return f;
  };

  nehari_project(u);

  // Nehari-projected descent in the H^1_0 metric: u <- u + tau (A^{-1} f(u) - u).
  {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    if (chol.info() != Eigen::Success)
      throw SolverError("lane_emden_ground_state: stiffness factorization failed");
    for (int it = 0; it < 10; ++it) {
      const Eigen::VectorXd w = chol.solve(nonlinearity(u));
      Eigen::VectorXd cur = vec_of(u);
      cur += 0.5 * (w - cur);
      grid_of(cur, u);
      nehari_project(u);
    }
  }

  GroundStateSolution sol;
  sol.nx = nx;
  sol.ny = ny;
  sol.a = a;
  sol.q = q;

  // Damped Newton on the discrete residual.
  std::vector<double> r(n);
  std::ostringstream trace;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  double res_norm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 60; ++it) {
    detail::lane_emden_residual(u, nx, ny, ihx2, ihy2, q, r);
    Eigen::Map<Eigen::VectorXd> rv(r.data(), n);
    res_norm = rv.lpNorm<Eigen::Infinity>();
    if (res_norm < 1e-12) {
      sol.newton_iterations = it;
      break;
    }
    Eigen::SparseMatrix<double> J = A;
    std::vector<Eigen::Triplet<double>> dt;
    dt.reserve(n);
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) {
        const double v = u[i * ny + j];
        const double fp =
            q == 4.0 ? 3.0 * v * v : (q - 1.0) * std::pow(std::abs(v), q - 2.0);
        dt.emplace_back(dof(i, j), dof(i, j), -fp);
      }
    Eigen::SparseMatrix<double> D(n, n);
    D.setFromTriplets(dt.begin(), dt.end());
    J += D;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw SolverError("lane_emden_ground_state: Jacobian factorization failed" + trace.str());
    const Eigen::VectorXd delta = lu.solve(-rv);

    double s = 1.0;
    std::vector<double> trial = u;
    bool accepted = false;
    const double umax = *std::max_element(u.begin(), u.end());
    while (s >= 1.0 / 64.0) {
      trial = u;
      for (int i = 1; i + 1 < nx; ++i)
        for (int j = 1; j + 1 < ny; ++j) trial[i * ny + j] += s * delta[dof(i, j)];
      const double tmin = *std::min_element(trial.begin(), trial.end());
      if (tmin < -1e-8 * umax) {
        trace << " [it " << it << " s=" << s << ": sign change]";
        s *= 0.5;
        continue;
      }
      std::vector<double> rt(n);
      detail::lane_emden_residual(trial, nx, ny, ihx2, ihy2, q, rt);
      const double rn = Eigen::Map<Eigen::VectorXd>(rt.data(), n).lpNorm<Eigen::Infinity>();
      if (rn <= (1.0 - 0.25 * s) * res_norm || rn < 1e-9) {
        accepted = true;
        u = trial;
        break;
      }
      trace << " [it " << it << " s=" << s << ": residual " << rn << " vs " << res_norm << "]";
      s *= 0.5;
    }
    if (!accepted) {
      if (sol.restarts >= 3)
        throw SolverError("lane_emden_ground_state: Newton stalled; damping trace:" +
                          trace.str());
      // Projection restart from the positive part.
      ++sol.restarts;
      for (auto& v : u) v = std::max(v, 0.0);
      nehari_project(u);
    }
    sol.newton_iterations = it + 1;
  }

  // Extended-precision polish: the double-precision residual floor sits near
  // ||J|| * eps * ||u||, which is above the target at fine grids.
  std::vector<long double> uld(u.begin(), u.end());
  const long double lihx2 = (long double)ihx2, lihy2 = (long double)ihy2;
  std::vector<long double> rld(n);
  for (int pass = 0; pass < 4; ++pass) {
    detail::lane_emden_residual(uld, nx, ny, lihx2, lihy2, q, rld);
    Eigen::VectorXd rd(n);
    for (int i = 0; i < n; ++i) rd[i] = (double)rld[i];
    const Eigen::VectorXd delta = lu.solve(-rd);
    for (int i = 1; i + 1 < nx; ++i)
      for (int j = 1; j + 1 < ny; ++j) uld[i * ny + j] += (long double)delta[dof(i, j)];
  }
  // Final Nehari projection, performed in extended precision so the discrete
  // manifold identity holds to rounding.
  {
    const long double d = detail::lane_emden_dirichlet(uld, nx, ny, lihx2, lihy2);
    const long double m = detail::lane_emden_mass(uld, q);
    const long double alpha = powl(d / m, (long double)(1.0 / (q - 2.0)));
    for (auto& v : uld) v *= alpha;
  }
  detail::lane_emden_residual(uld, nx, ny, lihx2, lihy2, q, rld);
  long double rinf = 0;
  for (const auto& v : rld) rinf = std::max(rinf, fabsl(v));
  const long double d = detail::lane_emden_dirichlet(uld, nx, ny, lihx2, lihy2);
  const long double m = detail::lane_emden_mass(uld, q);
  sol.residual_inf = (double)rinf;
  sol.nehari_defect = (double)(fabsl(d - m) / m);
  sol.energy = (double)((0.5L * d - m / (long double)q) * (long double)(hx * hy));
  sol.values.assign(uld.begin(), uld.end());
  return sol;
}

namespace detail {

/// Catmull-Rom weights and their derivatives on one axis.
inline void catmull_rom(double xi, double w[4], double dw[4]) {
  const double x2 = xi * xi, x3 = x2 * xi;
  w[0] = 0.5 * (-xi + 2.0 * x2 - x3);
  w[1] = 0.5 * (2.0 - 5.0 * x2 + 3.0 * x3);
  w[2] = 0.5 * (xi + 4.0 * x2 - 3.0 * x3);
  w[3] = 0.5 * (x3 - x2);
  dw[0] = 0.5 * (-1.0 + 4.0 * xi - 3.0 * x2);
  dw[1] = 0.5 * (-10.0 * xi + 9.0 * x2);
  dw[2] = 0.5 * (1.0 + 8.0 * xi - 9.0 * x2);
  dw[3] = 0.5 * (3.0 * x2 - 2.0 * xi);
}

struct GridInterpolant {
  std::shared_ptr<const std::vector<double>> values;
  int nx, ny;
  double a, hx, hy;

  /// Odd reflection through the Dirichlet boundary keeps the interpolant
  /// consistent with u = 0 there.
  double at(int i, int j) const {
    if (i < 0) return -at(-i, j);
    if (i >= nx) return -at(2 * (nx - 1) - i, j);
    if (j < 0) return -at(i, -j);
    if (j >= ny) return -at(i, 2 * (ny - 1) - j);
    return (*values)[i * ny + j];
  }

  void locate(double s, int n, int& cell, double& xi) const {
    cell = static_cast<int>(std::floor(s));
    cell = std::max(0, std::min(cell, n - 2));
    xi = s - cell;
  }

  template <bool WithGradient>
  void eval(double x, double y, double& val, Vec2& grad) const {
    int ci, cj;
    double xi, eta;
    locate(x / hx, nx, ci, xi);
    locate((y + a) / hy, ny, cj, eta);
    double wx[4], dwx[4], wy[4], dwy[4];
    catmull_rom(xi, wx, dwx);
    catmull_rom(eta, wy, dwy);
    val = 0.0;
    grad.setZero();
    for (int p = 0; p < 4; ++p) {
      const int i = ci - 1 + p;
      double row = 0.0, drow = 0.0;
      for (int r = 0; r < 4; ++r) {
        const double v = at(i, cj - 1 + r);
        row += wy[r] * v;
        if constexpr (WithGradient) drow += dwy[r] * v;
      }
      val += wx[p] * row;
      if constexpr (WithGradient) {
        grad(0) += dwx[p] * row;
        grad(1) += wx[p] * drow;
      }
    }
    if constexpr (WithGradient) {
      grad(0) /= hx;
      grad(1) /= hy;
    }
  }
};

}  // namespace detail

inline ScalarField GroundStateSolution::interpolant() const {
  auto interp = std::make_shared<detail::GridInterpolant>();
  interp->values = std::make_shared<const std::vector<double>>(values);
  interp->nx = nx;
  interp->ny = ny;
  interp->a = a;
  interp->hx = 1.0 / (nx - 1);
  interp->hy = 2.0 * a / (ny - 1);
  ScalarField out;
  out.value = [interp](double x, double y) {
    double v;
    Vec2 g;
    interp->eval<false>(x, y, v, g);
    return v;
  };
  out.gradient = [interp](double x, double y) {
    double v;
    Vec2 g;
    interp->eval<true>(x, y, v, g);
    return g;
  };
  return out;
}

}  // namespace nehari
