#pragma once

#include "nehari/kinematics.hpp"
#include "nehari/quadrature.hpp"

namespace nehari {

enum class ProblemKind { eigenvalue, lane_emden };

/// Problem description: the energy's exponents, the ground state u, and the
/// critical level (lambda_1 for the eigenvalue problem, E_0[u] for the
/// Lane-Emden energy).
struct ProblemSpec {
  ProblemKind kind = ProblemKind::eigenvalue;
  double p = 2.0;
  double q = 0.0;  // lane_emden only
  ScalarField u;
  double level = 0.0;
};

namespace detail {

constexpr double kGradEps = 1e-14;

inline double pow_abs(double s, double e) { return std::pow(std::abs(s), e); }

/// |s|^(e-2) * s, with the e = 2 case short-circuited.
inline double odd_power(double s, double e) {
  return e == 2.0 ? s : pow_abs(s, e - 2.0) * s;
}

/// Factors of the Lagrangian derivatives at one node. Where |Du| falls below
/// kGradEps and p > 2 the degenerate factors are defined as 0: the full
/// products they multiply vanish in the limit.
struct Lag {
  double L;     // L(u, Du)
  double Lu;    // dL/du
  double gpm2;  // |Du|^(p-2)
  double c4;    // (p-2) |Du|^(p-4), used only against (Du,.)(Du,.) pairs
  double luu;   // d2L/du2
};

inline Lag lagrangian(const ProblemSpec& s, double uv, const Vec2& du) {
  const double p = s.p;
  const double g2 = du.squaredNorm();
  Lag out{};
  double gp;  // |Du|^p
  if (p == 2.0) {
    out.gpm2 = 1.0;
    out.c4 = 0.0;
    gp = g2;
  } else {
    const double gn = std::sqrt(g2);
    if (gn < kGradEps) {
      out.gpm2 = 0.0;
      out.c4 = 0.0;
      gp = 0.0;
    } else {
      out.gpm2 = std::pow(gn, p - 2.0);
      out.c4 = (p - 2.0) * std::pow(gn, p - 4.0);
      gp = out.gpm2 * g2;
    }
  }
  if (s.kind == ProblemKind::eigenvalue) {
    out.L = gp / p - s.level * pow_abs(uv, p) / p;
    out.Lu = -s.level * odd_power(uv, p);
    out.luu = -(p - 1.0) * s.level * (p == 2.0 ? 1.0 : pow_abs(uv, p - 2.0));
  } else {
    const double q = s.q;
    out.L = gp / p - pow_abs(uv, q) / q;
    out.Lu = -odd_power(uv, q);
    out.luu = -(q - 1.0) * (q == 2.0 ? 1.0 : pow_abs(uv, q - 2.0));
  }
  return out;
}

}  // namespace detail

/// Integral of |u|^p (eigenvalue) or |u|^q (lane_emden): the normalization
/// mass appearing in the derivative formulas.
inline double ground_mass(const ProblemSpec& s, const QuadratureRule& rule) {
  const double e = s.kind == ProblemKind::eigenvalue ? s.p : s.q;
  return rule.integrate(
      [&](double x, double y) { return detail::pow_abs(s.u.value(x, y), e); });
}

/// Second-variation bilinear form <g,h>_0 = E_0''[u](g,h).
inline double inner0(const ProblemSpec& s, const QuadratureRule& rule, const ScalarField& g,
                     const ScalarField& h) {
  return rule.integrate([&](double x, double y) {
    const double uv = s.u.value(x, y);
    const Vec2 du = s.u.gradient(x, y);
    const auto lag = detail::lagrangian(s, uv, du);
    const Vec2 dg = g.gradient(x, y);
    const Vec2 dh = h.gradient(x, y);
    return lag.gpm2 * dg.dot(dh) + lag.c4 * du.dot(dg) * du.dot(dh) +
           lag.luu * g.value(x, y) * h.value(x, y);
  });
}

/// Deformation coupling functional Q[h]: the terms of the second derivative
/// where exactly one t-derivative lands on phi_t or Psi_t.
inline double q_functional(const ProblemSpec& s, const DeformationField& field,
                           const QuadratureRule& rule, const ScalarField& h) {
  return rule.integrate([&](double x, double y) {
    const double uv = s.u.value(x, y);
    const Vec2 du = s.u.gradient(x, y);
    const auto lag = detail::lagrangian(s, uv, du);
    const Mat2 dr = field.dr(x, y);
    const double div_r = dr.trace();
    const Vec2 dh = h.gradient(x, y);
    const Vec2 du_dr = dr.transpose() * du;  // Du . DR (row-vector convention)
    const Vec2 dh_dr = dr.transpose() * dh;
    return -(lag.gpm2 * dh.dot(du_dr) + lag.c4 * du.dot(dh) * du.dot(du_dr)) -
           lag.gpm2 * du.dot(dh_dr) + lag.gpm2 * du.dot(dh) * div_r +
           lag.Lu * h.value(x, y) * div_r;
  });
}

/// Trajectory integrals A(t) = int |D(u+tv).Psi_t|^p phi_t and
/// B(t) = int |u+tv|^e phi_t with e = q (lane_emden) or p (eigenvalue).
struct TrajectoryIntegrals {
  double A, B;
};

inline TrajectoryIntegrals trajectory_integrals(const ProblemSpec& s,
                                                const DeformationField& field,
                                                const QuadratureRule& rule,
                                                const ScalarField& v, double t) {
  const double e = s.kind == ProblemKind::lane_emden ? s.q : s.p;
  const double A = rule.integrate([&](double x, double y) {
    const auto pb = pullback_at(field, x, y, t);
    const Vec2 g = s.u.gradient(x, y) + t * v.gradient(x, y);
    const Vec2 gp = pb.psi.transpose() * g;
    return std::pow(gp.squaredNorm(), 0.5 * s.p) * pb.phi;
  });
  const double B = rule.integrate([&](double x, double y) {
    const auto pb = pullback_at(field, x, y, t);
    return detail::pow_abs(s.u.value(x, y) + t * v.value(x, y), e) * pb.phi;
  });
  return {A, B};
}

/// Nehari normalization coefficient for the Lane-Emden trajectory:
/// alpha_t = (A/B)^(1/(q-p)), so that alpha_t (u+tv) o Phi_t^{-1} lies on
/// N(Omega_t).
inline double nehari_alpha(const ProblemSpec& s, const DeformationField& field,
                           const QuadratureRule& rule, const ScalarField& v, double t) {
  if (s.kind != ProblemKind::lane_emden)
    throw PreconditionError("nehari_alpha: requires a lane_emden spec");
  const auto [A, B] = trajectory_integrals(s, field, rule, v, t);
  if (A <= 0.0)
    throw DegenerateTrajectoryError("nehari_alpha: A(t) = " + std::to_string(A) +
                                    " is not positive");
  if (B <= 0.0)
    throw DegenerateTrajectoryError("nehari_alpha: B(t) = " + std::to_string(B) +
                                    " is not positive");
  return std::pow(A / B, 1.0 / (s.q - s.p));
}

/// <u,v>_0-orthogonal part of v, the combination the second-derivative
/// theorem actually depends on. Returns the projected field and the removed
/// coefficient <u,v>_0 / <u,u>_0.
inline std::pair<ScalarField, double> project_out_ground(const ProblemSpec& s,
                                                         const QuadratureRule& rule,
                                                         const ScalarField& v) {
  const double uv = inner0(s, rule, s.u, v);
  const double uu = inner0(s, rule, s.u, s.u);
  if (uu == 0.0) throw InvariantViolation("project_out_ground: <u,u>_0 = 0");
  const double c = uv / uu;
  return {axpy(v, -c, s.u), c};
}

/// Validated eigenvalue spec: u must satisfy the Rayleigh identity
/// int |Du|^p = level * int |u|^p.
inline ProblemSpec make_eigenvalue_spec(ScalarField u, double p, double level,
                                        const QuadratureRule& rule, double tol = 1e-8) {
  if (p < 2.0) throw DomainError("make_eigenvalue_spec: p must be >= 2");
  ProblemSpec s;
  s.kind = ProblemKind::eigenvalue;
  s.p = p;
  s.u = std::move(u);
  s.level = level;
  const double dirichlet = rule.integrate([&](double x, double y) {
    return std::pow(s.u.gradient(x, y).squaredNorm(), 0.5 * p);
  });
  const double mass = ground_mass(s, rule);
  if (!nearly_equal(dirichlet, level * mass, tol))
    throw InvariantViolation("make_eigenvalue_spec: u is not an eigenfunction at level " +
                             std::to_string(level) + " (Rayleigh defect " +
                             std::to_string(dirichlet - level * mass) + ")");
  return s;
}

/// Validated Lane-Emden spec: u must lie on the Nehari manifold,
/// int |Du|^p = int |u|^q, within manifold_tol (relative).
inline ProblemSpec make_lane_emden_spec(ScalarField u, double p, double q,
                                        const QuadratureRule& rule,
                                        double manifold_tol = 1e-8) {
  if (p < 2.0) throw DomainError("make_lane_emden_spec: p must be >= 2");
  if (q < 2.0) throw DomainError("make_lane_emden_spec: q must be >= 2");
  if (q == p) throw DomainError("make_lane_emden_spec: q must differ from p");
  ProblemSpec s;
  s.kind = ProblemKind::lane_emden;
  s.p = p;
  s.q = q;
  s.u = std::move(u);
  const double dirichlet = rule.integrate([&](double x, double y) {
    return std::pow(s.u.gradient(x, y).squaredNorm(), 0.5 * p);
  });
  const double mass = ground_mass(s, rule);
  if (!nearly_equal(dirichlet, mass, manifold_tol))
    throw InvariantViolation("make_lane_emden_spec: u is off the Nehari manifold (defect " +
                             std::to_string((dirichlet - mass) / mass) + " relative)");
  s.level = dirichlet / p - mass / q;
  return s;
}

}  // namespace nehari
