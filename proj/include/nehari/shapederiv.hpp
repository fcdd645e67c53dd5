#pragma once

#include <limits>
#include <map>

#include "nehari/corrector.hpp"

namespace nehari {

enum class FastPath { generic, one_dimensional, planar };

inline std::string to_string(FastPath fp) {
  switch (fp) {
    case FastPath::one_dimensional: return "one_dimensional";
    case FastPath::planar: return "planar";
    default: return "generic";
  }
}

/// Term-by-term result of the second-order assembly. `terms` holds the signed
/// contributions of every named integral; their sum times the problem scaling
/// reproduces second_order for each assembly route.
struct DerivativeReport {
  double first_order = 0.0;
  double second_order = 0.0;
  double q_u = 0.0;
  double q_v = 0.0;
  double vv0 = 0.0;
  double gamma_star = 0.0;
  double uu0 = 0.0;  // lane_emden only
  double uv0 = 0.0;  // projection coefficient numerator, lane_emden only
  FastPath fast_path = FastPath::generic;
  bool degenerate_corrector = false;
  bool fd_jacobian = false;
  std::string corrector_id;
  std::map<std::string, double> terms;
};

struct SecondOrderOptions {
  double first_order_tol = 1e-8;
  /// |<v,v>_0| at or below this is treated as the degenerate case.
  double vv_tol = 1e-12;
  double qv_tol = 1e-10;
};

/// dm(0) = int L div R - int (D_z L, Du . DR); the eigenvalue problem scales
/// the same bracket by p / int |u|^p.
inline double first_order(const ProblemSpec& s, const DeformationField& field,
                          const QuadratureRule& rule) {
  const double bracket = rule.integrate([&](double x, double y) {
    const double uv = s.u.value(x, y);
    const Vec2 du = s.u.gradient(x, y);
    const auto lag = detail::lagrangian(s, uv, du);
    const Mat2 dr = field.dr(x, y);
    const Vec2 du_dr = dr.transpose() * du;
    return lag.L * dr.trace() - lag.gpm2 * du.dot(du_dr);
  });
  if (s.kind == ProblemKind::eigenvalue) return s.p * bracket / ground_mass(s, rule);
  return bracket;
}

/// Pohozaev boundary form of the first derivative on the rectangle:
/// -(p-1)/int|u|^p * int_boundary |Du|^p (R,n) dsigma.
inline double pohozaev_first_order(const ProblemSpec& s, const DeformationField& field,
                                   const QuadratureRule& rule) {
  if (s.kind != ProblemKind::eigenvalue)
    throw PreconditionError("pohozaev_first_order: requires an eigenvalue spec");
  const double mass = ground_mass(s, rule);
  const double edge = boundary_integrate(
      rule.a(), std::max(rule.panels_x(), rule.panels_y()), rule.order(),
      [&](double x, double y, double nx, double ny) {
        const Vec2 du = s.u.gradient(x, y);
        const Vec2 r = field.r(x, y);
        return std::pow(du.squaredNorm(), 0.5 * s.p) * (r(0) * nx + r(1) * ny);
      });
  return -(s.p - 1.0) / mass * edge;
}

/// Closed-form value of int u_x^2 (f' theta)^2 + int u_x^2 (f theta')^2 for
/// the two analytic cases.
inline double closed_form_first_term(AnalyticCase c, double a) {
  if (a <= 0.0) throw DomainError("closed_form_first_term: a must be positive");
  const double pi = M_PI;
  if (c == AnalyticCase::iv) return pi * pi * pi * pi / 64.0 * (a + 3.0 / a);
  return pi * pi * (2.0 * pi * pi + 8.0 * a * a + 3.0) / (64.0 * a);
}

namespace detail {

struct CorrectorData {
  double qv = 0.0;
  double vv0 = 0.0;
  double uv0 = 0.0;
  double projection = 0.0;
};

inline CorrectorData resolve_corrector(const ProblemSpec& s, const DeformationField& field,
                                       const QuadratureRule& rule, const CorrectorSpec& corr,
                                       ScalarField& resolved) {
  CorrectorData out;
  if (corr.kind == CorrectorSpec::Kind::analytic_optimal) {
    // No pointwise field exists: the closed form supplies Q[w] = <w,w>_0
    // directly (the truncated expansions converge to it).
    out.vv0 = ww0_analytic(corr.acase, rule.a());
    out.qv = out.vv0;
    return out;
  }
  if (!corr.has_field())
    throw PreconditionError("second_order: corrector carries no field");
  resolved = corr.field;
  if (s.kind == ProblemKind::lane_emden) {
    auto [projected, c] = project_out_ground(s, rule, resolved);
    out.uv0 = inner0(s, rule, s.u, resolved);
    out.projection = c;
    resolved = projected;
  }
  out.qv = q_functional(s, field, rule, resolved);
  out.vv0 = inner0(s, rule, resolved, resolved);
  if (s.kind == ProblemKind::lane_emden) {
    const double scale = rule.integrate([&](double x, double y) {
      const Vec2 du = s.u.gradient(x, y);
      const Vec2 dv = resolved.gradient(x, y);
      const auto lag = lagrangian(s, s.u.value(x, y), du);
      return lag.gpm2 * dv.squaredNorm();
    });
    if (out.vv0 < -1e-8 * std::max(1.0, scale))
      throw InvariantViolation("second_order: <v,v>_0 = " + std::to_string(out.vv0) +
                               " negative after <u,v>_0 projection");
  }
  return out;
}

}  // namespace detail

/// Second-order assembly: the generic form plus the effectively
/// one-dimensional and planar fast paths, reported term by term. The
/// corrector enters through the line-optimized form -(Q[v])^2/<v,v>_0, which
/// equals the unoptimized value at the gamma*-rescaled corrector.
inline DerivativeReport second_order(const ProblemSpec& s, const DeformationField& field,
                                     const QuadratureRule& rule, const CorrectorSpec& corr,
                                     const SecondOrderOptions& opts = {}) {
  DerivativeReport rep;
  rep.corrector_id = corr.id();
  rep.fd_jacobian = field.fd_jacobian;

  rep.first_order = first_order(s, field, rule);
  if (std::abs(rep.first_order) > opts.first_order_tol)
    throw PreconditionError("second_order: first-order derivative " +
                            std::to_string(rep.first_order) +
                            " exceeds tolerance; the simplified forms assume it vanishes");

  const bool lane = s.kind == ProblemKind::lane_emden;
  const double mass = ground_mass(s, rule);
  const double scale = lane ? 1.0 : s.p / mass;

  // Deformation-deformation terms of the generic assembly.
  auto term = [&](auto&& f) { return rule.integrate(f); };
  auto lag_at = [&](double x, double y, double& uv, Vec2& du) {
    uv = s.u.value(x, y);
    du = s.u.gradient(x, y);
    return detail::lagrangian(s, uv, du);
  };

  double t_rt = 0.0;
  if (field.has_rtilde()) {
    t_rt = term([&](double x, double y) {
      double uv;
      Vec2 du;
      const auto lag = lag_at(x, y, uv, du);
      const Mat2 drt = field.drtilde(x, y);
      const Vec2 du_drt = drt.transpose() * du;
      return lag.L * drt.trace() - lag.gpm2 * du.dot(du_drt);
    });
  }
  const double t_drdiv = term([&](double x, double y) {
    double uv;
    Vec2 du;
    const auto lag = lag_at(x, y, uv, du);
    const Mat2 dr = field.dr(x, y);
    const Vec2 du_dr = dr.transpose() * du;
    return -2.0 * lag.gpm2 * du.dot(du_dr) * dr.trace();
  });
  const double t_drdr = term([&](double x, double y) {
    double uv;
    Vec2 du;
    const auto lag = lag_at(x, y, uv, du);
    const Mat2 dr = field.dr(x, y);
    const Vec2 du_drdr = dr.transpose() * (dr.transpose() * du);
    return 2.0 * lag.gpm2 * du.dot(du_drdr);
  });
  const double t_chi2 = term([&](double x, double y) {
    double uv;
    Vec2 du;
    const auto lag = lag_at(x, y, uv, du);
    return 2.0 * lag.L * chi2(Mat2(field.dr(x, y)));
  });
  const double t_quad = term([&](double x, double y) {
    double uv;
    Vec2 du;
    const auto lag = lag_at(x, y, uv, du);
    const Mat2 dr = field.dr(x, y);
    const Vec2 du_dr = dr.transpose() * du;
    return lag.gpm2 * du_dr.squaredNorm() + lag.c4 * du.dot(du_dr) * du.dot(du_dr);
  });

  // Ground-state coupling. For the eigenvalue problem Q[u] vanishes with the
  // first derivative and no <u,u>_0 division exists.
  rep.q_u = q_functional(s, field, rule, s.u);
  double qu_generic = 0.0;
  double qu_fast = 0.0;
  if (lane) {
    rep.uu0 = inner0(s, rule, s.u, s.u);
    if (rep.uu0 == 0.0) throw InvariantViolation("second_order: <u,u>_0 = 0");
    qu_generic = -rep.q_u * rep.q_u / rep.uu0;
    const double mass_div = term([&](double x, double y) {
      return detail::pow_abs(s.u.value(x, y), s.q) * field.dr(x, y).trace();
    });
    qu_fast = (s.q - s.p) / (s.q * s.q) * mass_div * mass_div / mass;
  }

  // Corrector contribution.
  ScalarField resolved;
  const auto cd = detail::resolve_corrector(s, field, rule, corr, resolved);
  rep.q_v = cd.qv;
  rep.vv0 = cd.vv0;
  rep.uv0 = cd.uv0;
  double corr_term;
  if (std::abs(rep.vv0) <= opts.vv_tol) {
    if (std::abs(rep.q_v) <= opts.qv_tol) {
      // <v,v>_0 = 0 and Q[v] = 0: the corrector contributes 2 Q[v] = 0 and no
      // line optimization is possible.
      corr_term = 2.0 * rep.q_v;
      rep.gamma_star = 0.0;
    } else {
      // Degenerate direction: the quadratic in gamma is a line, so rescaling
      // drives the value to -infinity. Flagged instead of a finite optimum.
      rep.degenerate_corrector = true;
      rep.gamma_star = std::numeric_limits<double>::quiet_NaN();
      corr_term = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    rep.gamma_star = -rep.q_v / rep.vv0;
    corr_term = -rep.q_v * rep.q_v / rep.vv0;
  }

  const double generic_bracket = t_rt + t_drdiv + t_drdr + t_chi2 + t_quad + qu_generic + corr_term;
  rep.terms["L_div_Rtilde_minus_DzL_Du_DRtilde"] = t_rt;
  rep.terms["DzL_DuDR_divR_x2"] = t_drdiv;
  rep.terms["DzL_DuDRDR_x2"] = t_drdr;
  rep.terms["L_chi2_x2"] = t_chi2;
  rep.terms["D2zzL_DuDR_DuDR"] = t_quad;
  rep.terms["qu_term_generic"] = qu_generic;
  rep.terms["qu_term_simplified"] = qu_fast;
  rep.terms["corrector_term"] = corr_term;
  rep.terms["second_order_generic"] = scale * generic_bracket;

  // Fast paths apply with Rtilde = 0 only.
  rep.fast_path = FastPath::generic;
  if (!field.has_rtilde()) {
    const double qu_term = lane ? qu_fast : 0.0;
    // Planar simplification (N = 2).
    const double det_term = term([&](double x, double y) {
      double uv;
      Vec2 du;
      const auto lag = lag_at(x, y, uv, du);
      const double det = field.dr(x, y).determinant();
      const double gp = lag.gpm2 * du.squaredNorm();
      const double mass_density = s.kind == ProblemKind::eigenvalue
                                      ? s.level * detail::pow_abs(uv, s.p)
                                      : detail::pow_abs(uv, s.q);
      const double mass_coef = s.kind == ProblemKind::eigenvalue ? 2.0 / s.p : 2.0 / s.q;
      return (-2.0 * (s.p - 1.0) / s.p * gp - mass_coef * mass_density) * det;
    });
    const double planar_bracket = det_term + t_quad + qu_term + corr_term;
    rep.terms["second_order_planar"] = scale * planar_bracket;
    rep.fast_path = FastPath::planar;
    rep.second_order = scale * planar_bracket;

    if (one_dimensional_check(field, rule.a())) {
      const double onedim_bracket = t_quad + qu_term + corr_term;
      rep.terms["second_order_one_dimensional"] = scale * onedim_bracket;
      rep.fast_path = FastPath::one_dimensional;
      rep.second_order = scale * onedim_bracket;
    }
  } else {
    rep.second_order = scale * generic_bracket;
  }
  return rep;
}

}  // namespace nehari
