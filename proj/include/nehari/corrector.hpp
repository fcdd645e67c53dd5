#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "nehari/forms.hpp"
#include "nehari/spectral.hpp"

namespace nehari {

/// The two perturbations whose optimal-corrector norm has a closed form:
/// f = sin(pi x/2) (iv) and f = x (v), both with theta = sin(pi y/2a).
enum class AnalyticCase { iv, v };

inline std::string to_string(AnalyticCase c) { return c == AnalyticCase::iv ? "iv" : "v"; }

/// Right-hand side of the optimal-corrector boundary value problem
/// -Delta w - lambda_1 w = 2 u_xx f' theta + 2 u_xy f theta' + u_x (f'' theta + f theta'').
/// Value-only field: nothing integrates its gradient.
inline ScalarField rhs_field(const ProblemSpec& s, const DeformationField& field) {
  if (s.kind != ProblemKind::eigenvalue || s.p != 2.0)
    throw PreconditionError("rhs_field: requires the p = 2 eigenvalue problem");
  if (!field.separable)
    throw UnsupportedFieldError("rhs_field: deformation must be separable R = (f(x)theta(y), 0)");
  if (!s.u.has_hessian())
    throw PreconditionError("rhs_field: ground state carries no Hessian entries");
  const SeparableProfile prof = *field.separable;
  const ScalarField u = s.u;
  ScalarField out;
  out.value = [prof, u](double x, double y) {
    const Hessian2 h = u.hessian(x, y);
    const double ux = u.gradient(x, y)(0);
    return 2.0 * h.xx * prof.df(x) * prof.theta(y) + 2.0 * h.xy * prof.f(x) * prof.dtheta(y) +
           ux * (prof.ddf(x) * prof.theta(y) + prof.f(x) * prof.ddtheta(y));
  };
  return out;
}

struct FourierCoefficients {
  double a = 1.0;
  double lambda11 = 0.0;
  int M = 0, K = 0;
  struct Entry {
    int m, k;
    double value;   // v_{m,k}
    double lambda;  // lambda_{m,k}
  };
  std::vector<Entry> entries;  // (m,k) row-major, (1,1) absent
};

/// Coefficients v_{m,k} = (int rhs phi_{m,k}) / (lambda_{m,k} - lambda_{1,1})
/// of the truncated optimal corrector, by quadrature of the BVP right-hand
/// side against the eigenbasis.
inline FourierCoefficients fourier_coefficients(const ProblemSpec& s,
                                                const DeformationField& field,
                                                const QuadratureRule& rule, int M, int K) {
  if (M < 1 || K < 1) throw IndexError("fourier_coefficients: M, K must be >= 1");
  const double a = rule.a();
  const ScalarField rhs = rhs_field(s, field);
  FourierCoefficients out;
  out.a = a;
  out.lambda11 = lambda_mk(1, 1, a);
  out.M = M;
  out.K = K;
  out.entries.reserve(static_cast<std::size_t>(M) * K - 1);
  for (int m = 1; m <= M; ++m) {
    for (int k = 1; k <= K; ++k) {
      if (m == 1 && k == 1) continue;
      const ScalarField phi = eigenfunction(m, k, a);
      const double proj =
          rule.integrate([&](double x, double y) { return rhs.value(x, y) * phi.value(x, y); });
      const double lam = lambda_mk(m, k, a);
      out.entries.push_back({m, k, proj / (lam - out.lambda11), lam});
    }
  }
  return out;
}

/// Truncated <w,w>_0 = sum (lambda_{m,k} - lambda_{1,1}) v_{m,k}^2.
inline double ww0_truncated(const FourierCoefficients& c) {
  std::vector<double> terms(c.entries.size());
  for (std::size_t i = 0; i < c.entries.size(); ++i) {
    const auto& e = c.entries[i];
    terms[i] = (e.lambda - c.lambda11) * e.value * e.value;
  }
  return pairwise_sum(terms);
}

/// Closed-form <w,w>_0 for the two analytic cases. The cot argument
/// pi sqrt(4a^2-3) / 2a lies in [pi/2, pi) for a >= 1, so no pole occurs;
/// guarded regardless.
inline double ww0_analytic(AnalyticCase c, double a) {
  const double disc = 4.0 * a * a - 3.0;
  if (disc < 0.0)
    throw DomainError("ww0_analytic: a = " + std::to_string(a) + " below sqrt(3)/2");
  const double r = std::sqrt(disc);
  const double arg = M_PI * r / (2.0 * a);
  if (std::abs(std::sin(arg)) < 1e-9)
    throw SingularityError("ww0_analytic: cot argument within 1e-9 of a pole");
  const double cot = std::cos(arg) / std::sin(arg);
  const double pi = M_PI;
  if (c == AnalyticCase::iv)
    return pi * pi * pi / (64.0 * a) * (3.0 * pi + pi * a * a - 8.0 * a * r * cot);
  return pi * pi / (64.0 * a) * (3.0 + 8.0 * a * a + 2.0 * pi * pi - 8.0 * pi * a * r * cot);
}

/// Debug export, columns m,k,v_mk.
inline void write_coefficients_csv(std::ostream& os, const FourierCoefficients& c) {
  os << "m,k,v_mk\n";
  char buf[64];
  for (const auto& e : c.entries) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.12e\n", e.m, e.k, e.value);
    os << buf;
  }
}

namespace detail {

/// Truncated eigenfunction sum evaluated with per-axis trigonometric
/// recurrences instead of per-mode trig calls.
struct FourierSum {
  double a;
  int M, K;
  std::vector<double> c;  // (m-1)*K + (k-1), zeros where absent

  static std::shared_ptr<FourierSum> build(const FourierCoefficients& fc) {
    auto s = std::make_shared<FourierSum>();
    s->a = fc.a;
    s->M = fc.M;
    s->K = fc.K;
    s->c.assign(static_cast<std::size_t>(fc.M) * fc.K, 0.0);
    for (const auto& e : fc.entries) s->c[(e.m - 1) * fc.K + (e.k - 1)] = e.value;
    return s;
  }

  template <bool WithGradient>
  void eval(double x, double y, double& val, Vec2& grad) const {
    const double norm = std::sqrt(2.0 / a);
    const double sx = std::sin(M_PI * x), cx = std::cos(M_PI * x);
    const double hy = M_PI * y / (2.0 * a);
    const double sy = std::sin(hy), cy = std::cos(hy);
    val = 0.0;
    grad.setZero();
    double sm = sx, cm = cx;
    std::size_t idx = 0;
    for (int m = 1; m <= M; ++m) {
      double sk = sy, ck = cy;
      for (int k = 1; k <= K; ++k, ++idx) {
        const double coef = c[idx];
        if (coef != 0.0) {
          const bool odd_k = (k % 2 == 1);
          const double ybr = odd_k ? ck : sk;
          val += coef * norm * sm * ybr;
          if constexpr (WithGradient) {
            const double dybr = (odd_k ? -sk : ck) * (k * M_PI / (2.0 * a));
            grad(0) += coef * norm * m * M_PI * cm * ybr;
            grad(1) += coef * norm * sm * dybr;
          }
        }
        const double sk1 = sk * cy + ck * sy;
        ck = ck * cy - sk * sy;
        sk = sk1;
      }
      const double sm1 = sm * cx + cm * sx;
      cm = cm * cx - sm * sx;
      sm = sm1;
    }
  }
};

}  // namespace detail

inline ScalarField fourier_sum_field(const FourierCoefficients& fc) {
  auto s = detail::FourierSum::build(fc);
  ScalarField out;
  out.value = [s](double x, double y) {
    double v;
    Vec2 g;
    s->eval<false>(x, y, v, g);
    return v;
  };
  out.gradient = [s](double x, double y) {
    double v;
    Vec2 g;
    s->eval<true>(x, y, v, g);
    return g;
  };
  return out;
}

/// One corrector from the catalog: v = yu, a basis eigenfunction, a truncated
/// Fourier optimal corrector, the closed-form optimal norm (no pointwise
/// field), or a caller-supplied field.
struct CorrectorSpec {
  enum class Kind { y_times_u, eigenmode, fourier_optimal, analytic_optimal, user };
  Kind kind = Kind::user;
  int m = 0, k = 0;  // eigenmode
  int M = 0, K = 0;  // fourier truncation
  AnalyticCase acase = AnalyticCase::iv;
  ScalarField field;  // empty for analytic_optimal
  std::shared_ptr<const FourierCoefficients> coeffs;
  std::string label = "user";

  bool has_field() const { return static_cast<bool>(field.value); }
  const std::string& id() const { return label; }
};

namespace detail {

inline void check_vanishes_on_boundary(const ScalarField& v, double a,
                                       double threshold = 1e-12, int n = 64) {
  auto probe = [&](double x, double y) {
    if (std::abs(v.value(x, y)) > threshold)
      throw InvariantViolation("corrector does not vanish on the boundary at (" +
                               std::to_string(x) + ", " + std::to_string(y) + ")");
  };
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double y = -a + i * (2.0 * a) / n;
    probe(x, -a);
    probe(x, a);
    probe(0.0, y);
    probe(1.0, y);
  }
}

}  // namespace detail

inline CorrectorSpec make_y_times_u(const ScalarField& u, double a) {
  auto uval = u.value;
  auto ugrad = u.gradient;
  CorrectorSpec c;
  c.kind = CorrectorSpec::Kind::y_times_u;
  c.label = "yu";
  c.field.value = [uval](double x, double y) { return y * uval(x, y); };
  c.field.gradient = [uval, ugrad](double x, double y) {
    const Vec2 g = ugrad(x, y);
    return Vec2{y * g(0), uval(x, y) + y * g(1)};
  };
  detail::check_vanishes_on_boundary(c.field, a);
  return c;
}

inline CorrectorSpec make_eigenmode(int m, int k, double a) {
  CorrectorSpec c;
  c.kind = CorrectorSpec::Kind::eigenmode;
  c.m = m;
  c.k = k;
  c.label = "phi_" + std::to_string(m) + "_" + std::to_string(k);
  c.field = eigenfunction(m, k, a);
  detail::check_vanishes_on_boundary(c.field, a);
  return c;
}

inline CorrectorSpec make_fourier_optimal(const ProblemSpec& s, const DeformationField& field,
                                          const QuadratureRule& rule, int M, int K) {
  CorrectorSpec c;
  c.kind = CorrectorSpec::Kind::fourier_optimal;
  c.M = M;
  c.K = K;
  c.label = "w_" + std::to_string(M) + "_" + std::to_string(K);
  c.coeffs = std::make_shared<FourierCoefficients>(fourier_coefficients(s, field, rule, M, K));
  c.field = fourier_sum_field(*c.coeffs);
  detail::check_vanishes_on_boundary(c.field, rule.a());
  return c;
}

inline CorrectorSpec make_analytic_optimal(AnalyticCase ac) {
  CorrectorSpec c;
  c.kind = CorrectorSpec::Kind::analytic_optimal;
  c.acase = ac;
  c.label = "optimal_analytic";
  return c;
}

inline CorrectorSpec make_user(ScalarField v, double a, std::string label = "user") {
  CorrectorSpec c;
  c.kind = CorrectorSpec::Kind::user;
  c.label = std::move(label);
  c.field = std::move(v);
  detail::check_vanishes_on_boundary(c.field, a);
  return c;
}

}  // namespace nehari
