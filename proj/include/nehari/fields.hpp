#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "nehari/core.hpp"

namespace nehari {

struct Hessian2 {
  double xx = 0.0;
  double xy = 0.0;
};

/// Scalar function on the reference rectangle with analytic gradient and,
/// where a caller supplies one, the two Hessian entries the corrector
/// right-hand side needs.
struct ScalarField {
  std::function<double(double, double)> value;
  std::function<Vec2(double, double)> gradient;
  std::function<Hessian2(double, double)> hessian;

  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool has_hessian() const { return static_cast<bool>(hessian); }
};

inline ScalarField zero_field() {
  return {[](double, double) { return 0.0; },
          [](double, double) { return Vec2{0.0, 0.0}; },
          {}};
}

inline ScalarField scaled(const ScalarField& f, double c) {
  auto val = f.value;
  auto grad = f.gradient;
  ScalarField out;
  out.value = [val, c](double x, double y) { return c * val(x, y); };
  out.gradient = [grad, c](double x, double y) { return Vec2(c * grad(x, y)); };
  if (f.has_hessian()) {
    auto hess = f.hessian;
    out.hessian = [hess, c](double x, double y) {
      Hessian2 h = hess(x, y);
      return Hessian2{c * h.xx, c * h.xy};
    };
  }
  return out;
}

/// f + c*g
inline ScalarField axpy(const ScalarField& f, double c, const ScalarField& g) {
  auto fv = f.value, gv = g.value;
  auto fg = f.gradient, gg = g.gradient;
  ScalarField out;
  out.value = [fv, gv, c](double x, double y) { return fv(x, y) + c * gv(x, y); };
  out.gradient = [fg, gg, c](double x, double y) { return Vec2(fg(x, y) + c * gg(x, y)); };
  return out;
}

/// Separable horizontal perturbation R = (f(x) theta(y), 0) together with the
/// profile derivatives used by the Jacobian and the corrector right-hand side.
struct SeparableProfile {
  std::function<double(double)> f, df, ddf;
  std::function<double(double)> theta, dtheta, ddtheta;
};

struct DeformationField {
  std::function<Vec2(double, double)> r;
  std::function<Mat2(double, double)> dr;
  std::function<Vec2(double, double)> rtilde;   // empty = identically zero
  std::function<Mat2(double, double)> drtilde;  // empty = identically zero
  std::optional<SeparableProfile> separable;
  bool fd_jacobian = false;

  bool has_rtilde() const { return static_cast<bool>(rtilde); }
};

inline DeformationField make_field(std::function<Vec2(double, double)> r,
                                   std::function<Mat2(double, double)> dr) {
  DeformationField out;
  out.r = std::move(r);
  out.dr = std::move(dr);
  return out;
}

inline DeformationField make_separable_field(SeparableProfile p) {
  DeformationField out;
  auto f = p.f, df = p.df;
  auto th = p.theta, dth = p.dtheta;
  out.r = [f, th](double x, double y) { return Vec2{f(x) * th(y), 0.0}; };
  out.dr = [f, df, th, dth](double x, double y) {
    Mat2 m;
    m << df(x) * th(y), f(x) * dth(y), 0.0, 0.0;
    return m;
  };
  out.separable = std::move(p);
  return out;
}

inline DeformationField zero_deformation() {
  return make_field([](double, double) { return Vec2{0.0, 0.0}; },
                    [](double, double) { return Mat2(Mat2::Zero()); });
}

/// Central finite-difference Jacobian for fields supplied without one.
/// Reports built from such a field carry an fd_jacobian flag.
inline DeformationField with_fd_jacobian(std::function<Vec2(double, double)> r,
                                         double scale = 1.0) {
  DeformationField out;
  const double h = 1e-6 * scale;
  out.r = r;
  out.dr = [r, h](double x, double y) {
    const Vec2 rxp = r(x + h, y), rxm = r(x - h, y);
    const Vec2 ryp = r(x, y + h), rym = r(x, y - h);
    Mat2 m;
    m(0, 0) = (rxp(0) - rxm(0)) / (2 * h);
    m(0, 1) = (ryp(0) - rym(0)) / (2 * h);
    m(1, 0) = (rxp(1) - rxm(1)) / (2 * h);
    m(1, 1) = (ryp(1) - rym(1)) / (2 * h);
    return m;
  };
  out.fd_jacobian = true;
  return out;
}

inline void set_rtilde(DeformationField& field, std::function<Vec2(double, double)> rt,
                       std::function<Mat2(double, double)> drt) {
  field.rtilde = std::move(rt);
  field.drtilde = std::move(drt);
}

}  // namespace nehari
