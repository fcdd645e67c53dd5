#pragma once

#include <Eigen/Dense>

#include "nehari/fields.hpp"

namespace nehari {

/// Sum of 2x2 principal minors: the third-to-highest coefficient of the
/// characteristic polynomial of M. Equals det(M) when N = 2.
template <class Derived>
double chi2(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols() || m.rows() < 2)
    throw DimensionError("chi2: matrix must be square, N >= 2, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      s += m(i, i) * m(j, j) - m(i, j) * m(j, i);
  return s;
}

/// t-derivatives of the Jacobian determinant phi_t and the inverse Jacobian
/// Psi_t at t = 0, evaluated at one point.
struct KinematicsAt {
  double phi0dot = 0.0;   // div R
  double phi0ddot = 0.0;  // 2 chi2(DR) + div Rtilde
  Mat2 psi0dot;           // -DR
  Mat2 psi0ddot;          // 2 DR*DR - DRtilde
  double chi2_dr = 0.0;
  double det_dr = 0.0;
};

inline KinematicsAt evaluate_kinematics(const DeformationField& field, double x, double y) {
  const Mat2 dr = field.dr(x, y);
  const Mat2 drt = field.has_rtilde() ? field.drtilde(x, y) : Mat2(Mat2::Zero());
  KinematicsAt out;
  out.chi2_dr = chi2(dr);
  out.det_dr = dr.determinant();
  out.phi0dot = dr.trace();
  out.phi0ddot = 2.0 * out.chi2_dr + drt.trace();
  out.psi0dot = -dr;
  out.psi0ddot = 2.0 * dr * dr - drt;
  return out;
}

/// Jacobian of Phi_t = id + t R + t^2/2 Rtilde at a point.
inline Mat2 deformation_jacobian(const DeformationField& field, double x, double y, double t) {
  Mat2 m = Mat2::Identity() + t * field.dr(x, y);
  if (field.has_rtilde()) m += 0.5 * t * t * field.drtilde(x, y);
  return m;
}

/// Pullback coefficients phi_t = det(DPhi_t), Psi_t = (DPhi_t)^{-1}.
struct Pullback {
  double phi;
  Mat2 psi;
};

inline Pullback pullback_at(const DeformationField& field, double x, double y, double t) {
  const Mat2 m = deformation_jacobian(field, x, y, t);
  const double det = m.determinant();
  if (det <= 0.0)
    throw FoldError("deformation folds at (" + std::to_string(x) + ", " + std::to_string(y) +
                    "), t = " + std::to_string(t) + ": det = " + std::to_string(det));
  return {det, Mat2(m.inverse())};
}

/// True iff all but the first component of R vanish on a 16x16 sample grid,
/// enabling the effectively one-dimensional fast path.
inline bool one_dimensional_check(const DeformationField& field, double a,
                                  int n = 16, double threshold = 1e-12) {
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double y = -a + (j + 0.5) * (2.0 * a) / n;
      if (std::abs(field.r(x, y)(1)) > threshold) return false;
    }
  }
  return true;
}

}  // namespace nehari
