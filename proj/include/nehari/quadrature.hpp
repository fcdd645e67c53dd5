#pragma once

#include <utility>
#include <vector>

#include "nehari/core.hpp"

namespace nehari {

/// Gauss-Legendre nodes and weights on (-1,1), computed by Newton iteration
/// on the Legendre recurrence.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

struct Axis {
  std::vector<double> x, w;
};

/// Panel Gauss rule on [lo, hi].
inline Axis panel_axis(double lo, double hi, int panels, int order) {
  if (panels < 1) throw DomainError("panel_axis: panels must be >= 1");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  Axis out;
  out.x.reserve(static_cast<std::size_t>(panels) * order);
  out.w.reserve(static_cast<std::size_t>(panels) * order);
  const double step = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * step;
    const double half = 0.5 * step;
    for (int i = 0; i < order; ++i) {
      out.x.push_back(mid + half * gx[i]);
      out.w.push_back(half * gw[i]);
    }
  }
  return out;
}

/// Tensor-product panel Gauss quadrature on the rectangle (0,1) x (-a,a).
/// Immutable after construction; integrate() reduces with a fixed summation
/// tree so results are bit-stable.
class QuadratureRule {
 public:
  explicit QuadratureRule(double a, int panels_x = 8, int panels_y = 8, int order = 12)
      : a_(a), panels_x_(panels_x), panels_y_(panels_y), order_(order) {
    if (a <= 0.0) throw DomainError("QuadratureRule: a must be positive");
    xaxis_ = panel_axis(0.0, 1.0, panels_x, order);
    yaxis_ = panel_axis(-a, a, panels_y, order);
  }

  double a() const { return a_; }
  int panels_x() const { return panels_x_; }
  int panels_y() const { return panels_y_; }
  int order() const { return order_; }
  const Axis& xaxis() const { return xaxis_; }
  const Axis& yaxis() const { return yaxis_; }
  std::size_t node_count() const { return xaxis_.x.size() * yaxis_.x.size(); }

  QuadratureRule refined(int order_factor) const {
    return QuadratureRule(a_, panels_x_, panels_y_, order_ * order_factor);
  }

  template <class F>
  double integrate(F&& f) const {
    std::vector<double> vals(node_count());
    std::size_t idx = 0;
    for (std::size_t i = 0; i < xaxis_.x.size(); ++i) {
      const double x = xaxis_.x[i], wx = xaxis_.w[i];
      for (std::size_t j = 0; j < yaxis_.x.size(); ++j, ++idx) {
        const double y = yaxis_.x[j];
        const double v = f(x, y);
        if (!std::isfinite(v))
          throw EvaluationError("non-finite integrand at node " + std::to_string(idx) + " (" +
                                std::to_string(x) + ", " + std::to_string(y) + ")");
        vals[idx] = wx * yaxis_.w[j] * v;
      }
    }
    return pairwise_sum(vals);
  }

  double area() const {
    return integrate([](double, double) { return 1.0; });
  }

 private:
  double a_;
  int panels_x_, panels_y_, order_;
  Axis xaxis_, yaxis_;
};

/// Line integral over the rectangle boundary. The callable receives the point
/// and the outward unit normal. Corners carry no measure.
template <class F>
double boundary_integrate(double a, int panels, int order, F&& f) {
  const Axis xs = panel_axis(0.0, 1.0, panels, order);
  const Axis ys = panel_axis(-a, a, panels, order);
  std::vector<double> side;
  double total = 0.0;
  auto run = [&](const Axis& ax, auto&& point_normal) {
    side.assign(ax.x.size(), 0.0);
    for (std::size_t i = 0; i < ax.x.size(); ++i) {
      const auto [x, y, nx, ny] = point_normal(ax.x[i]);
      side[i] = ax.w[i] * f(x, y, nx, ny);
    }
    total += pairwise_sum(side);
  };
  struct P {
    double x, y, nx, ny;
  };
  run(ys, [](double y) { return P{0.0, y, -1.0, 0.0}; });
  run(ys, [](double y) { return P{1.0, y, 1.0, 0.0}; });
  run(xs, [a](double x) { return P{x, -a, 0.0, -1.0}; });
  run(xs, [a](double x) { return P{x, a, 0.0, 1.0}; });
  return total;
}

}  // namespace nehari
