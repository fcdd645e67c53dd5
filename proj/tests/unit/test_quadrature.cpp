#include <catch_amalgamated.hpp>

#include "nehari/quadrature.hpp"
#include "nehari/spectral.hpp"

using namespace nehari;

TEST_CASE("weights sum to the rectangle area") {
  for (double a : {1.0, 1.05, 1.3}) {
    const QuadratureRule rule(a);
    CHECK(rule.area() == Catch::Approx(2.0 * a).epsilon(1e-14));
  }
}

TEST_CASE("per-axis polynomial exactness up to degree 2*order - 1") {
  const int order = 6;
  const QuadratureRule rule(1.0, 2, 2, order);
  const int deg = 2 * order - 1;
  // int_0^1 x^deg dx * int_{-1}^1 y^{deg-1} dy
  const double exact = 1.0 / (deg + 1) * 2.0 / deg;
  const double got = rule.integrate(
      [&](double x, double y) { return std::pow(x, deg) * std::pow(y, deg - 1); });
  CHECK(got == Catch::Approx(exact).epsilon(1e-13));
}

TEST_CASE("rectangle study integrals") {
  const QuadratureRule rule(1.0);
  CHECK(rule.integrate([](double, double) { return 1.0; }) == Catch::Approx(2.0).epsilon(1e-14));

  const double mass = rule.integrate([](double x, double y) {
    const double s = std::sin(M_PI * x) * std::cos(M_PI * y / 2.0);
    return s * s;
  });
  CHECK(mass == Catch::Approx(0.5).epsilon(1e-13));

  // Rayleigh identity: int |Du|^2 = lambda1 * int u^2 = 5 pi^2 / 8 at a = 1.
  const ScalarField u = ground_state(1.0);
  const double dirichlet =
      rule.integrate([&](double x, double y) { return u.gradient(x, y).squaredNorm(); });
  CHECK(dirichlet == Catch::Approx(5.0 * M_PI * M_PI / 8.0).margin(1e-12));
}

TEST_CASE("integration is linear") {
  const QuadratureRule rule(1.2);
  auto f = [](double x, double y) { return std::exp(x) * std::cos(y); };
  auto g = [](double x, double y) { return x * x - y; };
  const double lhs = rule.integrate([&](double x, double y) { return 2.5 * f(x, y) - g(x, y); });
  const double rhs = 2.5 * rule.integrate(f) - rule.integrate(g);
  CHECK(lhs == Catch::Approx(rhs).epsilon(1e-14));
}

TEST_CASE("doubling the order leaves resolved integrals unchanged") {
  const double a = 1.05;
  const QuadratureRule rule(a);
  const QuadratureRule fine = rule.refined(2);
  // Highest-frequency content used by the study: products of (20,20) modes.
  const ScalarField phi = eigenfunction(20, 20, a);
  auto f = [&](double x, double y) { return phi.value(x, y) * phi.value(x, y); };
  const double coarse_val = rule.integrate(f);
  const double fine_val = fine.integrate(f);
  CHECK(std::abs(coarse_val - fine_val) <= 1e-12 * std::abs(fine_val));
  CHECK(coarse_val == Catch::Approx(1.0).margin(1e-12));  // normalization
}

TEST_CASE("non-finite integrand values are reported with the node") {
  const QuadratureRule rule(1.0, 1, 1, 2);
  CHECK_THROWS_AS(rule.integrate([](double x, double) { return 1.0 / (x - x); }),
                  EvaluationError);
  try {
    rule.integrate([](double, double) { return std::nan(""); });
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("boundary rule integrates side functions") {
  // int over boundary of (R, n) with R = (x, 0): only x = 1 and x = 0 faces
  // contribute, giving the side length 2a.
  const double a = 1.1;
  const double got = boundary_integrate(
      a, 4, 8, [](double x, double, double nx, double) { return x * nx; });
  CHECK(got == Catch::Approx(2.0 * a).epsilon(1e-13));
}
