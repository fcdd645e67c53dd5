#include <catch_amalgamated.hpp>

#include "nehari/report_json.hpp"
#include "nehari/scenario.hpp"
#include "nehari/shapederiv.hpp"

using namespace nehari;

namespace {

struct Setup {
  double a;
  QuadratureRule rule;
  ProblemSpec spec;
  DeformationField field;
  Setup(const char* case_id, double a_)
      : a(a_),
        rule(a_),
        spec(make_eigenvalue_spec(ground_state(a_), 2.0, lambda1(a_), rule)),
        field(case_field(*find_case(case_id), a_)) {}
};

DeformationField x_times_even_theta() {
  SeparableProfile p;
  p.f = [](double x) { return x; };
  p.df = [](double) { return 1.0; };
  p.ddf = [](double) { return 0.0; };
  p.theta = [](double) { return 1.0; };
  p.dtheta = [](double) { return 0.0; };
  p.ddtheta = [](double) { return 0.0; };
  return make_separable_field(p);
}

}  // namespace

TEST_CASE("first derivative vanishes for odd theta, both routes") {
  for (const char* id : {"i", "ii", "iii", "iv", "v", "vi"}) {
    const Setup s(id, 1.05);
    const double vol = first_order(s.spec, s.field, s.rule);
    const double poh = pohozaev_first_order(s.spec, s.field, s.rule);
    REQUIRE(std::abs(vol) <= 1e-10);
    REQUIRE(std::abs(poh) <= 1e-10);
    REQUIRE(std::abs(vol - poh) <= 1e-10);
  }
}

TEST_CASE("even theta: volume and boundary forms equal -2 pi^2") {
  const double a = 1.3;
  const QuadratureRule rule(a);
  const ProblemSpec spec = make_eigenvalue_spec(ground_state(a), 2.0, lambda1(a), rule);
  const DeformationField field = x_times_even_theta();
  const double vol = first_order(spec, field, rule);
  const double poh = pohozaev_first_order(spec, field, rule);
  CHECK(vol == Catch::Approx(-2.0 * M_PI * M_PI).margin(1e-10));
  CHECK(poh == Catch::Approx(-2.0 * M_PI * M_PI).margin(1e-10));
  CHECK(std::abs(vol - poh) <= 1e-10);

  // dnu(0) = Q[u] / int |u|^p.
  const double mass = ground_mass(spec, rule);
  CHECK(q_functional(spec, field, rule, spec.u) / mass == Catch::Approx(vol).epsilon(1e-12));

  CHECK(first_order(spec, zero_deformation(), rule) == 0.0);
  CHECK(pohozaev_first_order(spec, zero_deformation(), rule) == 0.0);
}

TEST_CASE("second_order rejects nonvanishing first derivatives") {
  const double a = 1.3;
  const QuadratureRule rule(a);
  const ProblemSpec spec = make_eigenvalue_spec(ground_state(a), 2.0, lambda1(a), rule);
  try {
    second_order(spec, x_times_even_theta(), rule, make_eigenmode(1, 2, a));
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("first-order") != std::string::npos);
  }
}

TEST_CASE("frozen regression values at a = 1.05") {
  const Setup si("i", 1.05);
  const double w46 =
      second_order(si.spec, si.field, si.rule,
                   make_fourier_optimal(si.spec, si.field, si.rule, 4, 6))
          .second_order;
  CHECK(w46 == Catch::Approx(-1.817292458123679).margin(1e-9));

  const double yu =
      second_order(si.spec, si.field, si.rule, make_y_times_u(si.spec.u, si.a)).second_order;
  CHECK(yu == Catch::Approx(2.698612519953079).margin(1e-9));

  const Setup sii("ii", 1.05);
  const double phi =
      second_order(sii.spec, sii.field, sii.rule, make_eigenmode(1, 2, sii.a)).second_order;
  CHECK(phi == Catch::Approx(-1.01505298127706).margin(1e-9));
}

TEST_CASE("ground-state scaling leaves both derivatives unchanged") {
  const Setup base("ii", 1.04);
  const auto rep0 = second_order(base.spec, base.field, base.rule,
                                 make_y_times_u(base.spec.u, base.a));
  for (double c : {0.5, 3.0}) {
    const ProblemSpec spec =
        make_eigenvalue_spec(scaled(ground_state(base.a), c), 2.0, lambda1(base.a), base.rule);
    const auto rep = second_order(spec, base.field, base.rule, make_y_times_u(spec.u, base.a));
    REQUIRE(std::abs(rep.first_order - rep0.first_order) <= 1e-10);
    REQUIRE(nearly_equal(rep.second_order, rep0.second_order, 1e-10));
  }
}

TEST_CASE("corrector rescaling leaves the optimized value unchanged") {
  const Setup s("iv", 1.07);
  const ScalarField v = eigenfunction(1, 2, s.a);
  const auto rep0 = second_order(s.spec, s.field, s.rule, make_user(v, s.a, "v"));
  for (double gamma : {-2.0, 0.5, 3.0}) {
    const auto rep =
        second_order(s.spec, s.field, s.rule, make_user(scaled(v, gamma), s.a, "gv"));
    REQUIRE(nearly_equal(rep.second_order, rep0.second_order, 1e-10));
    REQUIRE(nearly_equal(rep.gamma_star * gamma, rep0.gamma_star, 1e-10));
  }
}

TEST_CASE("fast paths agree with the generic assembly") {
  const Setup s("ii", 1.05);
  const auto rep = second_order(s.spec, s.field, s.rule, make_y_times_u(s.spec.u, s.a));
  CHECK(rep.fast_path == FastPath::one_dimensional);
  const double generic = rep.terms.at("second_order_generic");
  const double planar = rep.terms.at("second_order_planar");
  const double onedim = rep.terms.at("second_order_one_dimensional");
  CHECK(nearly_equal(generic, onedim, 1e-10));
  CHECK(nearly_equal(generic, planar, 1e-10));
  CHECK(rep.second_order == onedim);
}

TEST_CASE("closed-form first term") {
  CHECK(closed_form_first_term(AnalyticCase::iv, 1.0) ==
        Catch::Approx(std::pow(M_PI, 4) / 16.0).epsilon(1e-14));
  const double pi = M_PI;
  CHECK(closed_form_first_term(AnalyticCase::v, 1.0) ==
        Catch::Approx(pi * pi * (2 * pi * pi + 11.0) / 64.0).epsilon(1e-14));

  // Quadrature cross-check through the assembled report term.
  for (const char* id : {"iv", "v"}) {
    const Setup s(id, 1.07);
    const auto rep = second_order(s.spec, s.field, s.rule, make_eigenmode(1, 2, s.a));
    const AnalyticCase ac = std::string(id) == "iv" ? AnalyticCase::iv : AnalyticCase::v;
    REQUIRE(rep.terms.at("D2zzL_DuDR_DuDR") ==
            Catch::Approx(closed_form_first_term(ac, s.a)).epsilon(1e-12));
  }
}

TEST_CASE("analytic optimal corrector: zero at a = 1, negative beyond") {
  const Setup s1("iv", 1.0);
  const auto rep1 =
      second_order(s1.spec, s1.field, s1.rule, make_analytic_optimal(AnalyticCase::iv));
  CHECK(std::abs(rep1.second_order) <= 1e-8);
  CHECK(rep1.gamma_star == Catch::Approx(-1.0).epsilon(1e-12));

  const Setup s2("v", 1.06);
  const auto rep2 =
      second_order(s2.spec, s2.field, s2.rule, make_analytic_optimal(AnalyticCase::v));
  CHECK(rep2.second_order < 0.0);
}

TEST_CASE("degenerate corrector handling") {
  const Setup s("ii", 1.05);
  // v = u: <v,v>_0 = 0 and Q[v] = 0, so the corrector contributes nothing.
  const auto rep = second_order(s.spec, s.field, s.rule, make_user(s.spec.u, s.a, "u"));
  CHECK_FALSE(rep.degenerate_corrector);
  CHECK(rep.gamma_star == 0.0);
  CHECK(std::isfinite(rep.second_order));

  // Forcing <v,v>_0 below the degeneracy cut with Q[v] != 0 flags the
  // unbounded-direction case instead of reporting a finite optimum.
  SecondOrderOptions opts;
  opts.vv_tol = 100.0;
  const auto deg = second_order(s.spec, s.field, s.rule, make_eigenmode(1, 2, s.a), opts);
  CHECK(deg.degenerate_corrector);
  CHECK(std::isnan(deg.second_order));
}

TEST_CASE("finite-difference Jacobians are flagged in the report") {
  const Setup s("ii", 1.05);
  const DeformationField fd_field = with_fd_jacobian(
      [](double x, double y) { return Vec2{x * y, 0.0}; });
  const auto rep = second_order(s.spec, fd_field, s.rule, make_eigenmode(1, 2, s.a));
  CHECK(rep.fd_jacobian);
  // Same field with the analytic Jacobian agrees closely.
  const auto exact = second_order(s.spec, s.field, s.rule, make_eigenmode(1, 2, s.a));
  CHECK_FALSE(exact.fd_jacobian);
  CHECK(nearly_equal(rep.second_order, exact.second_order, 1e-8));
}

TEST_CASE("synthetic Rtilde: generic assembly only, FD-consistent") {
  const Setup s("ii", 1.05);
  DeformationField field = s.field;
  set_rtilde(
      field,
      [](double x, double y) {
        return Vec2{0.4 * std::sin(M_PI * x) * y * y, 0.3 * x * (1.0 - x) * y};
      },
      [](double x, double y) {
        Mat2 m;
        m << 0.4 * M_PI * std::cos(M_PI * x) * y * y, 0.8 * std::sin(M_PI * x) * y,
            0.3 * (1.0 - 2.0 * x) * y, 0.3 * x * (1.0 - x);
        return m;
      });
  const CorrectorSpec corr = make_eigenmode(1, 2, s.a);
  const auto rep = second_order(s.spec, field, s.rule, corr);
  CHECK(rep.fast_path == FastPath::generic);
  CHECK(rep.terms.at("L_div_Rtilde_minus_DzL_Du_DRtilde") != 0.0);

  const ScalarField v = scaled(corr.field, rep.gamma_star);
  const auto fd = fd_trajectory_derivatives(s.spec, field, s.rule, v, 1e-3);
  CHECK(std::abs(fd.d1 - rep.first_order) <= 1e-8);
  CHECK(std::abs(fd.d2 - rep.second_order) <= 1e-5);
}

TEST_CASE("report JSON carries the schema version and terms") {
  const Setup s("iv", 1.0);
  const auto rep =
      second_order(s.spec, s.field, s.rule, make_analytic_optimal(AnalyticCase::iv));
  ReportMeta meta{"iv", "sin(pi*x/2)", "sin(pi*y/2a)", 1.0, "optimal_analytic"};
  const auto j = report_json(rep, meta, s.spec);
  CHECK(j.at("report_version") == 1);
  CHECK(j.at("fast_path") == "one_dimensional");
  CHECK(j.at("terms").contains("corrector_term"));
  CHECK(j.at("scenario").at("corrector") == "optimal_analytic");

  const auto oj = oracle_report_json(FdDerivatives{0.0, -1.0}, 1e-3, meta, s.spec);
  CHECK(oj.at("report_version") == 1);
  CHECK(oj.at("source") == "fd_oracle");
  CHECK(oj.at("terms").at("fd_step") == 1e-3);
}
