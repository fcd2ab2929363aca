#include <cmath>

#include "doctest.h"
#include "deltasym/lattice.hpp"
#include "deltasym/normal_form.hpp"

using namespace deltasym;

namespace {

std::string golden(const std::string& rel) { return std::string(DELTASYM_SOURCE_DIR) + "/golden/" + rel; }

long double kpm_value(long double h, int sign) {
  long double base = (2 + h * h + sign * h * std::sqrt(4 + h * h)) / 2;
  return std::pow(base, 1 / h);
}

}  // namespace

TEST_CASE("uniform scheme for u_xx = u reproduces K_+^x + K_-^x") {
  Scheme s = load_scheme(golden("schemes/uxx_u.scm"));
  Expr h = parse("1/10");
  Expr sol = pow(k_pm(h, 1), parse("x[0]")) + pow(k_pm(h, -1), parse("x[0]"));
  LatticeTrajectory t = integrate(s, seeds_from({parse("0"), parse("1/10")}, sol), 100);
  REQUIRE(t.points.size() == 102);
  CHECK(t.method == "closed-form");
  CHECK_FALSE(t.diverged);
  CHECK(t.monotone);
  long double err = 0;
  for (const auto& p : t.points) {
    long double expect = std::pow(kpm_value(0.1L, 1), p.x) + std::pow(kpm_value(0.1L, -1), p.x);
    err = std::max(err, std::abs(p.u - ComplexL(expect)));
  }
  CHECK(err < 1e-10L);
  CHECK(t.max_E < 1e-9L);

  // Backward integration retraces the same solution.
  LatticeTrajectory b = integrate(s, seeds_from({parse("0"), parse("1/10")}, sol), 20, -1);
  CHECK(b.points.front().n == -20);
  long double e2 = 0;
  for (const auto& p : b.points) {
    long double expect = std::pow(kpm_value(0.1L, 1), p.x) + std::pow(kpm_value(0.1L, -1), p.x);
    e2 = std::max(e2, std::abs(p.u - ComplexL(expect)));
  }
  CHECK(e2 < 1e-10L);
}

TEST_CASE("K_+ K_- = 1") {
  for (long double h : {0.1L, 0.5L, 1.0L}) CHECK(std::abs(kpm_value(h, 1) * kpm_value(h, -1) - 1) < 1e-12L);
  CHECK(normalizes_to_zero(k_pm(parse("h"), 1) * k_pm(parse("h"), -1) - Expr(1)));
}

TEST_CASE("u_xx = 1 is solved exactly by x^2/2") {
  Scheme s = load_scheme(golden("schemes/uxx_one.scm"));
  LatticeTrajectory t = integrate(s, seeds_from({parse("0"), parse("1/3")}, parse("x[0]^2/2")), 50);
  REQUIRE(t.exact.has_value());
  CHECK(t.method == "exact");
  bool ok = true;
  for (const auto& [x, u] : *t.exact) ok = ok && u == x * x / 2;
  CHECK(ok);
  CHECK(t.exact->back().first == Rational(17));
}

TEST_CASE("logarithmic lattice for the exponential-invariant scheme") {
  Scheme s = load_scheme(golden("schemes/uxx_u_log.scm"));
  const long double c1 = 1, c2 = 1, c3 = 1, c4 = 10;
  Expr sol = parse("exp(x[0]) + exp(-x[0])");
  LatticeTrajectory t = integrate(s, seeds_from({parse("-ln(10)/2"), parse("-ln(11)/2")}, sol), 60);
  CHECK(t.method == "closed-form");
  long double err = 0;
  for (const auto& p : t.points) {
    LogLatticeValue v = log_lattice_solution(c1, c2, c3, c4, p.n);
    err = std::max(err, std::abs(p.u - ComplexL(v.direct)));
    err = std::max(err, std::abs(p.x + std::log(c3 * p.n + c4) / 2));
  }
  CHECK(err < 1e-12L);
  CHECK(t.max_omega < 1e-12L);
  CHECK_FALSE(t.monotone == false);

  // The Newton path agrees.
  IntegrateOptions newton;
  newton.method = StepMethod::Newton;
  LatticeTrajectory n = integrate(s, seeds_from({parse("-ln(10)/2"), parse("-ln(11)/2")}, sol), 20, 1, newton);
  CHECK(n.method == "newton");
  long double d = 0;
  for (std::size_t i = 0; i < n.points.size(); ++i) d = std::max(d, std::abs(n.points[i].u - t.points[i].u));
  CHECK(d < 1e-12L);
}

TEST_CASE("composition on the logarithmic lattice") {
  for (long n = 0; n <= 30; ++n) {
    LogLatticeValue v = log_lattice_solution(1.5L, -0.25L, 2, 3, n);
    CHECK(std::abs(v.direct - v.composed) < 1e-12L);
    CHECK(std::abs(v.direct - v.exponential) < 1e-12L);
  }
  CHECK_THROWS_AS(log_lattice_solution(1, 1, -1, 1, 2), DomainError);
}

TEST_CASE("integration errors") {
  Scheme s = load_scheme(golden("schemes/uxx_u.scm"));
  CHECK_THROWS_AS(integrate(s, seeds_from({parse("0")}, parse("x[0]")), 3), SchemeError);
  // Coincident seeds make the leading Jacobian singular.
  try {
    integrate(s, seeds_from({parse("1"), parse("1")}, parse("x[0]")), 3);
    FAIL("expected an integration error");
  } catch (const SingularJacobian& e) {
    CHECK(e.partial->diverged);
    CHECK(e.partial->points.size() == 2);
    CHECK(e.step == 0);
  }
  Scheme fixed = load_scheme(golden("schemes/uxx_u_fixed.scm"));
  CHECK_THROWS_AS(integrate(fixed, seeds_from({parse("0"), parse("1/2")}, parse("x[0]")), 3), SchemeError);
  IntegrateOptions opt;
  opt.params["h"] = parse("1/2");
  LatticeTrajectory t = integrate(fixed, seeds_from({parse("0"), parse("1/2")}, parse("exp(x[0]*ln((2 + 1/4 + sqrt(4 + 1/4)/2)/2)*2)")), 10, 1, opt);
  CHECK(t.max_E < 1e-9L);
}

TEST_CASE("lattice generators") {
  LatticeTrajectory u = lattice_generator(LatticeKind::Uniform, {1, 5}, 0, 10);
  REQUIRE(u.points.size() == 11);
  for (const auto& p : u.points) CHECK(p.x == p.n + 5);

  const long double pi = std::acos(-1.0L);
  LatticeTrajectory q = lattice_generator(LatticeKind::Quadratic, {1 / std::sqrt(10.0L), -pi, 1}, 0, 4);
  CHECK(std::abs(q.points[2].x - (4 / std::sqrt(10.0L) - 2 * pi + 1)) < 1e-15L);

  LatticeTrajectory m = lattice_generator(LatticeKind::Moebius, {std::sqrt(2.0L), -std::sqrt(3.0L), 3, -std::sqrt(3.0L) * pi}, -10, 10);
  REQUIRE(m.points.size() == 21);
  CHECK(std::abs(m.points[10].x - 1 / pi) < 1e-15L);
  CHECK_FALSE(m.monotone);
  for (long double K : anharmonic_ratios(m)) CHECK(std::abs(K - 4) < 1e-12L);

  CHECK_THROWS_AS(lattice_generator(LatticeKind::Moebius, {1, 0, 1, -2}, 0, 4), PoleOnRange);
  CHECK_THROWS_AS(lattice_generator(LatticeKind::Log, {-1, 2}, 0, 4), DomainError);
  CHECK_THROWS_AS(lattice_generator(LatticeKind::Moebius, {1, 2, 2, 4}, 0, 4), DomainError);
  LatticeTrajectory l = lattice_generator(LatticeKind::Log, {1, 10}, 0, 5);
  CHECK(std::abs(l.points[0].x + std::log(10.0L) / 2) < 1e-18L);
}

TEST_CASE("anharmonic ratio") {
  CHECK(anharmonic_ratio(0, 1, 2, 3) == 4);
  CHECK(std::abs(anharmonic_ratio(0, 1, 4, 9) - 32.0L / 5) < 1e-18L);
  CHECK_THROWS_AS(anharmonic_ratio(1, 1, 2, 3), ZeroDenominator);
}

TEST_CASE("translation reduction is exact") {
  CHECK(reduction_exactness(translation_candidate(1)).is_zero());
  CHECK(reduction_exactness(translation_candidate(-1)).is_zero());
  CHECK_FALSE(reduction_exactness(parse("eta^2/sqrt(v) + A*eta + B")).is_zero());
  Expr r = reduction_exactness(parse("eta^2/(2*sqrt(v)) + A*eta + B + eta^3"));
  CHECK_FALSE(r.is_zero());
  Expr numeric = substitute(translation_candidate(1), {{Symbol::param("v"), Expr(1)}, {Symbol::param("A"), parse("3/10")},
                                                       {Symbol::param("B"), Expr(-1)}});
  Expr res = substitute(reduction_exactness(numeric), {{Symbol::param("v"), Expr(1)}, {Symbol::param("h"), parse("1/2")}});
  CHECK(std::abs(eval_numeric(res, {{Symbol::param("eta"), Complex(0.7)}})) < 1e-12);
}

TEST_CASE("dilation reduction agrees to second order") {
  OrderReport r = reduction_order(dilation_candidate());
  CHECK(r.slope >= 1.8);
  CHECK(r.slope <= 2.2);
  OrderReport q = reduction_order(parse("s^4"));
  CHECK(q.slope == doctest::Approx(2.0).epsilon(0.01));
  CHECK_THROWS_AS(reduction_order(parse("s^3")), DomainError);
  CHECK_THROWS_AS(reduction_order(parse("s")), DomainError);
}

TEST_CASE("eta lattice") {
  CHECK(eta_lattice_check(1, 5, 0, 20).pass);
  CHECK(eta_lattice_check(0, 1, 0, 20).pass);
  CHECK(std::abs(eta_residual(2, 9, 28)) > 1e-3L);
  CHECK_THROWS_AS(eta_lattice_check(-1, 5, 0, 20), DomainError);
}

TEST_CASE("emitters") {
  LatticeTrajectory u = lattice_generator(LatticeKind::Uniform, {1, 5}, 0, 2);
  CHECK(trajectory_csv(u) == "n,x,u_re,u_im\n0,5,0,0\n1,6,0,0\n2,7,0,0\n");
  CHECK(trajectory_csv(LatticeTrajectory{}) == "n,x,u_re,u_im\n");
  LatticeTrajectory m = lattice_generator(LatticeKind::Moebius, {std::sqrt(2.0L), -std::sqrt(3.0L), 3, -std::sqrt(3.0L) * std::acos(-1.0L)}, -10, 10);
  std::string svg = trajectory_svg(m);
  std::size_t circles = 0;
  for (std::size_t pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  CHECK(circles == 21);
  CHECK(svg == trajectory_svg(m));
  CHECK(svg.find("width=\"640\" height=\"480\"") != std::string::npos);
}
