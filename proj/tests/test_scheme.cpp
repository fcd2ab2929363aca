#include "doctest.h"
#include "deltasym/normal_form.hpp"
#include "deltasym/scheme.hpp"

using namespace deltasym;

namespace {

const char* kPoly = R"(
[scheme]
name = poly
kind = difference
[equations]
E = (u[1]-2*u[0]+u[-1])/(x[1]-x[0])^2 - u[0]^N
Omega = x[1]-2*x[0]+x[-1]
[params]
N: exclude 0,1; range -4..4
)";

const char* kFourPoint = R"(
[equations]
E = u[2]-3*u[1]+3*u[0]-u[-1]
Omega = x[2]-3*x[1]+3*x[0]-x[-1]
)";

const char* kVolterra = R"(
[scheme]
kind = ddelta
[equations]
E = ut + u[0]*(u[1]-u[-1])/(x[1]-x[-1])
Omega = x[1]-2*x[0]+x[-1]
)";

bool same_value(const Expr& a, const Expr& b) { return normalizes_to_zero(a - b); }

}  // namespace

TEST_CASE("stencil extents") {
  Scheme p = parse_scheme(kPoly);
  CHECK(p.M() == 1);
  CHECK(p.N() == 1);
  CHECK(p.kind() == SchemeKind::Difference);
  REQUIRE(p.param("N") != nullptr);
  CHECK(p.param("N")->exclude.size() == 2);
  CHECK(p.param("N")->lo == -4);

  Scheme f = parse_scheme(kFourPoint);
  CHECK(f.M() == 1);
  CHECK(f.N() == 2);
}

TEST_CASE("differential-difference elimination targets ut") {
  Scheme v = parse_scheme(kVolterra);
  CHECK(v.is_ddelta());
  CHECK(v.plan().eliminates(Symbol::ut()));
  CHECK(v.plan().eliminates(Symbol::x(1)));
  CHECK(same_value(on_shell(v, parse("ut")), parse("-u[0]*(u[1]-u[-1])/(x[0]-x[-1])/2")));
  CHECK_THROWS_AS(on_shell(v, parse("utt")), SchemeError);
}

TEST_CASE("back-substitution annihilates the scheme") {
  for (const char* text : {kPoly, kFourPoint, kVolterra}) {
    Scheme s = parse_scheme(text);
    for (const Relation& r : s.relations()) CHECK(on_shell(s, r.expr).is_zero());
    CHECK(on_shell(s, s.omega()).is_zero());
  }
  Scheme f = parse_scheme(kFourPoint);
  // Four-point E is solved for u[2]; Omega supplies x[2].
  CHECK(f.plan().eliminates(Symbol::u(2)));
  CHECK(f.plan().eliminates(Symbol::x(2)));
}

TEST_CASE("on-shell shifted point") {
  Scheme p = parse_scheme(kPoly);
  CHECK(on_shell(p, parse("x[1]")).same(normalize(parse("2*x[0]-x[-1]"))));
  Expr once = on_shell(p, parse("u[1]*x[1]"));
  CHECK(on_shell(p, once).same(once));
}

TEST_CASE("solvability determinants") {
  Rng rng(7);
  CHECK(check_solvability(parse_scheme(kPoly), 10, rng).pass());
  CHECK(check_solvability(parse_scheme(kFourPoint), 10, rng).pass());
  CHECK_THROWS_AS(parse_scheme("[equations]\nE = u[1]-u[0]\nOmega = u[1]-u[0]\n"), SchemeError);
  Scheme degenerate("deg", SchemeKind::Difference, parse("u[1]-u[0]"), parse("u[1]-u[0]+x[0]-x[0]"),
                    {}, EliminationPlan{{{Symbol::u(1), u(0)}}});
  CHECK_FALSE(check_solvability(degenerate, 5, rng).pass());
}

TEST_CASE("malformed scheme files") {
  CHECK_THROWS_AS(parse_scheme("[equations]\nE = u[1]\n"), SchemeError);
  CHECK_THROWS_AS(parse_scheme("[equations]\nE = u[1]-u[0]\nOmega = x[1]-x[0]-ut\n"), SchemeError);
  CHECK_THROWS_AS(parse_scheme("[bogus]\n"), SchemeError);
  CHECK_THROWS_AS(parse_scheme("[equations]\nE = u[1]-(\nOmega = x[1]-x[0]-1\n"), SchemeError);
  // A supplied elimination that does not solve E.
  CHECK_THROWS_AS(parse_scheme("[equations]\nE = u[1]-2*u[0]\nOmega = x[1]-x[0]-1\n"
                               "[elimination]\nu[1] = 3*u[0]\nx[1] = x[0]+1\n"),
                  SchemeError);
  CHECK_THROWS_AS(load_scheme("/nonexistent/file.scm"), SchemeError);
}

TEST_CASE("parameter bindings") {
  Scheme p = parse_scheme("[equations]\nE = (u[1]-2*u[0]+u[-1])/(x[1]-x[0])^2 - u[0]^N\n"
                          "Omega = x[1]-2*x[0]+x[-1]\n[params]\nN = 3\n");
  CHECK(free_symbols(p.E()).count(Symbol::param("N")) == 0);
}

TEST_CASE("discrete derivatives") {
  Bindings quad, cube;
  for (int k = -1; k <= 2; ++k) {
    quad[Symbol::u(k)] = pow(x(k), Expr(2));
    cube[Symbol::u(k)] = pow(x(k), Expr(3));
  }
  CHECK(normalize(substitute(discrete_derivative(DiscreteDerivative::UxxCentered), quad)).same(Expr(2)));
  CHECK(normalize(substitute(discrete_derivative(DiscreteDerivative::UxxForward), quad)).same(Expr(2)));
  CHECK(normalize(substitute(discrete_derivative(DiscreteDerivative::Uxxx), cube)).same(Expr(6)));
  ExactEnv env{{Symbol::x(0), 0}, {Symbol::x(1), 1}, {Symbol::u(0), 0}, {Symbol::u(1), 5}};
  CHECK(*eval_exact(discrete_derivative(DiscreteDerivative::Ux), env) == 5);
  CHECK(discrete_derivative_from_name("u_x_xxbar") == DiscreteDerivative::Uxxx);
}

TEST_CASE("second difference converges on a smooth function") {
  // u = exp(x) on a uniform lattice at x = 0.3.
  double x0 = 0.3;
  double prev = 0;
  double h = 0.1;
  Expr d = discrete_derivative(DiscreteDerivative::UxxCentered);
  for (int i = 0; i < 4; ++i, h /= 2) {
    NumericEnv env;
    for (int k = -1; k <= 1; ++k) {
      env[Symbol::x(k)] = x0 + k * h;
      env[Symbol::u(k)] = std::exp(x0 + k * h);
    }
    double err = std::abs(eval_numeric(d, env).real() - std::exp(x0));
    if (i > 0) {
      double order = std::log2(prev / err);
      CHECK(order >= 0.8);
      CHECK(order <= 2.2);
    }
    prev = err;
  }
}

TEST_CASE("on-shell sampler respects the plan") {
  Scheme p = parse_scheme(kPoly);
  OnShellSampler s(p);
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    NumericEnv env = s.sample(rng);
    CHECK(std::abs(eval_numeric(p.E(), env)) < 1e-9);
    CHECK(std::abs(eval_numeric(p.omega(), env)) < 1e-9);
    double n = env.at(Symbol::param("N")).real();
    CHECK(std::abs(n) > 1e-3);
    CHECK(std::abs(n - 1) > 1e-3);
  }
  Scheme f = parse_scheme(kFourPoint);
  auto ex = OnShellSampler(f).sample_exact(rng);
  REQUIRE(ex.has_value());
  CHECK(*eval_exact(f.E(), *ex) == 0);
}
