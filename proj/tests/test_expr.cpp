#include "doctest.h"
#include "deltasym/expr.hpp"
#include "deltasym/normal_form.hpp"

using namespace deltasym;

TEST_CASE("parse and print round trip") {
  for (const char* s : {"x[1] - x[0]", "u[-1]^2*(x[1] - x[0])/(x[0] - x[-1])",
                        "exp(u[0])*sin(x[0])", "a*u[0]^N", "sqrt(u[0]^2 + 1)",
                        "-3/2*x[0]^(1/2)", "ut*ux - uxt", "2.5e-1*t"}) {
    Expr e = parse(s);
    Expr back = parse(to_string(e));
    CHECK(normalizes_to_zero(e - back));
  }
}

TEST_CASE("bare variables mean the current node") {
  CHECK(parse("x").same(x(0)));
  CHECK(parse("u").same(u(0)));
  CHECK(to_string(parse("x")) == "x[0]");
}

TEST_CASE("parse errors carry an offset") {
  try {
    parse("x[0] + foo(1)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 7);
  }
  CHECK_THROWS_AS(parse("x[1.5]"), ParseError);
  CHECK_THROWS_AS(parse("a[1]"), ParseError);
  CHECK_THROWS_AS(parse("(x[0]"), ParseError);
  CHECK_THROWS_AS(parse("x[0] +"), ParseError);
  CHECK_THROWS_AS(parse("sin"), ParseError);
}

TEST_CASE("decimal literals are exact") {
  CHECK(parse("0.1").value() == Rational(1, 10));
  CHECK(parse("1e3").value() == Rational(1000));
}

TEST_CASE("differentiation") {
  Expr e = parse("u[0]^3*x[1] + sin(u[0])");
  Expr d = diff(e, Symbol::u(0));
  CHECK(normalizes_to_zero(d - parse("3*u[0]^2*x[1] + cos(u[0])")));
  Expr p = parse("u[0]^N");
  CHECK(normalizes_to_zero(diff(p, Symbol::u(0)) - parse("N*u[0]^(N - 1)")));
  CHECK(normalizes_to_zero(diff(parse("ln(x[0])"), Symbol::x(0)) - parse("1/x[0]")));
}

TEST_CASE("shift moves lattice indices only") {
  Expr e = parse("u[1]*x[-1] + t + a");
  CHECK(normalizes_to_zero(shift(e, 2) - parse("u[3]*x[1] + t + a")));
  auto r = shift_range(e);
  REQUIRE(r);
  CHECK(r->first == -1);
  CHECK(r->second == 1);
}

TEST_CASE("substitution is simultaneous") {
  Bindings b{{Symbol::x(0), x(1)}, {Symbol::x(1), x(0)}};
  Expr e = substitute(parse("x[0] - 2*x[1]"), b);
  CHECK(normalizes_to_zero(e - parse("x[1] - 2*x[0]")));
}

TEST_CASE("numeric and exact evaluation") {
  Expr e = parse("u[0]^2/(x[1] - x[0])");
  ExactEnv env{{Symbol::u(0), 3}, {Symbol::x(1), 2}, {Symbol::x(0), Rational(1, 2)}};
  auto v = eval_exact(e, env);
  REQUIRE(v);
  CHECK(*v == 6);
  NumericEnv nenv{{Symbol::u(0), 3.0}, {Symbol::x(1), 2.0}, {Symbol::x(0), 0.5}};
  CHECK(std::abs(eval_numeric(e, nenv) - Complex(6.0)) < 1e-14);
  CHECK_FALSE(eval_exact(parse("sqrt(x[0])"), env));
  ExactEnv zero{{Symbol::u(0), 1}, {Symbol::x(1), 1}, {Symbol::x(0), 1}};
  CHECK_THROWS_AS(eval_exact(e, zero), ZeroDenominator);
  CHECK_THROWS_AS(eval_numeric(parse("x[0] + b"), nenv), MissingBinding);
}
