#include "doctest.h"
#include "deltasym/liealg.hpp"
#include "deltasym/normal_form.hpp"

using namespace deltasym;

namespace {

std::string golden(const std::string& rel) { return std::string(DELTASYM_SOURCE_DIR) + "/golden/" + rel; }

VectorField field(const char* name, const char* xi, const char* tau, const char* phi) {
  return VectorField::make(name, parse(xi), parse(tau), parse(phi));
}

bool same(const Expr& a, const char* b) { return normalizes_to_zero(a - parse(b)); }

}  // namespace

TEST_CASE("brackets of simple fields") {
  VectorField br = bracket(field("P", "1", "0", "0"), field("D", "x", "0", "0"));
  CHECK(same(br.xi, "1"));
  CHECK(br.tau.is_zero());
  CHECK(br.phi.is_zero());

  VectorField tt = bracket(field("T", "0", "t", "0"), field("Q", "0", "t^2", "u"));
  CHECK(same(tt.tau, "t^2"));
  CHECK(tt.phi.is_zero());
}

TEST_CASE("structure constants of the sl(2) realization") {
  Rng rng(1);
  SymmetryBasis b = close_and_constants(load_fields(golden("fields/poly_invariant.fields")), rng);
  REQUIRE(b.closed);
  // P, D, C: [D, C] = 2C, [P, C] = D, [P, D] = 2P.
  CHECK(same(b.c[1][2][2], "2"));
  CHECK(same(b.c[0][2][1], "1"));
  CHECK(same(b.c[0][1][0], "2"));
  CHECK(same(b.c[2][1][2], "-2"));
  CHECK(antisymmetry_check(b));
  CHECK(jacobi_check(b));
  CHECK(bracket_table_csv(b).rfind("i,j,k,value\n", 0) == 0);
}

TEST_CASE("symbolic structure constants") {
  Rng rng(2);
  SymmetryBasis b = close_and_constants(load_fields(golden("fields/poly_n.fields")), rng);
  REQUIRE(b.closed);
  CHECK(same(b.c[0][1][0], "N - 1"));
  CHECK(same(b.c[1][0][0], "1 - N"));
  CHECK(b.c[0][1][1].is_zero());
  CHECK(antisymmetry_check(b));
  CHECK(jacobi_check(b));
  CHECK(bracket_table_text(b).find("(N - 1)*P") != std::string::npos);
}

TEST_CASE("sl(3) closes") {
  Rng rng(3);
  SymmetryBasis b = close_and_constants(load_fields(golden("fields/sl3.fields")), rng);
  REQUIRE(b.closed);
  CHECK(b.c.size() == 8);
  CHECK(antisymmetry_check(b));
  CHECK(jacobi_check(b));
  // [X1, X5] = 2 X5, [X5, X7] = -4 X1 + ... contains X1
  CHECK(same(b.c[0][4][4], "2"));
  CHECK(same(b.c[2][3][1], "0"));
}

TEST_CASE("parameter-dependent exponents close") {
  Rng rng(4);
  SymmetryBasis b = close_and_constants(load_fields(golden("fields/uxx_u_fixed.fields")), rng);
  REQUIRE(b.closed);
  CHECK(same(b.c[0][2][2], "ln((2 + h^2 + h*sqrt(4 + h^2))/2)/h"));
  CHECK(same(b.c[1][2][2], "-1"));
  CHECK(jacobi_check(b));
}

TEST_CASE("non-closing and dependent sets") {
  Rng rng(5);
  SymmetryBasis b = close_and_constants({field("P", "1", "0", "0"), field("C", "x^2", "0", "0")}, rng);
  CHECK_FALSE(b.closed);
  REQUIRE(b.offending.has_value());
  CHECK(b.offending->first == 0);
  CHECK(b.offending->second == 1);
  CHECK_FALSE(jacobi_check(b));

  CHECK_THROWS_AS(close_and_constants({field("A", "x", "0", "u"), field("B", "2*x", "0", "2*u")}, rng),
                  DependentBasis);
}

TEST_CASE("permuting the basis permutes the constants") {
  Rng rng(6);
  auto fields = load_fields(golden("fields/sl3.fields"));
  std::vector<int> perm = {4, 0, 7, 2, 6, 1, 5, 3};
  std::vector<VectorField> permuted;
  for (int p : perm) permuted.push_back(fields[p]);
  SymmetryBasis a = close_and_constants(fields, rng);
  SymmetryBasis b = close_and_constants(permuted, rng);
  REQUIRE(a.closed);
  REQUIRE(b.closed);
  bool ok = true;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      for (int k = 0; k < 8; ++k) ok = ok && normalizes_to_zero(b.c[i][j][k] - a.c[perm[i]][perm[j]][perm[k]]);
    }
  }
  CHECK(ok);
}

TEST_CASE("brackets of the nine-dimensional algebra") {
  auto f = load_fields(golden("fields/cubic.fields"));
  // P0, P1, D1, D2, C, W1..W4
  VectorField d1c = bracket(f[2], f[4]);
  CHECK(same(d1c.tau, "2*t^2"));
  CHECK(same(d1c.phi, "2*t*u"));
  VectorField p0c = bracket(f[0], f[4]);
  CHECK(same(p0c.tau, "2*t"));
  CHECK(same(p0c.phi, "u"));
  for (const auto& X : f) {
    for (const auto& Y : f) CHECK(free_symbols(bracket(X, Y).tau).count(Symbol::x(0)) == 0);
  }
}

TEST_CASE("bracket antisymmetry on random fields") {
  Rng rng(11);
  const char* pool[] = {"x", "u", "x*u", "x^2", "t*u", "exp(x)", "u^2", "1", "t*x", "sqrt(x)"};
  const char* tpool[] = {"1", "t", "t^2", "0"};
  for (int trial = 0; trial < 10; ++trial) {
    auto pick = [&](const char* const* p, std::size_t n) { return p[rng.below(n)]; };
    VectorField X = field("X", pick(pool, 10), pick(tpool, 4), pick(pool, 10));
    VectorField Y = field("Y", pick(pool, 10), pick(tpool, 4), pick(pool, 10));
    VectorField a = bracket(X, Y), b = bracket(Y, X);
    CHECK(normalizes_to_zero(a.xi + b.xi));
    CHECK(normalizes_to_zero(a.tau + b.tau));
    CHECK(normalizes_to_zero(a.phi + b.phi));
    CHECK(bracket(X, X).is_zero());
  }
}

TEST_CASE("two-element closed bases satisfy Jacobi") {
  Rng rng(12);
  SymmetryBasis b = close_and_constants({field("P", "1", "0", "0"), field("D", "x", "0", "u")}, rng);
  REQUIRE(b.closed);
  CHECK(jacobi_check(b));
}

TEST_CASE("permuting the Volterra basis permutes the constants") {
  Rng rng(13);
  auto fields = load_fields(golden("fields/volterra.fields"));
  std::vector<int> perm = {3, 1, 0, 2};
  std::vector<VectorField> permuted;
  for (int p : perm) permuted.push_back(fields[p]);
  SymmetryBasis a = close_and_constants(fields, rng);
  SymmetryBasis b = close_and_constants(permuted, rng);
  REQUIRE(a.closed);
  REQUIRE(b.closed);
  bool ok = true;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) ok = ok && normalizes_to_zero(b.c[i][j][k] - a.c[perm[i]][perm[j]][perm[k]]);
    }
  }
  CHECK(ok);
}
