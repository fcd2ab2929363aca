// Acceptance suite: one PASS/FAIL line per criterion; exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "deltasym/cli.hpp"
#include "deltasym/lattice.hpp"
#include "deltasym/liealg.hpp"
#include "deltasym/normal_form.hpp"
#include "deltasym/prolong.hpp"

using namespace deltasym;

namespace {

// Pinned tolerances.
constexpr double kVerifyTol = 1e-9;
constexpr long double kExactSolutionTol = 1e-10L;
constexpr long double kLogLatticeTol = 1e-12L;
constexpr long double kRatioTol = 1e-12L;
constexpr double kSlopeLo = 1.8;
constexpr double kSlopeHi = 2.2;

std::string golden(const std::string& rel) { return std::string(DELTASYM_SOURCE_DIR) + "/golden/" + rel; }

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail = what;
      pass = false;
    }
  }
};

struct Pair {
  const char* scheme;
  const char* fields;
};

const Pair kCatalog[] = {
    {"poly_n", "poly_n"},           {"poly_nm3", "poly_nm3"},       {"uxx_u", "uxx_u"},
    {"uxx_u_fixed", "uxx_u_fixed"}, {"uxx_one", "uxx_one"},         {"uxxx_uniform", "uxxx_uniform"},
    {"uxxx_fourpoint", "uxxx_fourpoint"}, {"poly_invariant", "poly_invariant"}, {"uxxx_invariant", "uxxx_full"},
    {"volterra", "volterra"},       {"cubic", "cubic"},             {"no_limit", "no_limit"},
};

Outcome criterion1() {
  Outcome o;
  int total = 0;
  for (const Pair& p : kCatalog) {
    Scheme s = load_scheme(golden(std::string("schemes/") + p.scheme + ".scm"));
    DeterminingSystem ds(s);
    Rng rng = Rng::derive(0, std::string("acceptance/verify/") + p.scheme);
    for (const VectorField& f : load_fields(golden(std::string("fields/") + p.fields + ".fields"))) {
      VerifyResult r = verify_symmetry(f, ds, rng, kVerifyTol);
      o.check(r.holds, std::string(p.scheme) + ": " + f.name + " fails");
      ++total;
    }
  }
  if (o.pass) o.detail = std::to_string(total) + " fields over 12 (scheme, basis) pairs hold";
  return o;
}

Outcome criterion2() {
  Outcome o;
  struct Case {
    const char* scheme;
    std::size_t dim;
  };
  const Case cases[] = {{"poly_n3", 2}, {"uxx_u_fixed", 4}, {"uxx_one", 6}, {"uxxx_fourpoint", 6},
                        {"volterra", 4}, {"cubic", 9},       {"no_limit", 9}};
  std::string dims;
  for (const Case& c : cases) {
    Scheme s = load_scheme(golden(std::string("schemes/") + c.scheme + ".scm"));
    Rng rng = Rng::derive(0, std::string("acceptance/find/") + c.scheme);
    FindResult r = find_symmetries(s, load_ansatz(golden(std::string("ansatz/") + c.scheme + ".ansatz")), rng);
    dims += (dims.empty() ? "" : ", ") + std::to_string(r.basis.size());
    o.check(r.basis.size() == c.dim, std::string(c.scheme) + ": dimension " + std::to_string(r.basis.size()));
    o.check(r.rejected.empty(), std::string(c.scheme) + ": rejected fields");
  }
  if (o.pass) o.detail = "dimensions " + dims;
  return o;
}

Outcome criterion3() {
  Outcome o;
  // u_xx = u on the uniform lattice, h = 0.1, 100 steps, against K_+^x + K_-^x.
  Scheme s = load_scheme(golden("schemes/uxx_u.scm"));
  Expr h = parse("1/10");
  Expr sol = pow(k_pm(h, 1), parse("x[0]")) + pow(k_pm(h, -1), parse("x[0]"));
  LatticeTrajectory t = integrate(s, seeds_from({parse("0"), h}, sol), 100);
  const long double hl = 0.1L;
  auto kpm = [&](int sign) { return std::pow((2 + hl * hl + sign * hl * std::sqrt(4 + hl * hl)) / 2, 1 / hl); };
  long double err = 0;
  for (const auto& p : t.points) err = std::max(err, std::abs(p.u - ComplexL(std::pow(kpm(1), p.x) + std::pow(kpm(-1), p.x))));
  o.check(t.points.size() == 102 && err < kExactSolutionTol, "uniform lattice error " + std::to_string(static_cast<double>(err)));

  // Logarithmic lattice, c1 = c2 = c3 = 1, c4 = 10.
  Scheme l = load_scheme(golden("schemes/uxx_u_log.scm"));
  LatticeTrajectory tl = integrate(l, seeds_from({parse("-ln(10)/2"), parse("-ln(11)/2")}, parse("exp(x[0]) + exp(-x[0])")), 60);
  long double lerr = 0;
  for (const auto& p : tl.points) {
    LogLatticeValue v = log_lattice_solution(1, 1, 1, 10, p.n);
    lerr = std::max(lerr, std::abs(p.u - ComplexL(v.direct)));
    lerr = std::max(lerr, std::abs(p.x + std::log(static_cast<long double>(p.n) + 10) / 2));
  }
  o.check(lerr < kLogLatticeTol, "log lattice error " + std::to_string(static_cast<double>(lerr)));
  char buf[160];
  std::snprintf(buf, sizeof buf, "uniform max error %.3Le over %zu nodes; log lattice max error %.3Le over %zu nodes", err,
                t.points.size(), lerr, tl.points.size());
  if (o.pass) o.detail = buf;
  return o;
}

Outcome criterion4() {
  Outcome o;
  const long double pi = std::acos(-1.0L), r2 = std::sqrt(2.0L), r3 = std::sqrt(3.0L);
  struct Set {
    std::vector<long double> p;
    long lo, hi;
  };
  const Set sets[] = {
      {{2, 1, 1, 1}, 0, 20},            // det 1
      {{1, 0, 0.3L, 1}, -10, 10},       // det 1, nodes on both sides of the pole
      {{3, -1, 7, -2}, 1, 25},          // det 1
      {{r2, -r3, 3, -r3 * pi}, -10, 10},  // det ~ -2.5, not normalized to 1
  };
  long double dev = 0;
  std::size_t nodes = 0;
  for (const Set& s : sets) {
    LatticeTrajectory t = lattice_generator(LatticeKind::Moebius, s.p, s.lo, s.hi);
    for (long double K : anharmonic_ratios(t)) {
      dev = std::max(dev, std::abs(K - 4));
      ++nodes;
    }
  }
  o.check(dev <= kRatioTol, "max |K - 4| = " + std::to_string(static_cast<double>(dev)));
  char buf[120];
  std::snprintf(buf, sizeof buf, "max |K - 4| = %.3Le over %zu interior nodes", dev, nodes);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome criterion5() {
  Outcome o;
  Expr plus = reduction_exactness(translation_candidate(1));
  Expr minus = reduction_exactness(translation_candidate(-1));
  o.check(plus.is_zero(), "sign +1 residual " + to_string(plus));
  o.check(minus.is_zero(), "sign -1 residual " + to_string(minus));
  if (o.pass) o.detail = "residual 0 for sign +1 and sign -1";
  return o;
}

Outcome criterion6() {
  Outcome o;
  OrderReport r = reduction_order(dilation_candidate(), {0.1, 0.05, 0.025, 0.0125});
  o.check(r.slope >= kSlopeLo && r.slope <= kSlopeHi, "slope " + std::to_string(r.slope));
  char buf[80];
  std::snprintf(buf, sizeof buf, "slope %.4f", r.slope);
  if (o.pass) o.detail = buf;
  return o;
}

std::map<std::tuple<int, int, int>, Expr> table(const std::string& csv) {
  std::map<std::tuple<int, int, int>, Expr> t;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int i, j, k;
    char rest[256];
    if (std::sscanf(line.c_str(), "%d,%d,%d,%255s", &i, &j, &k, rest) == 4) t[{i, j, k}] = parse(rest);
  }
  return t;
}

bool same_table(const std::string& a, const std::string& b) {
  auto ta = table(a), tb = table(b);
  if (ta.size() != tb.size()) return false;
  for (const auto& [k, v] : ta) {
    auto it = tb.find(k);
    if (it == tb.end() || !normalizes_to_zero(v - it->second)) return false;
  }
  return true;
}

Outcome criterion7() {
  Outcome o;
  const char* bases[] = {"poly_n", "poly_nm3", "poly_n3", "poly_invariant", "uxx_u", "uxx_u_fixed", "sl3", "sl3_manifold",
                         "uxx_one", "uxxx_uniform", "uxxx_fourpoint", "uxxx_full", "volterra", "cubic", "no_limit"};
  for (const char* name : bases) {
    Rng rng = Rng::derive(0, std::string("acceptance/brackets/") + name);
    SymmetryBasis b = close_and_constants(load_fields(golden(std::string("fields/") + name + ".fields")), rng);
    o.check(b.closed, std::string(name) + " does not close");
    o.check(b.closed && antisymmetry_check(b), std::string(name) + " antisymmetry");
    o.check(b.closed && jacobi_check(b), std::string(name) + " Jacobi");
    if (std::string(name) == "sl3") o.check(b.c.size() * b.c.size() == 64, "sl3 table size");
    if (std::string(name) == "cubic" || std::string(name) == "uxx_one") {
      o.check(same_table(bracket_table_csv(b), read(golden(std::string("brackets/") + name + ".csv"))),
              std::string(name) + " table differs from golden CSV");
    }
  }
  if (o.pass) o.detail = "15 bases antisymmetric and Jacobi; 2 golden tables match; sl3 table 64 entries";
  return o;
}

Outcome criterion8() {
  Outcome o;
  Expr I = parse(
      "-(u[1]-u[0])*(x[2]-x[0])*(x[0]-x[-1])*(x[2]-x[-1]) + (u[2]-u[0])*(x[1]-x[0])*(x[0]-x[-1])*(x[1]-x[-1]) + "
      "(u[0]-u[-1])*(x[1]-x[0])*(x[2]-x[0])*(x[2]-x[1])");
  Bindings b;
  for (int k = -1; k <= 2; ++k) {
    b[Symbol::u(k)] = substitute(parse("c2*x[0]^2 + c1*x[0] + c0"), {{Symbol::x(0), Expr(Symbol::x(k))}});
  }
  Expr r = normalize(substitute(I, b));
  o.check(r.is_zero(), "residual " + to_string(r));
  // The same substitution with a cubic term does not vanish.
  Bindings c;
  for (int k = -1; k <= 2; ++k) c[Symbol::u(k)] = pow(Expr(Symbol::x(k)), Expr(3));
  o.check(!normalizes_to_zero(substitute(I, c)), "cubic control vanishes");
  if (o.pass) o.detail = "I normalizes to 0 for u = c2 x^2 + c1 x + c0 (cubic control nonzero)";
  return o;
}

Outcome criterion9() {
  Outcome o;
  struct Control {
    const char* scheme;
    const char* fields;
  };
  for (const Control& c : {Control{"uxxx_fourpoint", "uxxx_fourpoint_bad"}, Control{"poly_n", "poly_bad"}}) {
    std::ostringstream out, err;
    int code = cli::run({"verify", golden(std::string("schemes/") + c.scheme + ".scm"),
                         golden(std::string("fields/") + c.fields + ".fields")},
                        out, err);
    o.check(code == cli::kClaimFails, std::string(c.scheme) + ": exit code " + std::to_string(code));
    o.check(out.str().find("FAILS") != std::string::npos && out.str().find("witness") != std::string::npos,
            std::string(c.scheme) + ": no witness");
  }
  if (o.pass) o.detail = "x^2 d_u and d_u both fail with witnesses, exit code 1";
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::ostringstream a, b, ea, eb;
  int ca = cli::run({"--seed", "0", "catalog"}, a, ea);
  int cb = cli::run({"--seed", "0", "catalog"}, b, eb);
  o.check(a.str() == b.str() && !a.str().empty(), "reports differ");
  o.check(ca == cb, "exit codes differ");
  if (o.pass) o.detail = std::to_string(a.str().size()) + " identical bytes, exit code " + std::to_string(ca);
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"symmetry verification catalog", criterion1},
      {"finder dimensions", criterion2},
      {"exact solution reproduction", criterion3},
      {"anharmonic ratio", criterion4},
      {"translation reduction", criterion5},
      {"dilation reduction order", criterion6},
      {"Lie algebra properties", criterion7},
      {"quadratic kernel", criterion8},
      {"negative controls", criterion9},
      {"determinism", criterion10},
  };
  int failed = 0, index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria pass\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
