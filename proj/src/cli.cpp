#include "deltasym/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "deltasym/lattice.hpp"
#include "deltasym/liealg.hpp"
#include "deltasym/normal_form.hpp"
#include "deltasym/prolong.hpp"
#include "deltasym/scheme.hpp"

#ifndef DELTASYM_GOLDEN_DEFAULT
#define DELTASYM_GOLDEN_DEFAULT "golden"
#endif

namespace deltasym::cli {

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

struct Global {
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::string format = "text";
  bool csv() const { return format == "csv"; }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string num(Complex z) {
  if (z.imag() == 0) return num(z.real());
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

std::string point_string(const NumericEnv& env) {
  std::string out;
  for (const auto& [s, v] : env) {
    if (!out.empty()) out += ", ";
    out += s.str() + "=" + num(v);
  }
  return out;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::pair<long, long> parse_range(const std::string& s) {
  auto pos = s.find("..");
  if (pos == std::string::npos) throw InputError("range must look like lo..hi: " + s);
  try {
    return {std::stol(s.substr(0, pos)), std::stol(s.substr(pos + 2))};
  } catch (const std::exception&) {
    throw InputError("bad range: " + s);
  }
}

// Numeric value of a constant expression; the symbol pi is understood.
long double constant_value(const std::string& text) {
  Expr e = parse(text);
  NumericEnvL env{{Symbol::param("pi"), ComplexL(std::acos(-1.0L))}};
  for (const Symbol& s : free_symbols(e)) {
    if (!env.count(s)) throw InputError("not a constant: " + text);
  }
  ComplexL v = eval_numeric_l(e, env);
  if (v.imag() != 0) throw InputError("not a real constant: " + text);
  return v.real();
}

// ------------------------------------------------------------------ verify

int cmd_verify(const Global& g, const std::string& scheme_path, const std::string& fields_path, std::ostream& out) {
  Scheme s = load_scheme(scheme_path);
  auto fields = load_fields(fields_path);
  if (fields.empty()) throw InputError(fields_path + ": no vector fields");
  DeterminingSystem ds(s);
  Rng rng = Rng::derive(g.seed, "verify/" + s.name());
  int holds = 0;
  if (g.csv()) out << "field,holds,exact,component,residual,scale\n";
  else out << "scheme " << s.name() << ": " << fields.size() << (fields.size() == 1 ? " field\n" : " fields\n");
  for (const auto& f : fields) {
    VerifyResult r = verify_symmetry(f, ds, rng, g.tol);
    if (r.holds) ++holds;
    if (g.csv()) {
      out << f.name << "," << (r.holds ? "yes" : "no") << "," << (r.exact ? "yes" : "no") << ","
          << (r.witness ? r.witness->component : "") << "," << (r.witness ? num(r.witness->residual) : "") << ","
          << (r.witness ? num(r.witness->scale) : "") << "\n";
      continue;
    }
    out << "  " << f.name << ": " << (r.holds ? "holds" : "FAILS") << (r.exact ? " (exact)" : " (sampled)");
    if (r.witness) {
      out << "\n    witness: component " << r.witness->component << ", residual " << num(r.witness->residual)
          << ", scale " << num(r.witness->scale) << "\n    at " << point_string(r.witness->point);
    }
    out << "\n";
  }
  if (!g.csv()) out << holds << "/" << fields.size() << " hold\n";
  return holds == static_cast<int>(fields.size()) ? kOk : kClaimFails;
}

// ------------------------------------------------------------------ brackets

void print_brackets(const Global& g, const SymmetryBasis& b, std::ostream& out) {
  if (g.csv()) {
    out << bracket_table_csv(b);
    return;
  }
  if (!b.closed) {
    out << "brackets: not closed, [" << b.fields[b.offending->first].name << ", "
        << b.fields[b.offending->second].name << "] lies outside the span\n";
    return;
  }
  out << "brackets: closed, antisymmetry " << (antisymmetry_check(b) ? "ok" : "FAILS") << ", Jacobi "
      << (jacobi_check(b) ? "ok" : "FAILS") << "\n";
  out << bracket_table_text(b);
}

int cmd_bracket_table(const Global& g, const std::string& fields_path, std::ostream& out) {
  auto fields = load_fields(fields_path);
  if (fields.empty()) throw InputError(fields_path + ": no vector fields");
  Rng rng = Rng::derive(g.seed, "bracket-table");
  SymmetryBasis b = close_and_constants(fields, rng);
  print_brackets(g, b, out);
  return b.closed && antisymmetry_check(b) && jacobi_check(b) ? kOk : kClaimFails;
}

// ------------------------------------------------------------------ find

int cmd_find(const Global& g, const std::string& scheme_path, const std::string& ansatz_path, std::ostream& out) {
  Scheme s = load_scheme(scheme_path);
  auto ansatz = load_ansatz(ansatz_path);
  if (ansatz.empty()) throw InputError(ansatz_path + ": empty ansatz");
  Rng rng = Rng::derive(g.seed, "find/" + s.name());
  FindResult r = find_symmetries(s, ansatz, rng, g.tol);
  if (!g.csv()) {
    out << "scheme " << s.name() << ": " << r.coefficients << " ansatz coefficients, rank " << r.rank << " ("
        << (r.exact ? "exact rational" : "floating-point") << " elimination)\n";
  }
  out << "dimension " << r.basis.size() << "\n";
  for (const auto& f : r.basis) out << to_string(f) << "\n";
  for (const auto& f : r.rejected) out << "# rejected on re-verification: " << to_string(f) << "\n";
  if (!r.basis.empty()) {
    Rng brng = Rng::derive(g.seed, "find-brackets/" + s.name());
    print_brackets(g, close_and_constants(r.basis, brng), out);
  }
  return r.rejected.empty() ? kOk : kClaimFails;
}

// ------------------------------------------------------------------ invariants

int cmd_invariant_check(const Global& g, const std::string& fields_path, const std::string& q,
                        const std::string& manifold, std::ostream& out) {
  auto fields = load_fields(fields_path);
  Expr qe = parse(q);
  std::optional<Expr> m;
  if (!manifold.empty()) m = manifold == "q" ? qe : parse(manifold);
  Rng rng = Rng::derive(g.seed, "invariant-check");
  auto reps = check_invariant_on_manifold(fields, qe, m, rng, g.tol);
  bool ok = true;
  for (const auto& r : reps) {
    out << "  " << r.field << ": " << invariance_name(r.kind);
    if (r.lambda) out << " (lambda = " << to_string(*r.lambda) << ")";
    out << "\n";
    ok = ok && r.kind != Invariance::Fails;
  }
  out << (ok ? "invariant" : "not invariant") << "\n";
  return ok ? kOk : kClaimFails;
}

// ------------------------------------------------------------------ reductions

struct ReduceOutcome {
  bool pass = true;
  std::string report;
};

ReduceOutcome run_reduce(const std::string& which) {
  ReduceOutcome o;
  std::ostringstream os;
  if (which == "all" || which == "translation") {
    for (int sign : {1, -1}) {
      Expr r = reduction_exactness(translation_candidate(sign));
      bool zero = r.is_zero();
      os << "translation sign " << (sign > 0 ? "+1" : "-1") << ": residual " << (zero ? "0 (exact)" : to_string(r))
         << "\n";
      o.pass = o.pass && zero;
    }
  }
  if (which == "all" || which == "dilation") {
    OrderReport r = reduction_order(dilation_candidate());
    bool ok = r.slope >= 1.8 && r.slope <= 2.2;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", r.slope);
    os << "dilation: slope " << buf << " over h =";
    for (double h : r.h) os << " " << num(h);
    os << " (" << (ok ? "PASS" : "FAIL") << ", expected [1.8, 2.2])\n";
    o.pass = o.pass && ok;
  }
  if (which == "all" || which == "eta") {
    EtaReport r = eta_lattice_check(1, 5, 0, 20);
    os << "eta lattice (n + 5)^3, n = 0..20: max residual " << num(static_cast<double>(r.max_residual)) << " ("
       << (r.pass ? "PASS" : "FAIL") << ")\n";
    o.pass = o.pass && r.pass;
  }
  if (which != "all" && which != "translation" && which != "dilation" && which != "eta") {
    throw InputError("unknown reduction case: " + which);
  }
  o.report = os.str();
  return o;
}

// ------------------------------------------------------------------ lattices

struct InitFile {
  long n0 = 0;
  int steps = 100;
  Bindings values;
  std::map<std::string, Expr> params;
  std::optional<Expr> solution;
  std::optional<double> tol;
  bool exact = false;
  std::vector<Expr> xs;
  std::vector<Seed> seeds;
};

// Lines "key: value": n0, steps, param (name = expr), solution (expr in
// x[0]), x (comma-separated seed abscissae, u from solution), seed
// (x=...; u=...), tol, exact (yes/no).
InitFile load_init(const std::string& path) {
  std::istringstream in(read_text_file(path));
  InitFile f;
  std::string line;
  int lineno = 0;
  std::vector<std::pair<Expr, Expr>> raw_seeds;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw InputError(path + ":" + std::to_string(lineno) + ": expected key: value");
    std::string key = trim(line.substr(0, colon)), value = trim(line.substr(colon + 1));
    try {
      if (key == "n0") {
        f.n0 = std::stol(value);
      } else if (key == "steps") {
        f.steps = std::stoi(value);
      } else if (key == "param") {
        auto eq = value.find('=');
        if (eq == std::string::npos) throw InputError("param needs name = value");
        std::string name = trim(value.substr(0, eq));
        Expr v = substitute(parse(trim(value.substr(eq + 1))), f.values);
        f.values[Symbol::param(name)] = v;
        f.params[name] = v;
      } else if (key == "solution") {
        f.solution = substitute(parse(value), f.values);
      } else if (key == "x") {
        for (const auto& part : split(value, ',')) f.xs.push_back(substitute(parse(part), f.values));
      } else if (key == "seed") {
        std::optional<Expr> x, u;
        for (const auto& part : split(value, ';')) {
          auto eq = part.find('=');
          if (eq == std::string::npos) throw InputError("seed needs x=...; u=...");
          std::string k = trim(part.substr(0, eq));
          Expr v = substitute(parse(trim(part.substr(eq + 1))), f.values);
          if (k == "x") x = v;
          else if (k == "u") u = v;
          else throw InputError("seed component must be x or u");
        }
        if (!x || !u) throw InputError("seed needs both x and u");
        f.seeds.push_back({*x, *u});
      } else if (key == "tol") {
        f.tol = std::stod(value);
      } else if (key == "exact") {
        f.exact = value == "yes";
      } else {
        throw InputError("unknown key " + key);
      }
    } catch (const InputError& e) {
      throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::invalid_argument&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  if (!f.xs.empty()) {
    if (!f.solution) throw InputError(path + ": seed abscissae need a solution");
    for (const Seed& s : seeds_from(f.xs, *f.solution)) f.seeds.push_back(s);
  }
  if (f.seeds.empty()) throw InputError(path + ": no seed points");
  return f;
}

std::string emit_format(const Global& g, const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".svg") return "svg";
  if (ext == ".csv") return "csv";
  return g.csv() ? "csv" : "svg";
}

void emit(const Global& g, const LatticeTrajectory& t, const std::string& path, const std::string& note = "") {
  if (path.empty()) return;
  std::string body = emit_format(g, path) == "svg" ? trajectory_svg(t) : trajectory_csv(t);
  if (!note.empty() && emit_format(g, path) == "csv") body += "# " + note + "\n";
  write_file(path, body);
}

struct SolveOutcome {
  int code = kOk;
  std::string report;
  std::optional<LatticeTrajectory> traj;
};

SolveOutcome run_solve(const Scheme& s, const InitFile& init, int steps, int direction, bool newton) {
  SolveOutcome o;
  std::ostringstream os;
  IntegrateOptions opt;
  opt.params = init.params;
  opt.n0 = init.n0;
  if (newton) opt.method = StepMethod::Newton;
  LatticeTrajectory t;
  try {
    t = integrate(s, init.seeds, steps, direction, opt);
  } catch (const IntegrationError& e) {
    os << (dynamic_cast<const SingularJacobian*>(&e) ? "singular Jacobian: " : "diverged: ") << e.what() << "\n";
    o.code = kDiverged;
    o.traj = *e.partial;
    o.report = os.str();
    return o;
  }
  os << "scheme " << s.name() << ": method " << t.method << ", " << t.points.size() << " points, n = "
     << t.points.front().n << ".." << t.points.back().n << "\n";
  os << "max |E| = " << num(static_cast<double>(t.max_E)) << ", max |Omega| = " << num(static_cast<double>(t.max_omega))
     << "\n";
  if (init.solution) {
    long double err = 0;
    bool exact_ok = true;
    if (t.exact) {
      for (const auto& [x, u] : *t.exact) {
        auto v = eval_exact(*init.solution, {{Symbol::x(0), x}});
        exact_ok = exact_ok && v && *v == u;
      }
    }
    for (const auto& p : t.points) {
      ComplexL ref = eval_numeric_l(*init.solution, {{Symbol::x(0), ComplexL(p.x)}});
      err = std::max(err, std::abs(p.u - ref));
    }
    os << "max |u - solution| = " << num(static_cast<double>(err));
    if (t.exact) os << (exact_ok ? " (exact: every node equals the solution)" : " (exact values differ)");
    os << "\n";
    bool pass = true;
    if (init.tol) pass = pass && err < *init.tol;
    if (init.exact) pass = pass && t.exact && exact_ok;
    if (init.tol || init.exact) os << (pass ? "solution reproduced" : "solution NOT reproduced") << "\n";
    if (!pass) o.code = kClaimFails;
  }
  o.report = os.str();
  o.traj = t;
  return o;
}

int cmd_solve(const Global& g, const std::string& scheme_path, const std::string& init_path, int steps, int direction,
              bool newton, const std::string& emit_path, std::ostream& out) {
  Scheme s = load_scheme(scheme_path);
  InitFile init = load_init(init_path);
  SolveOutcome o = run_solve(s, init, steps > 0 ? steps : init.steps, direction, newton);
  out << o.report;
  if (o.traj) emit(g, *o.traj, emit_path, o.code == kDiverged ? "diverged: partial trajectory" : "");
  return o.code;
}

int cmd_lattice(const Global& g, const std::string& kind_name, const std::string& params, const std::string& range,
                const std::string& emit_path, std::ostream& out) {
  auto kind = lattice_kind_from_name(kind_name);
  if (!kind) throw InputError("unknown lattice kind " + kind_name + " (uniform, quadratic, moebius, log)");
  std::vector<long double> p;
  if (!params.empty()) {
    for (const auto& part : split(params, ',')) p.push_back(constant_value(part));
  }
  auto [lo, hi] = parse_range(range);
  LatticeTrajectory t = lattice_generator(*kind, p, lo, hi);
  if (!emit_path.empty()) {
    emit(g, t, emit_path);
  } else if (g.csv()) {
    out << trajectory_csv(t);
  } else {
    char buf[96];
    for (const auto& pt : t.points) {
      std::snprintf(buf, sizeof buf, "%6ld  %.17g\n", pt.n, static_cast<double>(pt.x));
      out << buf;
    }
  }
  if (!g.csv() || !emit_path.empty()) {
    out << kind_name << " lattice: " << t.points.size() << " points, " << (t.monotone ? "monotone" : "not monotone")
        << "\n";
    auto K = anharmonic_ratios(t);
    if (!K.empty()) {
      long double dev = 0;
      for (long double k : K) dev = std::max(dev, std::abs(k - 4));
      out << "anharmonic ratio: max |K - 4| = " << num(static_cast<double>(dev)) << " over " << K.size()
          << " interior nodes\n";
    }
  }
  return kOk;
}

// ------------------------------------------------------------------ catalog

struct Entry {
  std::string name;
  std::map<std::string, std::string> keys;
  std::string get(const std::string& k) const {
    auto it = keys.find(k);
    return it == keys.end() ? "" : it->second;
  }
};

std::vector<Entry> load_catalog(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<Entry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw InputError(path + ":" + std::to_string(lineno) + ": bad section header");
      out.push_back({trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos || out.empty()) throw InputError(path + ":" + std::to_string(lineno) + ": expected key = value");
    out.back().keys[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

using Table = std::map<std::tuple<int, int, int>, Expr>;

Table parse_table(const std::string& csv, const std::string& origin) {
  Table t;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (trim(line) != "i,j,k,value") throw InputError(origin + ": missing i,j,k,value header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto parts = split(line, ',');
    if (parts.size() != 4) throw InputError(origin + ": bad row " + line);
    t[{std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])}] = parse(parts[3]);
  }
  return t;
}

// First difference between two bracket tables, empty when equal.
std::string table_diff(const Table& expected, const Table& got) {
  auto row = [](const std::tuple<int, int, int>& k, const std::optional<Expr>& v) {
    return std::to_string(std::get<0>(k)) + "," + std::to_string(std::get<1>(k)) + "," + std::to_string(std::get<2>(k)) +
           "," + (v ? to_string(*v) : "<absent>");
  };
  for (const auto& [k, v] : expected) {
    auto it = got.find(k);
    if (it == got.end()) return "expected " + row(k, v) + ", got " + row(k, std::nullopt);
    if (!normalizes_to_zero(v - it->second)) return "expected " + row(k, v) + ", got " + row(k, it->second);
  }
  for (const auto& [k, v] : got) {
    if (!expected.count(k)) return "expected " + row(k, std::nullopt) + ", got " + row(k, v);
  }
  return "";
}

struct EntryOutcome {
  bool pass = true;
  std::vector<std::string> notes;
  std::string failure;
  void fail(const std::string& why) {
    if (pass) failure = why;
    pass = false;
  }
};

EntryOutcome run_entry(const Global& g, const Entry& e, const std::string& dir) {
  EntryOutcome o;
  auto path = [&](const std::string& rel) { return (std::filesystem::path(dir) / rel).string(); };
  const std::string sub = "catalog/" + e.name + "/";
  const bool expect_fail = e.get("expect") == "fail";
  std::optional<Scheme> scheme;
  std::vector<VectorField> fields;
  if (!e.get("scheme").empty()) scheme = load_scheme(path(e.get("scheme")));
  if (!e.get("fields").empty()) fields = load_fields(path(e.get("fields")));

  if (scheme && !fields.empty()) {
    DeterminingSystem ds(*scheme);
    Rng rng = Rng::derive(g.seed, sub + "verify");
    int holds = 0;
    std::string first_fail;
    for (const auto& f : fields) {
      VerifyResult r = verify_symmetry(f, ds, rng, g.tol);
      if (r.holds) {
        ++holds;
      } else if (first_fail.empty()) {
        first_fail = f.name + " fails";
        if (r.witness) first_fail += " (component " + r.witness->component + ", residual " + num(r.witness->residual) + ")";
      }
    }
    if (expect_fail) {
      if (holds == static_cast<int>(fields.size())) o.fail("negative control unexpectedly holds");
      else o.notes.push_back("control fails as expected: " + first_fail);
      return o;
    }
    o.notes.push_back("verify " + std::to_string(holds) + "/" + std::to_string(fields.size()));
    if (holds != static_cast<int>(fields.size())) o.fail(first_fail);
  }

  if (!e.get("manifold").empty() && !fields.empty()) {
    Expr q = parse(e.get("invariant").empty() ? e.get("manifold") : e.get("invariant"));
    Rng rng = Rng::derive(g.seed, sub + "invariant");
    auto reps = check_invariant_on_manifold(fields, q, parse(e.get("manifold")), rng, g.tol);
    int ok = 0;
    for (const auto& r : reps) ok += r.kind != Invariance::Fails;
    o.notes.push_back("invariant on manifold " + std::to_string(ok) + "/" + std::to_string(reps.size()));
    if (ok != static_cast<int>(reps.size())) o.fail("invariance fails on the manifold");
  }

  if (scheme && !e.get("ansatz").empty()) {
    Rng rng = Rng::derive(g.seed, sub + "find");
    FindResult r = find_symmetries(*scheme, load_ansatz(path(e.get("ansatz"))), rng, g.tol);
    o.notes.push_back("find " + std::to_string(r.basis.size()));
    if (!e.get("dimension").empty() && static_cast<int>(r.basis.size()) != std::stoi(e.get("dimension"))) {
      o.fail("finder dimension " + std::to_string(r.basis.size()) + ", expected " + e.get("dimension"));
    }
    if (!r.rejected.empty()) o.fail("finder produced fields failing re-verification");
    if (!fields.empty()) {
      Rng srng = Rng::derive(g.seed, sub + "span");
      std::vector<VectorField> both = fields;
      both.insert(both.end(), r.basis.begin(), r.basis.end());
      int a = numeric_rank(fields, srng), b = numeric_rank(r.basis, srng), c = numeric_rank(both, srng);
      if (a != c || b != c) o.fail("found basis does not span the claimed basis");
      else o.notes.push_back("same span");
    }
  }

  if (!fields.empty() && e.get("brackets") != "skip") {
    Rng rng = Rng::derive(g.seed, sub + "brackets");
    SymmetryBasis b = close_and_constants(fields, rng);
    if (!b.closed) {
      o.fail("brackets do not close: [" + b.fields[b.offending->first].name + ", " + b.fields[b.offending->second].name +
             "]");
    } else {
      bool anti = antisymmetry_check(b), jac = jacobi_check(b);
      if (!anti) o.fail("antisymmetry fails");
      if (!jac) o.fail("Jacobi identity fails");
      std::size_t n = fields.size();
      o.notes.push_back("brackets closed (" + std::to_string(n * n) + " entries)");
      if (!e.get("table_size").empty() && n * n != std::stoul(e.get("table_size"))) {
        o.fail("table has " + std::to_string(n * n) + " entries, expected " + e.get("table_size"));
      }
      if (!e.get("brackets").empty()) {
        std::string golden_csv = path(e.get("brackets"));
        std::string d = table_diff(parse_table(read_text_file(golden_csv), golden_csv),
                                   parse_table(bracket_table_csv(b), "computed"));
        if (d.empty()) o.notes.push_back("table matches " + e.get("brackets"));
        else o.fail("bracket table differs from " + e.get("brackets") + ": " + d);
      }
    }
  }

  if (scheme && !e.get("solve").empty()) {
    InitFile init = load_init(path(e.get("solve")));
    SolveOutcome s = run_solve(*scheme, init, init.steps, 1, false);
    if (s.code != kOk) {
      std::string r = s.report;
      o.fail("solve: " + trim(r.substr(r.rfind('\n', r.size() - 2) + 1)));
    } else {
      o.notes.push_back("solve " + std::string(s.traj->method) + " " + std::to_string(s.traj->points.size()) + " points");
    }
  }

  if (!e.get("reduce").empty()) {
    ReduceOutcome r = run_reduce(e.get("reduce"));
    if (r.pass) o.notes.push_back("reductions " + e.get("reduce"));
    else o.fail("reduction check fails");
  }

  if (!e.get("lattice").empty()) {
    auto kind = lattice_kind_from_name(e.get("lattice"));
    if (!kind) throw InputError("unknown lattice " + e.get("lattice"));
    std::vector<long double> p;
    for (const auto& part : split(e.get("params"), ',')) p.push_back(constant_value(part));
    auto [lo, hi] = parse_range(e.get("range"));
    LatticeTrajectory t = lattice_generator(*kind, p, lo, hi);
    long double dev = 0;
    for (long double k : anharmonic_ratios(t)) dev = std::max(dev, std::abs(k - 4));
    double tol = e.get("ratio_tol").empty() ? 1e-12 : std::stod(e.get("ratio_tol"));
    o.notes.push_back("anharmonic ratio 4 within " + num(static_cast<double>(dev)));
    if (!(dev <= tol)) o.fail("anharmonic ratio deviates from 4 by " + num(static_cast<double>(dev)));
  }
  return o;
}

int cmd_catalog(const Global& g, const std::string& filter, std::ostream& out) {
  const std::string dir = golden_dir();
  auto entries = load_catalog((std::filesystem::path(dir) / "catalog.ini").string());
  int run = 0, passed = 0;
  for (const Entry& e : entries) {
    if (!filter.empty() && e.name.find(filter) == std::string::npos) continue;
    ++run;
    EntryOutcome o;
    try {
      o = run_entry(g, e, dir);
    } catch (const std::exception& ex) {
      o.fail(std::string("error: ") + ex.what());
    }
    std::string notes;
    for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
    if (o.pass) {
      ++passed;
      out << "PASS " << e.name << ": " << notes << "\n";
    } else {
      out << "FAIL " << e.name << ": " << o.failure << (notes.empty() ? "" : " [" + notes + "]") << "\n";
    }
  }
  out << "catalog: " << passed << "/" << run << " entries pass\n";
  if (run == 0) return kInputError;
  return passed == run ? kOk : kClaimFails;
}

}  // namespace

std::string golden_dir() {
  if (const char* env = std::getenv("DELTASYM_GOLDEN_DIR"); env && *env) return env;
  return DELTASYM_GOLDEN_DEFAULT;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lie point symmetries of difference schemes", "deltasym"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "seed of all randomized subsystems")->capture_default_str();
  app.add_option("--tol", g.tol, "relative tolerance of numeric zero tests")->capture_default_str();
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();

  std::string scheme, fields, ansatz, init, q, manifold, emit_path, filter, which = "all";
  std::string kind, params, range = "0..10";
  int steps = 0, direction = 1;
  bool newton = false;

  auto* verify = app.add_subcommand("verify", "check vector fields against a scheme");
  verify->add_option("scheme", scheme)->required();
  verify->add_option("fields", fields)->required();
  auto* find = app.add_subcommand("find", "find the symmetries spanned by an ansatz");
  find->add_option("scheme", scheme)->required();
  find->add_option("ansatz", ansatz)->required();
  auto* table = app.add_subcommand("bracket-table", "structure constants of a basis");
  table->add_option("fields", fields)->required();
  auto* solve = app.add_subcommand("solve", "integrate a scheme from seed points, or generate a lattice");
  solve->add_option("scheme", scheme);
  solve->add_option("--init", init, "seed file");
  solve->add_option("--steps", steps, "number of steps (default from the seed file)");
  solve->add_option("--direction", direction)->check(CLI::IsMember({-1, 1}));
  solve->add_flag("--newton", newton, "use damped Newton instead of the closed form");
  solve->add_option("--emit", emit_path, "write the trajectory (.csv or .svg)");
  solve->add_option("--lattice", kind, "generate a lattice instead: uniform|quadratic|moebius|log");
  solve->add_option("--params", params, "comma-separated lattice parameters");
  solve->add_option("--range", range, "index range lo..hi")->capture_default_str();
  auto* inv = app.add_subcommand("invariant-check", "apply prolonged fields to an expression");
  inv->add_option("fields", fields)->required();
  inv->add_option("--q", q, "expression")->required();
  inv->add_option("--manifold", manifold, "manifold expression, or 'q' for q itself");
  auto* reduce = app.add_subcommand("reduce-check", "subgroup reduction checks");
  reduce->add_option("--case", which, "all|translation|dilation|eta")->capture_default_str();
  auto* lattice = app.add_subcommand("lattice", "generate a lattice");
  lattice->add_option("kind", kind, "uniform|quadratic|moebius|log")->required();
  lattice->add_option("--params", params, "comma-separated parameters")->required();
  lattice->add_option("--range", range, "index range lo..hi")->capture_default_str();
  lattice->add_option("--emit", emit_path, "write the lattice (.csv or .svg)");
  auto* catalog = app.add_subcommand("catalog", "run the golden catalog");
  catalog->add_option("--filter", filter, "only entries whose name contains this");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (verify->parsed()) return cmd_verify(g, scheme, fields, out);
    if (find->parsed()) return cmd_find(g, scheme, ansatz, out);
    if (table->parsed()) return cmd_bracket_table(g, fields, out);
    if (solve->parsed()) {
      if (!kind.empty()) return cmd_lattice(g, kind, params, range, emit_path, out);
      if (scheme.empty() || init.empty()) throw InputError("solve needs a scheme and --init, or --lattice");
      return cmd_solve(g, scheme, init, steps, direction, newton, emit_path, out);
    }
    if (inv->parsed()) return cmd_invariant_check(g, fields, q, manifold, out);
    if (reduce->parsed()) {
      ReduceOutcome r = run_reduce(which);
      out << r.report;
      return r.pass ? kOk : kClaimFails;
    }
    if (lattice->parsed()) return cmd_lattice(g, kind, params, range, emit_path, out);
    if (catalog->parsed()) return cmd_catalog(g, filter, out);
  } catch (const SamplingDegenerate& e) {
    err << "error: " << e.what() << "\nhint: enlarge the ansatz or change --seed\n";
    return kDegenerate;
  } catch (const AnsatzTooSmall& e) {
    err << "error: " << e.what() << "\nhint: enlarge the ansatz\n";
    return kDegenerate;
  } catch (const IntegrationError& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const NormalizationBudget& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace deltasym::cli
