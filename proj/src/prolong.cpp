#include "deltasym/prolong.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deltasym/linalg.hpp"
#include "deltasym/normal_form.hpp"

namespace deltasym {

namespace {

constexpr std::size_t kExactBudget = 20000;
// Plans with radicals or transcendental functions rarely normalize to a
// decidable form; they get a small exact attempt before numeric testing.
constexpr std::size_t kOpaquePlanBudget = 500;

bool is_rational_expr(const Expr& e) {
  if (e.kind() == Expr::Kind::Fn) return false;
  if (e.kind() == Expr::Kind::Pow) {
    const Expr& ex = e.args()[1];
    if (!ex.is_const() || ex.value().get_den() != 1) return false;
  }
  for (const Expr& a : e.args()) {
    if (!is_rational_expr(a)) return false;
  }
  return true;
}

std::size_t exact_budget(const Scheme& s) {
  for (const auto& st : s.plan().steps) {
    if (!is_rational_expr(st.value)) return kOpaquePlanBudget;
  }
  return kExactBudget;
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool allowed_in(Slot slot, const Symbol& s) {
  switch (s.kind()) {
    case SymbolKind::Param:
    case SymbolKind::T:
      return true;
    case SymbolKind::X:
    case SymbolKind::U:
      return slot != Slot::Tau && s.shift() == 0;
    default:
      return false;
  }
}

void check_slot(const std::string& name, Slot slot, const Expr& e) {
  static const char* names[] = {"xi", "tau", "phi"};
  for (const Symbol& s : free_symbols(e)) {
    if (!allowed_in(slot, s)) {
      throw FieldError(name + ": " + names[static_cast<int>(slot)] + " may not depend on " + s.str() +
                       (slot == Slot::Tau ? " (tau depends on t only)" : " (only x, t and u are allowed)"));
    }
  }
}

std::optional<Slot> slot_from_name(const std::string& s) {
  if (s == "xi") return Slot::Xi;
  if (s == "tau") return Slot::Tau;
  if (s == "phi") return Slot::Phi;
  return std::nullopt;
}

Expr parse_at(const std::string& text, const std::string& where) {
  try {
    return parse(text);
  } catch (const ParseError& err) {
    throw FieldError(where + ": " + err.what());
  }
}

struct ExactOutcome {
  bool decided = false;
  bool zero = false;
};

// Exact on-shell zero test of a raw residual; undecided when the budget is
// exceeded or a nonzero remainder still contains opaque atoms.
ExactOutcome exact_zero(const Expr& raw, const Scheme& s) {
  try {
    nf::TermBudget budget(exact_budget(s));
    nf::RatFun r = nf::to_ratfun(s.plan().apply(raw));
    if (r.is_zero()) return {true, true};
    if (!nf::has_opaque_atoms(r)) return {true, false};
  } catch (const NormalizationBudget&) {
  } catch (const ZeroDenominator&) {
  }
  return {};
}

struct Probe {
  std::size_t component = 0;
  Complex value;
  double scale = 0;
  double ratio = 0;  // |value| / max(1, scale)
};

Probe probe(const std::vector<Expr>& raws, const NumericEnv& env) {
  Probe worst;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    Complex v = eval_numeric(raws[i], env);
    double sc = term_scale(raws[i], env);
    double ratio = std::abs(v) / std::max(1.0, sc);
    if (i == 0 || ratio > worst.ratio) worst = {i, v, sc, ratio};
  }
  return worst;
}

// Random point for all symbols of exprs, away from their singular subexpressions.
NumericEnv free_sample(const std::vector<Expr>& exprs, Rng& rng) {
  std::set<Symbol> syms;
  std::vector<Expr> dens;
  for (const Expr& e : exprs) {
    auto fs = free_symbols(e);
    syms.insert(fs.begin(), fs.end());
    auto d = singular_subexpressions(e);
    dens.insert(dens.end(), d.begin(), d.end());
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    NumericEnv env;
    for (const Symbol& v : syms) env[v] = v.is_param() ? Complex(rng.uniform(0.5, 2.0)) : rng.annulus(0.5, 2.0);
    bool ok = true;
    try {
      for (const Expr& d : dens) ok = ok && std::abs(eval_numeric(d, env)) >= 1e-6;
    } catch (const NumericError&) {
      ok = false;
    }
    if (ok) return env;
  }
  throw Error("cannot find a regular sample point");
}

}  // namespace

VectorField VectorField::make(std::string name, Expr xi, Expr tau, Expr phi) {
  check_slot(name, Slot::Xi, xi);
  check_slot(name, Slot::Tau, tau);
  check_slot(name, Slot::Phi, phi);
  return VectorField{std::move(name), std::move(xi), std::move(tau), std::move(phi)};
}

const Expr& VectorField::slot(Slot s) const {
  switch (s) {
    case Slot::Xi:
      return xi;
    case Slot::Tau:
      return tau;
    case Slot::Phi:
      break;
  }
  return phi;
}

bool VectorField::is_zero() const {
  return normalizes_to_zero(xi) && normalizes_to_zero(tau) && normalizes_to_zero(phi);
}

VectorField linear_combination(const std::string& name,
                               const std::vector<std::pair<Expr, const VectorField*>>& terms) {
  std::vector<Expr> xi, tau, phi;
  for (const auto& [c, f] : terms) {
    xi.push_back(c * f->xi);
    tau.push_back(c * f->tau);
    phi.push_back(c * f->phi);
  }
  return VectorField{name, Expr::add(xi), Expr::add(tau), Expr::add(phi)};
}

VectorField normalized(const VectorField& f) {
  return VectorField{f.name, normalize(f.xi), normalize(f.tau), normalize(f.phi)};
}

std::string to_string(const VectorField& f) {
  std::ostringstream os;
  os << f.name << ":";
  const char* sep = " ";
  for (Slot s : {Slot::Xi, Slot::Tau, Slot::Phi}) {
    const Expr& e = f.slot(s);
    if (e.is_zero()) continue;
    os << sep << (s == Slot::Xi ? "xi" : s == Slot::Tau ? "tau" : "phi") << "=" << to_string(e);
    sep = "; ";
  }
  if (f.xi.is_zero() && f.tau.is_zero() && f.phi.is_zero()) os << " xi=0";
  return os.str();
}

std::vector<VectorField> parse_fields(std::string_view text, const std::string& origin) {
  std::vector<VectorField> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw FieldError(where + ": expected 'Name: xi=...; tau=...; phi=...'");
    std::string name = trim(std::string_view(line).substr(0, colon));
    if (name.empty()) throw FieldError(where + ": missing field name");
    Expr comp[3] = {Expr(0), Expr(0), Expr(0)};
    bool seen[3] = {false, false, false};
    std::string rest = line.substr(colon + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t end = rest.find(';', start);
      std::string part = trim(std::string_view(rest).substr(start, end == std::string::npos ? std::string::npos : end - start));
      start = end == std::string::npos ? rest.size() + 1 : end + 1;
      if (part.empty()) continue;
      std::size_t eq = part.find('=');
      if (eq == std::string::npos) throw FieldError(where + ": expected component=expression, got '" + part + "'");
      auto slot = slot_from_name(trim(std::string_view(part).substr(0, eq)));
      if (!slot) throw FieldError(where + ": unknown component '" + trim(std::string_view(part).substr(0, eq)) + "'");
      int i = static_cast<int>(*slot);
      if (seen[i]) throw FieldError(where + ": component given twice");
      seen[i] = true;
      comp[i] = parse_at(part.substr(eq + 1), where);
    }
    try {
      out.push_back(VectorField::make(name, comp[0], comp[1], comp[2]));
    } catch (const FieldError& err) {
      throw FieldError(where + ": " + err.what());
    }
  }
  return out;
}

std::vector<VectorField> load_fields(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const SchemeError& err) {
    throw FieldError(err.what());
  }
  return parse_fields(text, path);
}

std::vector<AnsatzTerm> parse_ansatz(std::string_view text, const std::string& origin) {
  std::vector<AnsatzTerm> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw FieldError(where + ": expected 'xi|tau|phi: <expr>'");
    auto slot = slot_from_name(trim(std::string_view(line).substr(0, colon)));
    if (!slot) throw FieldError(where + ": unknown slot '" + trim(std::string_view(line).substr(0, colon)) + "'");
    Expr fn = parse_at(line.substr(colon + 1), where);
    try {
      check_slot("ansatz", *slot, fn);
    } catch (const FieldError& err) {
      throw FieldError(where + ": " + err.what());
    }
    out.push_back({*slot, fn});
  }
  return out;
}

std::vector<AnsatzTerm> load_ansatz(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const SchemeError& err) {
    throw FieldError(err.what());
  }
  return parse_ansatz(text, path);
}

Expr total_dt(const Expr& f) {
  std::vector<Expr> terms{diff(f, Symbol::t())};
  terms.push_back(Expr(Symbol::ut()) * diff(f, Symbol::u(0)));
  terms.push_back(Expr(Symbol::utt()) * diff(f, Symbol::ut()));
  terms.push_back(Expr(Symbol::uxt()) * diff(f, Symbol::ux()));
  return Expr::add(terms);
}

ProlongedField prolong(const VectorField& f, int M, int N, int order_t) {
  ProlongedField p;
  p.base = f;
  p.lo = -M;
  p.hi = N;
  p.order_t = order_t;
  for (int k = -M; k <= N; ++k) {
    if (!f.xi.is_zero()) p.coeff[Symbol::x(k)] = shift(f.xi, k);
    if (!f.phi.is_zero()) p.coeff[Symbol::u(k)] = shift(f.phi, k);
  }
  if (order_t >= 1) {
    if (!f.tau.is_zero()) p.coeff[Symbol::t()] = f.tau;
    Expr dxi = total_dt(f.xi);
    Expr dtau = total_dt(f.tau);
    Expr phit = total_dt(f.phi) - dxi * Expr(Symbol::ux()) - dtau * Expr(Symbol::ut());
    p.coeff[Symbol::ut()] = phit;
    if (order_t >= 2) {
      p.coeff[Symbol::utt()] = total_dt(phit) - dxi * Expr(Symbol::uxt()) - dtau * Expr(Symbol::utt());
    }
  }
  return p;
}

Expr apply_raw(const ProlongedField& p, const Expr& e) {
  std::vector<Expr> terms;
  for (const Symbol& v : free_symbols(e)) {
    auto it = p.coeff.find(v);
    if (it == p.coeff.end()) continue;
    terms.push_back(it->second * diff(e, v));
  }
  return Expr::add(terms);
}

Expr apply(const ProlongedField& p, const Expr& e) { return normalize(apply_raw(p, e)); }

DeterminingSystem::DeterminingSystem(const Scheme& s) : scheme_(&s) {
  order_t_ = 0;
  if (s.is_ddelta()) order_t_ = depends_on(s.E(), Symbol::utt()) ? 2 : 1;
  for (const auto& [label, rel] : {std::pair<std::string, Expr>{"E", s.E()}, {"Omega", s.omega()}}) {
    Part part{label, {}};
    for (const Symbol& v : free_symbols(rel)) {
      if (v.is_param()) continue;
      if (v.kind() == SymbolKind::Ux || v.kind() == SymbolKind::Uxt) {
        throw FieldError(s.name() + ": " + v.str() + " in " + label + " has no prolongation coefficient");
      }
      part.partials.push_back({v, diff(rel, v)});
    }
    parts_.push_back(std::move(part));
  }
}

std::vector<std::string> DeterminingSystem::labels() const {
  std::vector<std::string> out;
  for (const auto& p : parts_) out.push_back(p.label);
  return out;
}

void DeterminingSystem::check_field(const VectorField& f) const {
  if (!scheme_->is_ddelta()) {
    for (const Expr* e : {&f.xi, &f.tau, &f.phi}) {
      if (depends_on(*e, Symbol::t())) throw FieldError(f.name + ": t does not occur in a pure difference scheme");
    }
    if (!normalizes_to_zero(f.tau)) throw FieldError(f.name + ": tau must vanish for a pure difference scheme");
  }
}

std::vector<Expr> DeterminingSystem::raw(const VectorField& f) const {
  ProlongedField p = prolong(f, scheme_->M(), scheme_->N(), order_t_);
  std::vector<Expr> out;
  for (const Part& part : parts_) {
    std::vector<Expr> terms;
    for (const auto& [v, d] : part.partials) {
      auto it = p.coeff.find(v);
      if (it != p.coeff.end()) terms.push_back(it->second * d);
    }
    out.push_back(Expr::add(terms));
  }
  return out;
}

std::vector<ResidualComponent> onshell_residual(const VectorField& f, const Scheme& s) {
  DeterminingSystem ds(s);
  ds.check_field(f);
  std::vector<Expr> raws = ds.raw(f);
  std::vector<std::string> labels = ds.labels();
  std::vector<ResidualComponent> out;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    Expr applied = s.plan().apply(raws[i]);
    if (!s.is_ddelta()) {
      out.push_back({labels[i], normalize(applied)});
      continue;
    }
    nf::RatFun r = nf::to_ratfun(applied);
    auto parts = nf::decompose(r, [](const Symbol& v) { return v.is_derivative(); });
    if (parts.empty()) out.push_back({labels[i], Expr(0)});
    for (const auto& [key, coeff] : parts) {
      out.push_back({labels[i] + "[" + to_string(nf::to_expr(key)) + "]", nf::to_expr(coeff)});
    }
  }
  return out;
}

VerifyResult verify_symmetry(const VectorField& f, const DeterminingSystem& ds, Rng& rng, double tol) {
  const Scheme& s = ds.scheme();
  ds.check_field(f);
  std::vector<Expr> raws = ds.raw(f);
  std::vector<std::string> labels = ds.labels();
  VerifyResult res;
  bool all_zero = true;
  bool decided_nonzero = false;
  for (const Expr& r : raws) {
    ExactOutcome o = exact_zero(r, s);
    if (!o.decided) all_zero = false;
    if (o.decided && !o.zero) {
      all_zero = false;
      decided_nonzero = true;
    }
  }
  if (all_zero) {
    res.holds = true;
    res.exact = true;
    return res;
  }
  res.exact = decided_nonzero;
  OnShellSampler sampler(s, raws);
  std::optional<Probe> worst;
  NumericEnv worst_env;
  for (int i = 0; i < kVerifySamples; ++i) {
    NumericEnv env = sampler.sample(rng);
    Probe p = probe(raws, env);
    if (!worst || p.ratio > worst->ratio) {
      worst = p;
      worst_env = env;
    }
    if (p.ratio > tol) break;
  }
  res.holds = !decided_nonzero && worst->ratio <= tol;
  if (!res.holds) res.witness = Witness{labels[worst->component], worst_env, worst->value, worst->scale};
  return res;
}

VerifyResult verify_symmetry(const VectorField& f, const Scheme& s, Rng& rng, double tol) {
  return verify_symmetry(f, DeterminingSystem(s), rng, tol);
}

FindResult find_symmetries(const Scheme& s, const std::vector<AnsatzTerm>& ansatz, Rng& rng, double tol) {
  if (ansatz.empty()) throw AnsatzTooSmall(s.name() + ": empty ansatz");
  DeterminingSystem ds(s);
  std::vector<VectorField> terms;
  std::vector<std::vector<Expr>> raws;
  std::vector<Expr> all;
  for (std::size_t i = 0; i < ansatz.size(); ++i) {
    Expr c[3] = {Expr(0), Expr(0), Expr(0)};
    c[static_cast<int>(ansatz[i].slot)] = ansatz[i].fn;
    terms.push_back(VectorField::make("a" + std::to_string(i + 1), c[0], c[1], c[2]));
    ds.check_field(terms.back());
    raws.push_back(ds.raw(terms.back()));
    all.insert(all.end(), raws.back().begin(), raws.back().end());
  }
  const int n = static_cast<int>(ansatz.size());
  const int points = 3 * n;
  OnShellSampler sampler(s, all);

  // Exact rows when every residual evaluates to a rational at a rational point.
  auto exact_rows = [&](Rng& r) -> std::optional<linalg::Matrix<Rational>> {
    linalg::Matrix<Rational> m;
    for (int p = 0; p < points; ++p) {
      auto env = sampler.sample_exact(r);
      if (!env) return std::nullopt;
      for (std::size_t comp = 0; comp < raws[0].size(); ++comp) {
        std::vector<Rational> row;
        for (int i = 0; i < n; ++i) {
          auto v = eval_exact(raws[i][comp], *env);
          if (!v) return std::nullopt;
          row.push_back(*v);
        }
        m.push_back(std::move(row));
      }
    }
    return m;
  };
  auto numeric_rows = [&](Rng& r) {
    linalg::Matrix<Complex> m;
    for (int p = 0; p < points; ++p) {
      NumericEnv env = sampler.sample(r);
      for (std::size_t comp = 0; comp < raws[0].size(); ++comp) {
        std::vector<Complex> row;
        for (int i = 0; i < n; ++i) row.push_back(eval_numeric(raws[i][comp], env));
        m.push_back(std::move(row));
      }
    }
    return m;
  };

  FindResult out;
  out.coefficients = n;
  std::vector<std::vector<Rational>> kernel;
  Rng d1 = rng.split(1);
  Rng d2 = rng.split(2);
  std::optional<linalg::Matrix<Rational>> e1;
  try {
    e1 = exact_rows(d1);
  } catch (const ZeroDenominator&) {
    e1.reset();
  }
  if (e1) {
    auto r1 = linalg::rref(*e1, n);
    auto e2 = exact_rows(d2);
    if (!e2) throw SamplingDegenerate(s.name() + ": exact evaluation failed on the second draw");
    auto r2 = linalg::rref(*e2, n);
    if (r1.rank() != r2.rank()) {
      throw SamplingDegenerate(s.name() + ": sample rank differs between draws (" + std::to_string(r1.rank()) +
                               " vs " + std::to_string(r2.rank()) + ")");
    }
    out.rank = r1.rank();
    out.exact = true;
    kernel = linalg::nullspace(r1);
  } else {
    Rng n1 = rng.split(1);
    Rng n2 = rng.split(2);
    auto r1 = linalg::rref(numeric_rows(n1), n, tol);
    auto r2 = linalg::rref(numeric_rows(n2), n, tol);
    if (r1.rank() != r2.rank()) {
      throw SamplingDegenerate(s.name() + ": sample rank differs between draws (" + std::to_string(r1.rank()) +
                               " vs " + std::to_string(r2.rank()) + ")");
    }
    out.rank = r1.rank();
    for (const auto& v : linalg::nullspace(r1)) {
      std::vector<Rational> q;
      for (const Complex& c : v) {
        auto r = linalg::rationalize(c.real(), 1000, 1e-6);
        if (!r || std::abs(c.imag()) > 1e-6 * std::max(1.0, std::abs(c))) {
          throw SamplingDegenerate(s.name() + ": nullspace vector is not rational; adjust the ansatz");
        }
        q.push_back(*r);
      }
      kernel.push_back(std::move(q));
    }
  }
  if (kernel.empty()) throw AnsatzTooSmall(s.name() + ": only the zero field solves the determining equations");

  Rng verify_rng = rng.split(3);
  int index = 0;
  for (const auto& raw_v : kernel) {
    std::vector<Rational> v = linalg::primitive(raw_v);
    std::vector<std::pair<Expr, const VectorField*>> combo;
    for (int i = 0; i < n; ++i) {
      if (sgn(v[i]) != 0) combo.push_back({Expr(v[i]), &terms[i]});
    }
    VectorField f = normalized(linear_combination("F" + std::to_string(++index), combo));
    if (verify_symmetry(f, ds, verify_rng, tol).holds) {
      out.basis.push_back(f);
    } else {
      out.rejected.push_back(f);
    }
  }
  return out;
}

std::vector<InvarianceReport> check_invariant_on_manifold(const std::vector<VectorField>& fields, const Expr& q,
                                                          const std::optional<Expr>& manifold, Rng& rng,
                                                          double tol) {
  int lo = 0;
  int hi = 0;
  for (const Expr* e : {&q, manifold ? &*manifold : nullptr}) {
    if (!e) continue;
    if (auto r = shift_range(*e)) {
      lo = std::min(lo, r->first);
      hi = std::max(hi, r->second);
    }
  }
  // Solve the manifold for a variable it contains linearly.
  std::optional<Substitution> on_manifold;
  if (manifold) {
    nf::RatFun m = nf::to_ratfun(*manifold);
    std::vector<Symbol> candidates;
    for (int k = hi; k >= lo; --k) candidates.push_back(Symbol::u(k));
    for (int k = hi; k >= lo; --k) candidates.push_back(Symbol::x(k));
    for (const Symbol& v : candidates) {
      auto d = nf::degree_in(m, v);
      if (d && *d == 1) {
        nf::RatFun a = nf::coefficient_of(m, v, 1);
        nf::RatFun b = nf::coefficient_of(m, v, 0);
        on_manifold = Substitution{v, nf::to_expr(nf::neg(nf::div(b, a)))};
        break;
      }
    }
    if (!on_manifold) throw Error("manifold is not linear in any lattice variable");
  }
  auto vanishes = [&](const Expr& e) {
    try {
      nf::TermBudget budget(kExactBudget);
      nf::RatFun r = nf::to_ratfun(e);
      if (r.is_zero()) return true;
      if (!nf::has_opaque_atoms(r)) return false;
    } catch (const NormalizationBudget&) {
    }
    for (int i = 0; i < kVerifySamples; ++i) {
      NumericEnv env = free_sample({e}, rng);
      if (std::abs(eval_numeric(e, env)) > tol * std::max(1.0, term_scale(e, env))) return false;
    }
    return true;
  };
  std::vector<InvarianceReport> out;
  for (const VectorField& f : fields) {
    InvarianceReport rep;
    rep.field = f.name;
    Expr r = apply_raw(prolong(f, -lo, hi, 0), q);
    if (vanishes(r)) {
      rep.kind = Invariance::Identical;
    } else if (on_manifold) {
      Expr restricted = substitute(r, {{on_manifold->target, on_manifold->value}});
      if (vanishes(restricted)) {
        rep.kind = Invariance::OnManifold;
        try {
          nf::TermBudget budget(kExactBudget);
          rep.lambda = normalize(r / *manifold);
        } catch (const NormalizationBudget&) {
        }
      }
    }
    out.push_back(rep);
  }
  return out;
}

std::string_view invariance_name(Invariance k) {
  switch (k) {
    case Invariance::Identical:
      return "identically invariant";
    case Invariance::OnManifold:
      return "invariant on the manifold";
    case Invariance::Fails:
      break;
  }
  return "not invariant";
}

}  // namespace deltasym
