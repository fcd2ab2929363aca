#include "deltasym/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "deltasym/normal_form.hpp"

namespace deltasym {

namespace {

constexpr double kDenominatorFloor = 1e-6;
constexpr int kMaxSampleTries = 100;
constexpr double kExclusionGap = 1e-3;

bool has_time_derivative(const Expr& e) {
  for (const Symbol& s : free_symbols(e)) {
    if (s.kind() == SymbolKind::Ut || s.kind() == SymbolKind::Utt) return true;
  }
  return false;
}

bool contains_symbol(const Expr& e, SymbolKind kind) {
  for (const Symbol& s : free_symbols(e)) {
    if (s.kind() == kind) return true;
  }
  return false;
}

// Solves r = 0 for a symbol occurring linearly.
std::optional<Expr> solve_linear(const Expr& r, const Symbol& target) {
  nf::RatFun f = nf::to_ratfun(r);
  auto deg = nf::degree_in(f, target);
  if (!deg || *deg != 1) return std::nullopt;
  nf::RatFun a = nf::coefficient_of(f, target, 1);
  nf::RatFun b = nf::coefficient_of(f, target, 0);
  return nf::to_expr(nf::neg(nf::div(b, a)));
}

void collect_singular(const Expr& e, std::vector<Expr>& out) {
  switch (e.kind()) {
    case Expr::Kind::Const:
    case Expr::Kind::Sym:
      return;
    case Expr::Kind::Pow: {
      const Expr& base = e.args()[0];
      const Expr& ex = e.args()[1];
      bool singular = !ex.is_const() || ex.value() < 0 || ex.value().get_den() != 1;
      if (singular && !base.is_const()) out.push_back(base);
      break;
    }
    case Expr::Kind::Fn:
      if (e.func() == Func::Ln || e.func() == Func::Sqrt) out.push_back(e.args()[0]);
      break;
    default:
      break;
  }
  for (const Expr& a : e.args()) collect_singular(a, out);
}

Complex sample_param_numeric(const ParamSpec* spec, Rng& rng) {
  double lo = spec ? spec->lo : 0.5;
  double hi = spec ? spec->hi : 2.0;
  for (int i = 0; i < kMaxSampleTries; ++i) {
    double v = rng.uniform(lo, hi);
    bool ok = true;
    if (spec) {
      for (double ex : spec->exclude) ok = ok && std::abs(v - ex) > kExclusionGap;
    }
    if (ok) return v;
  }
  throw SchemeError("cannot sample parameter " + (spec ? spec->name : std::string("?")) +
                    " away from its excluded values");
}

Rational sample_param_exact(const ParamSpec* spec, Rng& rng) {
  double lo = spec ? spec->lo : 0.5;
  double hi = spec ? spec->hi : 2.0;
  // Work on a grid of sixteenths inside [lo, hi].
  long a = static_cast<long>(std::ceil(lo * 16));
  long b = static_cast<long>(std::floor(hi * 16));
  for (int i = 0; i < kMaxSampleTries; ++i) {
    long k = b > a ? a + static_cast<long>(rng.below(static_cast<std::uint64_t>(b - a + 1))) : a;
    Rational q(k, 16);
    q.canonicalize();
    double v = q.get_d();
    bool ok = true;
    if (spec) {
      for (double ex : spec->exclude) ok = ok && std::abs(v - ex) > kExclusionGap;
    }
    if (ok) return q;
  }
  throw SchemeError("cannot sample parameter " + (spec ? spec->name : std::string("?")) +
                    " away from its excluded values");
}

Rational sample_variable_exact(Rng& rng) {
  // Nonzero rationals in [-5/2, 5/2] with modulus at least 1/2.
  for (;;) {
    Rational q = rng.rational(-5, 5, 97) / 2;
    if (abs(q) >= Rational(1, 2)) return q;
  }
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
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

double parse_number(const std::string& text, const std::string& where) {
  Expr e;
  try {
    e = parse(text);
  } catch (const ParseError& err) {
    throw SchemeError(where + ": bad number '" + text + "': " + err.what());
  }
  auto v = eval_numeric(e, {});
  if (std::abs(v.imag()) > 0) throw SchemeError(where + ": number must be real: " + text);
  return v.real();
}

}  // namespace

Expr EliminationPlan::apply(const Expr& e) const {
  Expr out = e;
  for (const auto& step : steps) {
    if (depends_on(out, step.target)) out = substitute(out, {{step.target, step.value}});
  }
  return out;
}

bool EliminationPlan::eliminates(const Symbol& s) const {
  return std::any_of(steps.begin(), steps.end(), [&](const Substitution& st) { return st.target == s; });
}

Scheme::Scheme(std::string name, SchemeKind kind, Expr E, Expr omega, std::vector<ParamSpec> params,
               std::optional<EliminationPlan> plan, bool fixed_lattice)
    : name_(std::move(name)),
      kind_(kind),
      E_(std::move(E)),
      omega_(std::move(omega)),
      params_(std::move(params)),
      fixed_lattice_(fixed_lattice) {
  for (const Symbol& s : free_symbols(omega_)) {
    if (s.is_derivative()) throw SchemeError(name_ + ": Omega must not contain " + s.str());
  }
  bool td = has_time_derivative(E_);
  if (kind_ == SchemeKind::Difference && (td || contains_symbol(E_, SymbolKind::Ux) ||
                                          contains_symbol(E_, SymbolKind::Uxt))) {
    throw SchemeError(name_ + ": a pure difference scheme cannot contain derivative symbols");
  }
  if (kind_ == SchemeKind::DifferentialDifference && !td) {
    throw SchemeError(name_ + ": a differential-difference E must contain ut or utt");
  }
  auto re = shift_range(E_);
  auto ro = shift_range(omega_);
  if (!re || !ro) throw SchemeError(name_ + ": E and Omega must both involve lattice variables");
  lo_ = std::min({0, re->first, ro->first});
  hi_ = std::max({0, re->second, ro->second});

  relations_.push_back({"E", E_});
  for (int k = lo_ - ro->first; k <= hi_ - ro->second; ++k) {
    relations_.push_back({k == 0 ? "Omega" : "Omega shifted by " + std::to_string(k), shift(omega_, k)});
  }
  if (plan) {
    plan_ = std::move(*plan);
  } else {
    derive_plan();
  }
  validate_plan();
}

const ParamSpec* Scheme::param(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<Symbol> Scheme::coordinates() const {
  std::vector<Symbol> out;
  for (int k = lo_; k <= hi_; ++k) out.push_back(Symbol::x(k));
  for (int k = lo_; k <= hi_; ++k) out.push_back(Symbol::u(k));
  if (is_ddelta()) {
    out.push_back(Symbol::t());
    out.push_back(Symbol::ut());
    out.push_back(Symbol::ux());
    if (contains_symbol(E_, SymbolKind::Utt)) {
      out.push_back(Symbol::utt());
      out.push_back(Symbol::uxt());
    }
  }
  return out;
}

void Scheme::derive_plan() {
  struct Item {
    Symbol target;
    Expr value;
  };
  std::vector<Item> items;
  auto solve = [&](const Relation& rel, const Symbol& target) {
    if (!depends_on(rel.expr, target)) {
      throw SchemeError(name_ + ": " + rel.label + " does not contain " + target.str() +
                        "; supply an [elimination] section");
    }
    auto v = solve_linear(rel.expr, target);
    if (!v) {
      throw SchemeError(name_ + ": " + rel.label + " is not linear in " + target.str() +
                        "; supply an [elimination] section");
    }
    items.push_back({target, *v});
  };

  Symbol utarget = Symbol::u(hi_);
  if (is_ddelta()) utarget = contains_symbol(E_, SymbolKind::Utt) ? Symbol::utt() : Symbol::ut();
  solve(relations_[0], utarget);

  auto ro = shift_range(omega_);
  std::vector<std::pair<int, std::size_t>> shifted;  // (|k|, relation index)
  for (std::size_t i = 1; i < relations_.size(); ++i) {
    int k = lo_ - ro->first + static_cast<int>(i) - 1;
    shifted.push_back({std::abs(k), i});
  }
  std::stable_sort(shifted.begin(), shifted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [ak, i] : shifted) {
    int k = lo_ - ro->first + static_cast<int>(i) - 1;
    solve(relations_[i], Symbol::x(k >= 0 ? ro->second + k : ro->first + k));
  }

  // Order so that every value mentions only targets substituted later.
  std::vector<bool> placed(items.size(), false);
  for (std::size_t round = 0; round < items.size(); ++round) {
    bool progress = false;
    for (std::size_t i = 0; i < items.size() && !progress; ++i) {
      if (placed[i]) continue;
      // i may go next if no unplaced item's value mentions target i.
      bool free = true;
      for (std::size_t j = 0; j < items.size(); ++j) {
        if (j != i && !placed[j] && depends_on(items[j].value, items[i].target)) free = false;
      }
      if (free) {
        plan_.steps.push_back({items[i].target, items[i].value});
        placed[i] = true;
        progress = true;
      }
    }
    if (!progress) {
      throw SchemeError(name_ + ": eliminations depend on each other cyclically; supply an [elimination] section");
    }
  }
}

void Scheme::validate_plan() const {
  for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (depends_on(plan_.steps[i].value, plan_.steps[j].target)) {
        throw SchemeError(name_ + ": elimination of " + plan_.steps[i].target.str() + " refers to " +
                          plan_.steps[j].target.str() + ", which is already eliminated");
      }
    }
  }
  std::vector<const Relation*> numeric;
  for (const Relation& rel : relations_) {
    Expr r = plan_.apply(rel.expr);
    for (const auto& st : plan_.steps) {
      if (depends_on(r, st.target)) {
        throw SchemeError(name_ + ": " + st.target.str() + " survives elimination in " + rel.label);
      }
    }
    try {
      nf::TermBudget budget(50000);
      nf::RatFun f = nf::to_ratfun(r);
      if (f.is_zero()) continue;
      if (!nf::has_opaque_atoms(f)) {
        throw SchemeError(name_ + ": the elimination plan does not solve " + rel.label);
      }
    } catch (const NormalizationBudget&) {
    } catch (const ZeroDenominator&) {
      throw SchemeError(name_ + ": an elimination denominator vanishes identically in " + rel.label);
    }
    numeric.push_back(&rel);
  }
  if (numeric.empty()) return;
  std::vector<Expr> extra;
  for (const Relation* rel : numeric) extra.push_back(rel->expr);
  OnShellSampler sampler(*this, extra);
  Rng rng = Rng::derive(0, "plan-validation:" + name_);
  for (int trial = 0; trial < 10; ++trial) {
    NumericEnv env = sampler.sample(rng);
    for (const Relation* rel : numeric) {
      Complex v = eval_numeric(rel->expr, env);
      double scale = std::max(1.0, term_scale(rel->expr, env));
      if (std::abs(v) > 1e-8 * scale) {
        throw SchemeError(name_ + ": the elimination plan does not solve " + rel->label);
      }
    }
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemeError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scheme parse_scheme(std::string_view text, const std::string& origin) {
  std::string name;
  std::string description;
  std::optional<SchemeKind> kind;
  std::optional<Expr> E;
  std::optional<Expr> omega;
  bool fixed = false;
  std::vector<ParamSpec> params;
  Bindings bound;
  std::vector<Substitution> steps;

  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string where = origin + ":" + std::to_string(lineno);
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SchemeError(where + ": malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "scheme" && section != "equations" && section != "params" && section != "elimination") {
        throw SchemeError(where + ": unknown section [" + section + "]");
      }
      continue;
    }
    if (section.empty()) throw SchemeError(where + ": entry outside a section");
    std::size_t eq = line.find('=');
    std::size_t colon = line.find(':');
    bool binding = eq != std::string::npos && (colon == std::string::npos || eq < colon);
    std::size_t sep = binding ? eq : colon;
    if (sep == std::string::npos) throw SchemeError(where + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, sep));
    std::string value = trim(std::string_view(line).substr(sep + 1));
    auto expr = [&](const std::string& t) {
      try {
        return parse(t);
      } catch (const ParseError& err) {
        throw SchemeError(where + ": " + err.what());
      }
    };
    if (section == "scheme") {
      if (key == "name") {
        name = value;
      } else if (key == "description") {
        description = value;
      } else if (key == "kind") {
        if (value == "difference") {
          kind = SchemeKind::Difference;
        } else if (value == "ddelta") {
          kind = SchemeKind::DifferentialDifference;
        } else {
          throw SchemeError(where + ": kind must be difference or ddelta");
        }
      } else if (key == "lattice") {
        if (value != "fixed" && value != "free") throw SchemeError(where + ": lattice must be fixed or free");
        fixed = value == "fixed";
      } else {
        throw SchemeError(where + ": unknown key '" + key + "'");
      }
    } else if (section == "equations") {
      if (key == "E") {
        E = expr(value);
      } else if (key == "Omega") {
        omega = expr(value);
      } else {
        throw SchemeError(where + ": unknown equation '" + key + "'");
      }
    } else if (section == "params") {
      if (binding) {
        bound[Symbol::param(key)] = expr(value);
        continue;
      }
      ParamSpec spec;
      spec.name = key;
      for (const std::string& part : split(value, ';')) {
        if (part.rfind("exclude", 0) == 0) {
          for (const std::string& v : split(part.substr(7), ',')) spec.exclude.push_back(parse_number(v, where));
        } else {
          std::string r = part.rfind("range", 0) == 0 ? trim(part.substr(5)) : part;
          std::size_t dots = r.find("..");
          if (dots == std::string::npos) throw SchemeError(where + ": expected 'exclude a,b' or 'lo..hi'");
          spec.lo = parse_number(r.substr(0, dots), where);
          spec.hi = parse_number(r.substr(dots + 2), where);
          if (!(spec.lo < spec.hi)) throw SchemeError(where + ": empty parameter range");
        }
      }
      params.push_back(spec);
    } else {
      if (!binding) throw SchemeError(where + ": expected target = expression");
      Expr target = expr(key);
      if (target.kind() != Expr::Kind::Sym || target.symbol().is_param()) {
        throw SchemeError(where + ": elimination target must be a variable");
      }
      steps.push_back({target.symbol(), expr(value)});
    }
  }
  if (!E) throw SchemeError(origin + ": missing E in [equations]");
  if (!omega) throw SchemeError(origin + ": missing Omega in [equations]");
  if (name.empty()) name = origin;
  if (!bound.empty()) {
    E = substitute(*E, bound);
    omega = substitute(*omega, bound);
    for (auto& st : steps) st.value = substitute(st.value, bound);
  }
  SchemeKind k = kind.value_or(has_time_derivative(*E) ? SchemeKind::DifferentialDifference : SchemeKind::Difference);
  std::optional<EliminationPlan> plan;
  if (!steps.empty()) plan = EliminationPlan{steps};
  try {
    Scheme s(name, k, *E, *omega, params, plan, fixed);
    s.set_description(description);
    return s;
  } catch (const SchemeError&) {
    throw;
  } catch (const Error& err) {
    throw SchemeError(origin + ": " + err.what());
  }
}

Scheme load_scheme(const std::string& path) {
  std::string stem = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
  return parse_scheme(read_text_file(path), stem);
}

SolvabilityReport check_solvability(const Scheme& s, int trials, Rng& rng) {
  SolvabilityReport rep;
  rep.trials = trials;
  auto re = shift_range(s.E());
  auto ro = shift_range(s.omega());
  struct Pair {
    Expr E, omega;
    Symbol xs, us;
  };
  Pair fwd{shift(s.E(), s.hi() - re->second), shift(s.omega(), s.hi() - ro->second), Symbol::x(s.hi()),
           Symbol::u(s.hi())};
  Pair bwd{shift(s.E(), s.lo() - re->first), shift(s.omega(), s.lo() - ro->first), Symbol::x(s.lo()),
           Symbol::u(s.lo())};
  auto jacobian = [](const Pair& p) {
    return std::vector<Expr>{diff(p.E, p.xs), diff(p.E, p.us), diff(p.omega, p.xs), diff(p.omega, p.us)};
  };
  std::vector<Expr> jf = jacobian(fwd);
  std::vector<Expr> jb = jacobian(bwd);
  std::set<Symbol> syms;
  std::vector<Expr> dens;
  for (const Pair* p : {&fwd, &bwd}) {
    for (const Expr* e : {&p->E, &p->omega}) {
      auto fs = free_symbols(*e);
      syms.insert(fs.begin(), fs.end());
      collect_singular(*e, dens);
    }
  }
  rep.min_forward = rep.min_backward = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    NumericEnv env;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxSampleTries && !ok; ++attempt) {
      env.clear();
      for (const Symbol& v : syms) {
        env[v] = v.is_param() ? sample_param_numeric(s.param(v.name()), rng) : rng.annulus(0.5, 2.0);
      }
      ok = true;
      for (const Expr& d : dens) {
        try {
          if (std::abs(eval_numeric(d, env)) < kDenominatorFloor) ok = false;
        } catch (const NumericError&) {
          ok = false;
        }
      }
    }
    if (!ok) throw SchemeError(s.name() + ": cannot find a regular sample point");
    auto det = [&](const std::vector<Expr>& j) {
      Complex d = eval_numeric(j[0], env) * eval_numeric(j[3], env) - eval_numeric(j[1], env) * eval_numeric(j[2], env);
      return std::abs(d);
    };
    rep.min_forward = std::min(rep.min_forward, det(jf));
    rep.min_backward = std::min(rep.min_backward, det(jb));
  }
  rep.forward_ok = rep.min_forward > 1e-9;
  rep.backward_ok = rep.min_backward > 1e-9;
  return rep;
}

Expr discrete_derivative(DiscreteDerivative kind) {
  auto ux_at = [](int k) { return (u(k + 1) - u(k)) / (x(k + 1) - x(k)); };
  auto uxx_at = [&](int k) { return 2 * (ux_at(k) - ux_at(k - 1)) / (x(k + 1) - x(k - 1)); };
  switch (kind) {
    case DiscreteDerivative::Ux:
      return ux_at(0);
    case DiscreteDerivative::UxBackward:
      return ux_at(-1);
    case DiscreteDerivative::UxForward:
      return ux_at(1);
    case DiscreteDerivative::UxxCentered:
      return uxx_at(0);
    case DiscreteDerivative::UxxForward:
      return uxx_at(1);
    case DiscreteDerivative::Uxxx:
      return 3 * (uxx_at(1) - uxx_at(0)) / (x(2) - x(-1));
  }
  return Expr();
}

std::optional<DiscreteDerivative> discrete_derivative_from_name(std::string_view name) {
  if (name == "u_x") return DiscreteDerivative::Ux;
  if (name == "u_x_") return DiscreteDerivative::UxBackward;
  if (name == "u_xbar") return DiscreteDerivative::UxForward;
  if (name == "u_xxbar" || name == "u_xx_") return DiscreteDerivative::UxxCentered;
  if (name == "u_xxbar_fwd") return DiscreteDerivative::UxxForward;
  if (name == "u_x_xxbar" || name == "u_xxx") return DiscreteDerivative::Uxxx;
  return std::nullopt;
}

Expr on_shell(const Scheme& s, const Expr& e) {
  if (s.is_ddelta() && depends_on(e, Symbol::utt()) && !s.plan().eliminates(Symbol::utt()) &&
      !depends_on(s.E(), Symbol::utt())) {
    throw SchemeError(s.name() + ": utt is not a coordinate of this first-order scheme");
  }
  return normalize(s.plan().apply(e));
}

std::vector<Expr> singular_subexpressions(const Expr& e) {
  std::vector<Expr> out;
  collect_singular(e, out);
  return out;
}

double term_scale(const Expr& e, const NumericEnv& env) {
  if (e.kind() != Expr::Kind::Add) return std::abs(eval_numeric(e, env));
  double s = 0;
  for (const Expr& t : e.args()) s += std::abs(eval_numeric(t, env));
  return s;
}

OnShellSampler::OnShellSampler(const Scheme& s, const std::vector<Expr>& extra) : scheme_(&s) {
  std::set<Symbol> syms;
  std::vector<Expr> all{s.E(), s.omega()};
  all.insert(all.end(), extra.begin(), extra.end());
  for (const auto& st : s.plan().steps) all.push_back(st.value);
  for (const Expr& e : all) {
    auto fs = deltasym::free_symbols(e);
    syms.insert(fs.begin(), fs.end());
    collect_singular(e, denominators_);
  }
  for (const Symbol& c : s.coordinates()) syms.insert(c);
  for (const Symbol& v : syms) {
    if (!s.plan().eliminates(v)) free_.push_back(v);
  }
}

NumericEnv OnShellSampler::sample(Rng& rng) const {
  const auto& steps = scheme_->plan().steps;
  for (int attempt = 0; attempt < kMaxSampleTries; ++attempt) {
    NumericEnv env;
    for (const Symbol& v : free_) {
      env[v] = v.is_param() ? sample_param_numeric(scheme_->param(v.name()), rng) : rng.annulus(0.5, 2.0);
    }
    bool ok = true;
    try {
      for (auto it = steps.rbegin(); it != steps.rend(); ++it) env[it->target] = eval_numeric(it->value, env);
      for (const Expr& d : denominators_) {
        if (std::abs(eval_numeric(d, env)) < kDenominatorFloor) ok = false;
      }
    } catch (const NumericError&) {
      ok = false;
    } catch (const ZeroDenominator&) {
      ok = false;
    }
    if (ok) return env;
  }
  throw SchemeError(scheme_->name() + ": cannot find a regular on-shell sample point");
}

std::optional<ExactEnv> OnShellSampler::sample_exact(Rng& rng) const {
  const auto& steps = scheme_->plan().steps;
  for (int attempt = 0; attempt < kMaxSampleTries; ++attempt) {
    ExactEnv env;
    for (const Symbol& v : free_) {
      env[v] = v.is_param() ? sample_param_exact(scheme_->param(v.name()), rng) : sample_variable_exact(rng);
    }
    bool ok = true;
    try {
      for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        auto v = eval_exact(it->value, env);
        if (!v) return std::nullopt;
        env[it->target] = *v;
      }
      for (const Expr& d : denominators_) {
        auto v = eval_exact(d, env);
        if (!v) return std::nullopt;
        if (std::abs(v->get_d()) < kDenominatorFloor) ok = false;
      }
    } catch (const ZeroDenominator&) {
      ok = false;
    }
    if (ok) return env;
  }
  throw SchemeError(scheme_->name() + ": cannot find a regular on-shell sample point");
}

}  // namespace deltasym
