#include "deltasym/normal_form.hpp"

#include <algorithm>
#include <unordered_map>

namespace deltasym {
namespace nf {

namespace {

thread_local std::size_t max_terms = 200000;
constexpr std::size_t kMaxProducts = 40000000;
// Cancellation is attempted eagerly only for numerators up to this size;
// the final normalization always attempts it.
constexpr std::size_t kEagerCancel = 400;

int sign3(int c) { return (c > 0) - (c < 0); }

void check_budget(std::size_t n) {
  if (n > max_terms) throw NormalizationBudget("expression too large to normalize");
}

RatFunPtr share(RatFun r) {
  if (r.is_zero()) return nullptr;
  return std::make_shared<const RatFun>(std::move(r));
}

int compare_ptr(const RatFunPtr& a, const RatFunPtr& b) {
  if (a.get() == b.get()) return 0;
  if (!a) return -1;
  if (!b) return 1;
  return compare(*a, *b);
}

const Exponent& zero_exponent() {
  static const Exponent z{Rational(0), nullptr};
  return z;
}

int compare_exponent(const Exponent& a, const Exponent& b) {
  if (int c = compare_ptr(a.sym, b.sym)) return c;
  return sign3(cmp(a.q, b.q));
}

int compare_atom(const Atom& a, const Atom& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case AtomKind::Sym:
      if (*a->sym < *b->sym) return -1;
      if (*b->sym < *a->sym) return 1;
      return 0;
    case AtomKind::Fn:
      if (a->func != b->func) return a->func < b->func ? -1 : 1;
      return compare_ptr(a->arg, b->arg);
    case AtomKind::PowBase:
      return compare_ptr(a->arg, b->arg);
  }
  return 0;
}

int compare_poly(const Poly& a, const Poly& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first)) return c;
    if (int c = sign3(cmp(ia->second, ib->second))) return c;
  }
  return 0;
}

int compare_den(const DenFactors& a, const DenFactors& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (int c = compare_poly(a[i].first, b[i].first)) return c;
    if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
  }
  return 0;
}

Atom make_atom(AtomKind kind, std::optional<Symbol> sym, Func func, RatFunPtr arg) {
  auto a = std::make_shared<AtomData>();
  a->kind = kind;
  a->sym = std::move(sym);
  a->func = func;
  a->arg = std::move(arg);
  return a;
}

RatFun monomial_ratfun(Monomial m, const Rational& c) {
  Poly p;
  if (sgn(c) != 0) p.emplace(std::move(m), c);
  return RatFun(std::move(p), {});
}

RatFun atom_power(const Atom& a, const Exponent& e) {
  if (e.is_zero()) return RatFun(Rational(1));
  Monomial m;
  m.factors.emplace_back(a, e);
  return monomial_ratfun(std::move(m), 1);
}

// --- exponents ------------------------------------------------------------

Exponent make_exponent(Rational q, const RatFun& s) {
  if (auto c = s.as_rational()) return {q + *c, nullptr};
  if (s.den().empty()) {
    auto it = s.num().find(Monomial{});
    if (it != s.num().end()) {
      q += it->second;
      Poly rest = s.num();
      rest.erase(Monomial{});
      return {q, share(RatFun(std::move(rest), {}))};
    }
  }
  return {q, share(s)};
}

Exponent add_exp(const Exponent& a, const Exponent& b) {
  Rational q = a.q + b.q;
  if (!a.sym && !b.sym) return {q, nullptr};
  if (!a.sym) return {q, b.sym};
  if (!b.sym) return {q, a.sym};
  return make_exponent(q, add(*a.sym, *b.sym));
}

Exponent scale_exp(const Exponent& a, const Rational& r) {
  if (sgn(r) == 0) return zero_exponent();
  if (!a.sym) return {a.q * r, nullptr};
  return {a.q * r, share(mul(*a.sym, RatFun(r)))};
}

int ratfun_sign(const RatFun& r) {
  if (r.is_zero()) return 0;
  return sgn(r.num().rbegin()->second);
}

// Sign in the lexicographic group order on (symbolic part, rational part).
int exp_sign(const Exponent& e) {
  if (e.sym) return ratfun_sign(*e.sym);
  return sgn(e.q);
}

const Exponent& min_exp(const Exponent& a, const Exponent& b) {
  return exp_sign(add_exp(a, scale_exp(b, -1))) <= 0 ? a : b;
}

// --- monomials ------------------------------------------------------------

Monomial mul_mono(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.factors.reserve(a.factors.size() + b.factors.size());
  std::size_t i = 0, j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    int c;
    if (i == a.factors.size()) {
      c = 1;
    } else if (j == b.factors.size()) {
      c = -1;
    } else {
      c = compare_atom(a.factors[i].first, b.factors[j].first);
    }
    if (c < 0) {
      r.factors.push_back(a.factors[i++]);
    } else if (c > 0) {
      r.factors.push_back(b.factors[j++]);
    } else {
      Exponent e = add_exp(a.factors[i].second, b.factors[j].second);
      if (!e.is_zero()) r.factors.emplace_back(a.factors[i].first, std::move(e));
      ++i;
      ++j;
    }
  }
  if (a.exp_arg && b.exp_arg) {
    r.exp_arg = share(add(*a.exp_arg, *b.exp_arg));
  } else {
    r.exp_arg = a.exp_arg ? a.exp_arg : b.exp_arg;
  }
  return r;
}

Monomial pow_mono(const Monomial& a, const Rational& n) {
  Monomial r;
  for (const auto& [atom, e] : a.factors) {
    Exponent s = scale_exp(e, n);
    if (!s.is_zero()) r.factors.emplace_back(atom, std::move(s));
  }
  if (a.exp_arg) r.exp_arg = share(mul(*a.exp_arg, RatFun(n)));
  return r;
}

Monomial inv_mono(const Monomial& a) { return pow_mono(a, -1); }

Rational rational_pow(const Rational& c, unsigned long n) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), c.get_num_mpz_t(), n);
  mpz_pow_ui(den.get_mpz_t(), c.get_den_mpz_t(), n);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// --- polynomials ----------------------------------------------------------

void add_term(Poly& p, const Monomial& m, const Rational& c) {
  if (sgn(c) == 0) return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (sgn(it->second) == 0) p.erase(it);
  }
}

Poly poly_add(Poly a, const Poly& b) {
  for (const auto& [m, c] : b) add_term(a, m, c);
  return a;
}

Poly poly_mul_raw(const Poly& a, const Poly& b) {
  if (a.size() * b.size() > kMaxProducts || a.size() * b.size() > 50 * max_terms) {
    throw NormalizationBudget("expression too large to normalize");
  }
  Poly r;
  for (const auto& [ma, ca] : a) {
    for (const auto& [mb, cb] : b) add_term(r, mul_mono(ma, mb), ca * cb);
    check_budget(r.size());
  }
  return r;
}

Poly poly_one() {
  Poly p;
  p.emplace(Monomial{}, Rational(1));
  return p;
}

Poly den_product(const DenFactors& d) {
  Poly r = poly_one();
  for (const auto& [f, m] : d) {
    for (int k = 0; k < m; ++k) r = poly_mul_raw(r, f);
  }
  return r;
}

DenFactors merge_den(const DenFactors& a, const DenFactors& b) {
  DenFactors r;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c;
    if (i == a.size()) {
      c = 1;
    } else if (j == b.size()) {
      c = -1;
    } else {
      c = compare_poly(a[i].first, b[j].first);
    }
    if (c < 0) {
      r.push_back(a[i++]);
    } else if (c > 0) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

// lcm(a, b) / a as a factor list, given the lcm.
DenFactors den_quotient(const DenFactors& l, const DenFactors& a) {
  DenFactors r;
  for (const auto& [f, m] : l) {
    int have = 0;
    for (const auto& [g, k] : a) {
      if (compare_poly(f, g) == 0) have = k;
    }
    if (m > have) r.emplace_back(f, m - have);
  }
  return r;
}

DenFactors den_lcm(const DenFactors& a, const DenFactors& b) {
  DenFactors merged = merge_den(a, b);
  for (auto& [f, m] : merged) {
    int ma = 0, mb = 0;
    for (const auto& [g, k] : a) {
      if (compare_poly(f, g) == 0) ma = k;
    }
    for (const auto& [g, k] : b) {
      if (compare_poly(f, g) == 0) mb = k;
    }
    m = std::max(ma, mb);
  }
  return merged;
}

// Power bases sharing one symbolic exponent: a^e b^e = (ab)^e.
bool shares_symbolic_exponent(const Monomial& m, std::size_t i) {
  const auto& [a, e] = m.factors[i];
  if (a->kind != AtomKind::PowBase || !e.sym) return false;
  for (std::size_t j = 0; j < m.factors.size(); ++j) {
    const auto& [b, f] = m.factors[j];
    if (j != i && b->kind == AtomKind::PowBase && compare_exponent(e, f) == 0) return true;
  }
  return false;
}

bool needs_reduction(const Monomial& m) {
  for (std::size_t i = 0; i < m.factors.size(); ++i) {
    const auto& [a, e] = m.factors[i];
    if (a->kind == AtomKind::PowBase && (sgn(e.q) < 0 || e.q >= 1)) return true;
    if (shares_symbolic_exponent(m, i)) return true;
  }
  return false;
}

// Moves integer parts of power-base exponents back into the base.
RatFun general_pow(const RatFun& base, const Exponent& e);

RatFun reduce(Poly raw) {
  bool dirty = false;
  for (const auto& [m, c] : raw) {
    if (needs_reduction(m)) {
      dirty = true;
      break;
    }
  }
  if (!dirty) return RatFun(std::move(raw), {});
  Poly clean;
  RatFun extra_sum;
  for (const auto& [m, c] : raw) {
    if (!needs_reduction(m)) {
      add_term(clean, m, c);
      continue;
    }
    Monomial kept;
    kept.exp_arg = m.exp_arg;
    RatFun extra(c);
    std::vector<std::pair<Exponent, RatFun>> merged_bases;
    for (std::size_t i = 0; i < m.factors.size(); ++i) {
      const auto& [a, e] = m.factors[i];
      if (shares_symbolic_exponent(m, i)) {
        auto it = std::find_if(merged_bases.begin(), merged_bases.end(),
                               [&](const auto& g) { return compare_exponent(g.first, e) == 0; });
        if (it == merged_bases.end()) merged_bases.emplace_back(e, *a->arg);
        else it->second = mul(it->second, *a->arg);
      } else if (a->kind == AtomKind::PowBase && (sgn(e.q) < 0 || e.q >= 1)) {
        mpz_class n;
        mpz_fdiv_q(n.get_mpz_t(), e.q.get_num_mpz_t(), e.q.get_den_mpz_t());
        Exponent rest{e.q - Rational(n), e.sym};
        if (!rest.is_zero()) kept.factors.emplace_back(a, rest);
        if (!n.fits_slong_p()) throw NormalizationBudget("exponent too large");
        extra = mul(extra, pow_int(*a->arg, n.get_si()));
      } else {
        kept.factors.emplace_back(a, e);
      }
    }
    for (const auto& [e, base] : merged_bases) extra = mul(extra, general_pow(base, e));
    extra_sum = add(extra_sum, mul(monomial_ratfun(std::move(kept), 1), extra));
  }
  return add(RatFun(std::move(clean), {}), extra_sum);
}

// Minimal exponent of every atom (and the exp argument) over all terms.
Monomial poly_content(const Poly& p) {
  Monomial mins;
  bool first = true;
  for (const auto& [m, c] : p) {
    if (first) {
      mins = m;
      first = false;
      continue;
    }
    Monomial next;
    std::size_t i = 0, j = 0;
    while (i < mins.factors.size() || j < m.factors.size()) {
      int cmpv;
      if (i == mins.factors.size()) {
        cmpv = 1;
      } else if (j == m.factors.size()) {
        cmpv = -1;
      } else {
        cmpv = compare_atom(mins.factors[i].first, m.factors[j].first);
      }
      if (cmpv < 0) {
        const Exponent& e = min_exp(mins.factors[i].second, zero_exponent());
        if (!e.is_zero()) next.factors.emplace_back(mins.factors[i].first, e);
        ++i;
      } else if (cmpv > 0) {
        const Exponent& e = min_exp(zero_exponent(), m.factors[j].second);
        if (!e.is_zero()) next.factors.emplace_back(m.factors[j].first, e);
        ++j;
      } else {
        next.factors.emplace_back(mins.factors[i].first,
                                  min_exp(mins.factors[i].second, m.factors[j].second));
        ++i;
        ++j;
      }
    }
    RatFun ea = mins.exp_arg ? *mins.exp_arg : RatFun();
    RatFun eb = m.exp_arg ? *m.exp_arg : RatFun();
    next.exp_arg = share(ratfun_sign(sub(ea, eb)) <= 0 ? ea : eb);
    mins = std::move(next);
  }
  return mins;
}

Poly poly_times_mono(const Poly& p, const Monomial& m, const Rational& c) {
  Poly r;
  for (const auto& [pm, pc] : p) add_term(r, mul_mono(pm, m), pc * c);
  return r;
}

// a / b when the rational part of every exponent of the quotient is
// nonnegative. Symbolic exponents and exp factors are group-like and divide
// freely.
std::optional<Monomial> divide_mono(const Monomial& a, const Monomial& b) {
  Monomial r;
  std::size_t i = 0, j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    int c;
    if (i == a.factors.size()) {
      c = 1;
    } else if (j == b.factors.size()) {
      c = -1;
    } else {
      c = compare_atom(a.factors[i].first, b.factors[j].first);
    }
    if (c < 0) {
      r.factors.push_back(a.factors[i++]);
      continue;
    }
    Exponent d = c > 0 ? scale_exp(b.factors[j].second, -1)
                       : add_exp(a.factors[i].second, scale_exp(b.factors[j].second, -1));
    const Atom& atom = c > 0 ? b.factors[j].first : a.factors[i].first;
    if (sgn(d.q) < 0) return std::nullopt;
    if (!d.is_zero()) r.factors.emplace_back(atom, std::move(d));
    if (c == 0) ++i;
    ++j;
  }
  if (a.exp_arg || b.exp_arg) {
    RatFun ea = a.exp_arg ? *a.exp_arg : RatFun();
    RatFun eb = b.exp_arg ? *b.exp_arg : RatFun();
    r.exp_arg = share(sub(ea, eb));
  }
  return r;
}

// Exact quotient num / f when f divides num, nullopt otherwise (or when
// the division could not be decided within budget).
std::optional<Poly> exact_divide(const Poly& num, const Poly& f) {
  if (num.empty()) return Poly{};
  Monomial content = poly_content(num);
  Poly r = poly_times_mono(num, inv_mono(content), 1);
  const auto& [lf_m, lf_c] = *f.rbegin();
  Poly q;
  std::size_t budget = 64 * (num.size() + 4);
  while (!r.empty()) {
    if (budget-- == 0) return std::nullopt;
    const auto& [lr_m, lr_c] = *r.rbegin();
    auto t = divide_mono(lr_m, lf_m);
    if (!t) return std::nullopt;
    Rational c = lr_c / lf_c;
    Monomial tm = *t;
    add_term(q, tm, c);
    for (const auto& [fm, fc] : f) add_term(r, mul_mono(tm, fm), -c * fc);
    check_budget(r.size());
  }
  RatFun out = reduce(poly_times_mono(q, content, 1));
  if (!out.den().empty()) return std::nullopt;
  return out.num();
}

RatFun cancel(const RatFun& r) {
  if (r.den().empty()) return r;
  Poly num = r.num();
  DenFactors keep;
  for (auto [f, m] : r.den()) {
    while (m > 0) {
      auto q = exact_divide(num, f);
      if (!q) break;
      num = std::move(*q);
      --m;
    }
    if (m > 0) keep.emplace_back(f, m);
  }
  if (num.empty()) return RatFun();
  return RatFun(std::move(num), std::move(keep));
}

RatFun finish(RatFun r) {
  if (r.is_zero()) return RatFun();
  if (r.den().empty() || r.num().size() > kEagerCancel) return r;
  return cancel(r);
}

// Atom of s when every occurrence has exponent exactly 1/2 and s is absent
// from some term, so that multiplying by the conjugate eliminates it.
std::optional<Atom> radical_atom(const Poly& f) {
  std::vector<Atom> candidates;
  for (const auto& [m, c] : f) {
    for (const auto& [a, e] : m.factors) {
      if (!e.sym && e.q == Rational(1, 2)) candidates.push_back(a);
    }
  }
  for (const Atom& a : candidates) {
    bool ok = true, absent = false;
    for (const auto& [m, c] : f) {
      bool found = false;
      for (const auto& [b, e] : m.factors) {
        if (compare_atom(a, b) == 0) {
          found = true;
          if (e.sym || e.q != Rational(1, 2)) ok = false;
        }
      }
      if (!found) absent = true;
    }
    if (ok && absent) return a;
  }
  return std::nullopt;
}

bool mono_has_atom(const Monomial& m, const Atom& a) {
  for (const auto& [b, e] : m.factors) {
    if (compare_atom(a, b) == 0) return true;
  }
  return false;
}

RatFun inv_poly(const Poly& p) {
  if (p.empty()) throw ZeroDenominator("division by zero");
  if (p.size() == 1) {
    const auto& [m, c] = *p.begin();
    Poly single;
    single.emplace(inv_mono(m), 1 / c);
    return reduce(std::move(single));
  }
  Monomial content = poly_content(p);
  Poly f = poly_times_mono(p, inv_mono(content), 1);
  Rational lc = f.rbegin()->second;
  for (auto& [m, c] : f) c /= lc;
  Poly unit;
  unit.emplace(inv_mono(content), 1 / lc);
  RatFun unit_inv = reduce(std::move(unit));
  if (auto s = radical_atom(f)) {
    Poly conj;
    for (const auto& [m, c] : f) add_term(conj, m, mono_has_atom(m, *s) ? -c : c);
    RatFun prod = reduce(poly_mul_raw(f, conj));
    return mul(unit_inv, mul(RatFun(std::move(conj), {}), inv(prod)));
  }
  DenFactors den;
  den.emplace_back(std::move(f), 1);
  return mul(unit_inv, RatFun(poly_one(), std::move(den)));
}

std::optional<Atom> plain_atom(const RatFun& r) {
  if (!r.den().empty() || r.num().size() != 1) return std::nullopt;
  const auto& [m, c] = *r.num().begin();
  if (c != 1 || m.exp_arg || m.factors.size() != 1) return std::nullopt;
  const Exponent& e = m.factors[0].second;
  if (e.sym || e.q != 1) return std::nullopt;
  return m.factors[0].first;
}

std::optional<mpz_class> exact_root(const mpz_class& v, unsigned long q) {
  mpz_class r;
  if (mpz_root(r.get_mpz_t(), v.get_mpz_t(), q) == 0) return std::nullopt;
  return r;
}

RatFun powbase(const RatFun& base, const Exponent& e) {
  mpz_class n;
  mpz_fdiv_q(n.get_mpz_t(), e.q.get_num_mpz_t(), e.q.get_den_mpz_t());
  Exponent rest{e.q - Rational(n), e.sym};
  if (!n.fits_slong_p()) throw NormalizationBudget("exponent too large");
  Atom atom = make_atom(AtomKind::PowBase, std::nullopt, Func::Ln, share(base));
  return mul(atom_power(atom, rest), pow_int(base, n.get_si()));
}

RatFun pow_const(const Rational& c, const Exponent& e) {
  if (c == 1) return RatFun(Rational(1));
  if (!e.sym && sgn(c) > 0) {
    unsigned long q = e.q.get_den().get_ui();
    auto rn = exact_root(c.get_num(), q);
    auto rd = exact_root(c.get_den(), q);
    if (rn && rd && e.q.get_num().fits_slong_p()) {
      Rational r(*rn, *rd);
      r.canonicalize();
      return pow_int(RatFun(r), e.q.get_num().get_si());
    }
  }
  return powbase(RatFun(c), e);
}

RatFun general_pow(const RatFun& base, const Exponent& e) {
  if (e.is_zero()) return RatFun(Rational(1));
  if (auto a = plain_atom(base)) return atom_power(*a, e);
  if (base.den().empty() && base.num().size() == 1) {
    const auto& [m, c] = *base.num().begin();
    if (!m.exp_arg && m.factors.empty()) return pow_const(c, e);
    if (!m.exp_arg && m.factors.size() == 1 && sgn(c) > 0 && !m.factors[0].second.sym &&
        m.factors[0].second.q == 1) {
      return mul(pow_const(c, e), atom_power(m.factors[0].first, e));
    }
  }
  return powbase(base, e);
}

bool any_symbol(const RatFun& r, const std::function<bool(const Symbol&)>& pred);

bool poly_any_symbol(const Poly& p, const std::function<bool(const Symbol&)>& pred) {
  for (const auto& [m, c] : p) {
    for (const auto& [a, e] : m.factors) {
      if (a->kind == AtomKind::Sym ? pred(*a->sym) : any_symbol(*a->arg, pred)) return true;
      if (e.sym && any_symbol(*e.sym, pred)) return true;
    }
    if (m.exp_arg && any_symbol(*m.exp_arg, pred)) return true;
  }
  return false;
}

bool any_symbol(const RatFun& r, const std::function<bool(const Symbol&)>& pred) {
  if (poly_any_symbol(r.num(), pred)) return true;
  for (const auto& [f, m] : r.den()) {
    if (poly_any_symbol(f, pred)) return true;
  }
  return false;
}

bool poly_opaque(const Poly& p) {
  for (const auto& [m, c] : p) {
    if (m.exp_arg) return true;
    for (const auto& [a, e] : m.factors) {
      if (a->kind != AtomKind::Sym || e.sym || e.q.get_den() != 1) return true;
    }
  }
  return false;
}

Expr poly_expr(const Poly& p);

Expr exponent_expr(const Exponent& e) {
  Expr r(e.q);
  if (e.sym) r = r + to_expr(*e.sym);
  return r;
}

Expr mono_expr(const Monomial& m, const Rational& c) {
  std::vector<Expr> f{Expr(c)};
  for (const auto& [a, e] : m.factors) {
    Expr base;
    switch (a->kind) {
      case AtomKind::Sym:
        base = Expr(*a->sym);
        break;
      case AtomKind::Fn:
        base = Expr::fn(a->func, to_expr(*a->arg));
        break;
      case AtomKind::PowBase:
        base = to_expr(*a->arg);
        break;
    }
    f.push_back(Expr::pow(base, exponent_expr(e)));
  }
  if (m.exp_arg) f.push_back(Expr::fn(Func::Exp, to_expr(*m.exp_arg)));
  return Expr::mul(std::move(f));
}

Expr poly_expr(const Poly& p) {
  std::vector<Expr> terms;
  for (auto it = p.rbegin(); it != p.rend(); ++it) terms.push_back(mono_expr(it->first, it->second));
  return Expr::add(std::move(terms));
}

Expr den_expr(const DenFactors& d) {
  std::vector<Expr> f;
  for (const auto& [poly, m] : d) f.push_back(Expr::pow(poly_expr(poly), Expr(-m)));
  return Expr::mul(std::move(f));
}

class Builder {
 public:
  RatFun build(const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Const:
        return RatFun(e.value());
      case Expr::Kind::Sym:
        return RatFun(e.symbol());
      default:
        break;
    }
    auto it = memo_.find(e.id());
    if (it != memo_.end()) return it->second;
    RatFun r = compute(e);
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  RatFun compute(const Expr& e) {
    switch (e.kind()) {
      case Expr::Kind::Add: {
        RatFun acc;
        for (const auto& c : e.args()) acc = add(acc, build(c));
        return acc;
      }
      case Expr::Kind::Mul: {
        RatFun acc(Rational(1));
        for (const auto& c : e.args()) {
          acc = mul(acc, build(c));
          if (acc.is_zero()) break;
        }
        return acc;
      }
      case Expr::Kind::Pow: {
        const Expr& b = e.args()[0];
        const Expr& x = e.args()[1];
        if (auto n = x.as_integer()) {
          if (b.kind() == Expr::Kind::Mul) {
            RatFun acc(Rational(1));
            for (const auto& c : b.args()) acc = mul(acc, pow_int(build(c), *n));
            return acc;
          }
          return pow_int(build(b), *n);
        }
        return pow(build(b), build(x));
      }
      case Expr::Kind::Fn:
        return apply_fn(e.func(), build(e.args()[0]));
      default:
        return RatFun();
    }
  }

  std::unordered_map<const void*, RatFun> memo_;
};

}  // namespace

TermBudget::TermBudget(std::size_t limit) : saved_(max_terms) { max_terms = std::min(max_terms, limit); }
TermBudget::~TermBudget() { max_terms = saved_; }

RatFun::RatFun(const Rational& q) {
  if (sgn(q) != 0) num_.emplace(Monomial{}, q);
}

RatFun::RatFun(const Symbol& s) {
  Monomial m;
  m.factors.emplace_back(make_atom(AtomKind::Sym, s, Func::Ln, nullptr),
                         Exponent{Rational(1), nullptr});
  num_.emplace(std::move(m), Rational(1));
}

std::optional<Rational> RatFun::as_rational() const {
  if (!den_.empty()) return std::nullopt;
  if (num_.empty()) return Rational(0);
  if (num_.size() != 1) return std::nullopt;
  const auto& [m, c] = *num_.begin();
  if (!m.factors.empty() || m.exp_arg) return std::nullopt;
  return c;
}

int compare(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.factors.size() || j < b.factors.size()) {
    int c;
    if (i == a.factors.size()) {
      c = 1;
    } else if (j == b.factors.size()) {
      c = -1;
    } else {
      c = compare_atom(a.factors[i].first, b.factors[j].first);
    }
    int r;
    if (c < 0) {
      r = compare_exponent(a.factors[i++].second, zero_exponent());
    } else if (c > 0) {
      r = compare_exponent(zero_exponent(), b.factors[j++].second);
    } else {
      r = compare_exponent(a.factors[i++].second, b.factors[j++].second);
    }
    if (r) return r;
  }
  return compare_ptr(a.exp_arg, b.exp_arg);
}

int compare(const RatFun& a, const RatFun& b) {
  if (int c = compare_poly(a.num(), b.num())) return c;
  return compare_den(a.den(), b.den());
}

RatFun add(const RatFun& a, const RatFun& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (compare_den(a.den(), b.den()) == 0) {
    Poly p = poly_add(a.num(), b.num());
    if (p.empty()) return RatFun();
    return finish(RatFun(std::move(p), a.den()));
  }
  DenFactors l = den_lcm(a.den(), b.den());
  RatFun na = reduce(poly_mul_raw(a.num(), den_product(den_quotient(l, a.den()))));
  RatFun nb = reduce(poly_mul_raw(b.num(), den_product(den_quotient(l, b.den()))));
  RatFun s = add(na, nb);
  if (s.is_zero()) return RatFun();
  return finish(RatFun(s.num(), merge_den(s.den(), l)));
}

RatFun neg(const RatFun& a) {
  Poly p = a.num();
  for (auto& [m, c] : p) c = -c;
  return RatFun(std::move(p), a.den());
}

RatFun sub(const RatFun& a, const RatFun& b) { return add(a, neg(b)); }

RatFun mul(const RatFun& a, const RatFun& b) {
  if (a.is_zero() || b.is_zero()) return RatFun();
  if (auto c = a.as_rational(); c && *c == 1) return b;
  if (auto c = b.as_rational(); c && *c == 1) return a;
  RatFun n = reduce(poly_mul_raw(a.num(), b.num()));
  if (n.is_zero()) return RatFun();
  DenFactors d = merge_den(merge_den(a.den(), b.den()), n.den());
  return finish(RatFun(n.num(), std::move(d)));
}

RatFun inv(const RatFun& a) {
  if (a.is_zero()) throw ZeroDenominator("division by zero");
  RatFun d = reduce(den_product(a.den()));
  return mul(d, inv_poly(a.num()));
}

RatFun div(const RatFun& a, const RatFun& b) { return mul(a, inv(b)); }

RatFun pow_int(const RatFun& base, long n) {
  if (n == 0) return RatFun(Rational(1));
  if (base.is_zero()) {
    if (n < 0) throw ZeroDenominator("zero raised to a negative power");
    return RatFun();
  }
  if (n < 0) return inv(pow_int(base, -n));
  if (n == 1) return base;
  if (base.den().empty() && base.num().size() == 1) {
    const auto& [m, c] = *base.num().begin();
    Poly p;
    p.emplace(pow_mono(m, Rational(n)), rational_pow(c, static_cast<unsigned long>(n)));
    return reduce(std::move(p));
  }
  if (n > 4096) throw NormalizationBudget("power too large to expand");
  RatFun result(Rational(1));
  RatFun sq = base;
  for (long k = n;;) {
    if (k & 1) result = mul(result, sq);
    k >>= 1;
    if (k == 0) break;
    sq = mul(sq, sq);
  }
  return result;
}

RatFun pow(const RatFun& base, const RatFun& exponent) {
  if (auto q = exponent.as_rational()) {
    if (q->get_den() == 1 && q->get_num().fits_slong_p()) {
      return pow_int(base, q->get_num().get_si());
    }
    if (base.is_zero()) {
      if (sgn(*q) > 0) return RatFun();
      throw ZeroDenominator("zero raised to a negative power");
    }
    return general_pow(base, Exponent{*q, nullptr});
  }
  if (base.is_zero()) throw ZeroDenominator("zero raised to a symbolic power");
  if (auto c = base.as_rational(); c && *c == 1) return base;
  return general_pow(base, make_exponent(0, exponent));
}

RatFun apply_fn(Func f, const RatFun& arg) {
  switch (f) {
    case Func::Exp: {
      if (arg.is_zero()) return RatFun(Rational(1));
      Monomial m;
      m.exp_arg = share(arg);
      return monomial_ratfun(std::move(m), 1);
    }
    case Func::Sqrt:
      return pow(arg, RatFun(Rational(1, 2)));
    case Func::Ln:
      if (auto c = arg.as_rational(); c && *c == 1) return RatFun();
      if (arg.is_zero()) throw NumericError("logarithm of zero");
      break;
    case Func::Sin:
      if (arg.is_zero()) return RatFun();
      break;
    case Func::Cos:
      if (arg.is_zero()) return RatFun(Rational(1));
      break;
  }
  return atom_power(make_atom(AtomKind::Fn, std::nullopt, f, share(arg)),
                    Exponent{Rational(1), nullptr});
}

RatFun to_ratfun(const Expr& e) {
  Builder b;
  return cancel(b.build(e));
}

Expr to_expr(const RatFun& r) {
  if (r.is_zero()) return Expr();
  if (r.den().empty()) return poly_expr(r.num());
  return Expr::mul({poly_expr(r.num()), den_expr(r.den())});
}

bool has_opaque_atoms(const RatFun& r) {
  if (poly_opaque(r.num())) return true;
  for (const auto& [f, m] : r.den()) {
    if (poly_opaque(f)) return true;
  }
  return false;
}

bool depends_on(const RatFun& r, const Symbol& v) {
  return any_symbol(r, [&](const Symbol& s) { return s == v; });
}

std::optional<int> degree_in(const RatFun& r, const Symbol& v) {
  auto is_v = [&](const Symbol& s) { return s == v; };
  for (const auto& [f, m] : r.den()) {
    if (poly_any_symbol(f, is_v)) return std::nullopt;
  }
  int deg = 0;
  for (const auto& [m, c] : r.num()) {
    if (m.exp_arg && any_symbol(*m.exp_arg, is_v)) return std::nullopt;
    for (const auto& [a, e] : m.factors) {
      if (e.sym && any_symbol(*e.sym, is_v)) return std::nullopt;
      if (a->kind == AtomKind::Sym) {
        if (*a->sym != v) continue;
        if (e.sym || e.q.get_den() != 1 || sgn(e.q) < 0 || !e.q.get_num().fits_sint_p()) {
          return std::nullopt;
        }
        deg = std::max(deg, static_cast<int>(e.q.get_num().get_si()));
      } else if (any_symbol(*a->arg, is_v)) {
        return std::nullopt;
      }
    }
  }
  return deg;
}

RatFun coefficient_of(const RatFun& r, const Symbol& v, int k) {
  Poly out;
  for (const auto& [m, c] : r.num()) {
    Monomial rest;
    rest.exp_arg = m.exp_arg;
    int power = 0;
    for (const auto& [a, e] : m.factors) {
      if (a->kind == AtomKind::Sym && *a->sym == v && !e.sym && e.q.get_den() == 1) {
        power = static_cast<int>(e.q.get_num().get_si());
      } else {
        rest.factors.emplace_back(a, e);
      }
    }
    if (power == k) add_term(out, rest, c);
  }
  return finish(RatFun(std::move(out), r.den()));
}

int compare(const BasisKey& a, const BasisKey& b) {
  if (int c = compare(a.mono, b.mono)) return c;
  return compare_den(a.den, b.den);
}

Expr to_expr(const BasisKey& k) {
  Expr m = mono_expr(k.mono, 1);
  if (k.den.empty()) return m;
  return Expr::mul({m, den_expr(k.den)});
}

std::vector<std::pair<BasisKey, RatFun>> decompose(
    const RatFun& r, const std::function<bool(const Symbol&)>& is_basis_symbol) {
  DenFactors basis_den, coef_den;
  for (const auto& fm : r.den()) {
    (poly_any_symbol(fm.first, is_basis_symbol) ? basis_den : coef_den).push_back(fm);
  }
  struct KeyLess {
    bool operator()(const BasisKey& a, const BasisKey& b) const { return compare(a, b) < 0; }
  };
  std::map<BasisKey, Poly, KeyLess> groups;
  for (const auto& [m, c] : r.num()) {
    BasisKey key;
    key.den = basis_den;
    Monomial cm;
    for (const auto& [a, e] : m.factors) {
      bool basis = a->kind == AtomKind::Sym ? is_basis_symbol(*a->sym)
                                            : any_symbol(*a->arg, is_basis_symbol);
      if (e.sym && any_symbol(*e.sym, is_basis_symbol)) basis = true;
      (basis ? key.mono : cm).factors.emplace_back(a, e);
    }
    if (m.exp_arg) {
      (any_symbol(*m.exp_arg, is_basis_symbol) ? key.mono : cm).exp_arg = m.exp_arg;
    }
    add_term(groups[key], cm, c);
  }
  std::vector<std::pair<BasisKey, RatFun>> out;
  for (auto& [key, poly] : groups) {
    if (poly.empty()) continue;
    out.emplace_back(key, cancel(RatFun(std::move(poly), coef_den)));
  }
  return out;
}

}  // namespace nf

Expr normalize(const Expr& e) { return nf::to_expr(nf::to_ratfun(e)); }

bool normalizes_to_zero(const Expr& e) { return nf::to_ratfun(e).is_zero(); }

}  // namespace deltasym
