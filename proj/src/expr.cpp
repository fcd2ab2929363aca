#include "deltasym/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace deltasym {

struct Expr::Node {
  Kind kind = Kind::Const;
  Rational value;
  std::optional<Symbol> sym;
  Func func = Func::Exp;
  std::vector<Expr> args;
  std::size_t size = 1;
};

namespace {

std::shared_ptr<Expr::Node> make_node(Expr::Kind kind) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  return n;
}

}  // namespace

std::string Symbol::str() const {
  switch (kind_) {
    case SymbolKind::Param:
      return name_;
    case SymbolKind::X:
      return "x[" + std::to_string(shift_) + "]";
    case SymbolKind::U:
      return "u[" + std::to_string(shift_) + "]";
    case SymbolKind::T:
      return "t";
    case SymbolKind::Ut:
      return "ut";
    case SymbolKind::Utt:
      return "utt";
    case SymbolKind::Ux:
      return "ux";
    case SymbolKind::Uxt:
      return "uxt";
  }
  return "?";
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Exp:
      return "exp";
    case Func::Ln:
      return "ln";
    case Func::Sqrt:
      return "sqrt";
    case Func::Sin:
      return "sin";
    case Func::Cos:
      return "cos";
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  for (Func f : {Func::Exp, Func::Ln, Func::Sqrt, Func::Sin, Func::Cos}) {
    if (func_name(f) == name) return f;
  }
  return std::nullopt;
}

Expr::Expr() : node_(make_node(Kind::Const)) {}

Expr::Expr(int value) : Expr(Rational(value)) {}

Expr::Expr(const Rational& value) {
  auto n = make_node(Kind::Const);
  n->value = value;
  n->value.canonicalize();
  node_ = std::move(n);
}

Expr::Expr(const Symbol& symbol) {
  auto n = make_node(Kind::Sym);
  n->sym = symbol;
  node_ = std::move(n);
}

Expr::Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::value() const { return node_->value; }
const Symbol& Expr::symbol() const { return *node_->sym; }
Func Expr::func() const { return node_->func; }
const std::vector<Expr>& Expr::args() const { return node_->args; }
std::size_t Expr::node_count() const { return node_->size; }

bool Expr::is_zero() const { return is_const() && sgn(value()) == 0; }
bool Expr::is_one() const { return is_const() && value() == 1; }

std::optional<long> Expr::as_integer() const {
  if (!is_const() || value().get_den() != 1) return std::nullopt;
  if (!value().get_num().fits_slong_p()) return std::nullopt;
  return value().get_num().get_si();
}

Expr Expr::add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  Rational constant = 0;
  for (auto& t : terms) {
    if (t.kind() == Kind::Add) {
      for (const auto& c : t.args()) {
        if (c.is_const()) {
          constant += c.value();
        } else {
          flat.push_back(c);
        }
      }
    } else if (t.is_const()) {
      constant += t.value();
    } else {
      flat.push_back(t);
    }
  }
  if (sgn(constant) != 0) flat.emplace_back(constant);
  if (flat.empty()) return Expr();
  if (flat.size() == 1) return flat.front();
  auto n = make_node(Kind::Add);
  for (const auto& c : flat) n->size += c.node_count();
  n->args = std::move(flat);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::mul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  Rational constant = 1;
  for (auto& f : factors) {
    if (f.kind() == Kind::Mul) {
      for (const auto& c : f.args()) {
        if (c.is_const()) {
          constant *= c.value();
        } else {
          flat.push_back(c);
        }
      }
    } else if (f.is_const()) {
      constant *= f.value();
    } else {
      flat.push_back(f);
    }
  }
  if (sgn(constant) == 0) return Expr();
  if (constant != 1) flat.insert(flat.begin(), Expr(constant));
  if (flat.empty()) return Expr(1);
  if (flat.size() == 1) return flat.front();
  auto n = make_node(Kind::Mul);
  for (const auto& c : flat) n->size += c.node_count();
  n->args = std::move(flat);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

namespace {

Rational rational_ipow(const Rational& b, long n) {
  Rational result = 1;
  Rational base = b;
  unsigned long k = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  while (k) {
    if (k & 1u) result *= base;
    base *= base;
    k >>= 1u;
  }
  if (n < 0) result = 1 / result;
  return result;
}

}  // namespace

Expr Expr::pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return Expr(1);
  auto n = exponent.as_integer();
  if (base.is_const() && n && std::labs(*n) <= 64 &&
      !(base.is_zero() && *n < 0)) {
    return Expr(rational_ipow(base.value(), *n));
  }
  if (base.is_zero() && exponent.is_const() && sgn(exponent.value()) > 0) {
    return Expr();
  }
  if (base.kind() == Kind::Pow && n) {
    auto inner = base.args()[1].as_integer();
    if (inner) return pow(base.args()[0], Expr(Rational(*inner * *n)));
  }
  auto node = make_node(Kind::Pow);
  node->size += base.node_count() + exponent.node_count();
  node->args = {base, exponent};
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr Expr::fn(Func f, const Expr& arg) {
  if (arg.is_zero()) {
    if (f == Func::Exp || f == Func::Cos) return Expr(1);
    if (f == Func::Sin || f == Func::Sqrt) return Expr();
  }
  if (arg.is_one()) {
    if (f == Func::Ln) return Expr();
    if (f == Func::Sqrt) return Expr(1);
  }
  auto node = make_node(Kind::Fn);
  node->func = f;
  node->size += arg.node_count();
  node->args = {arg};
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

int Expr::compare(const Expr& other) const {
  if (node_ == other.node_) return 0;
  if (kind() != other.kind()) return kind() < other.kind() ? -1 : 1;
  switch (kind()) {
    case Kind::Const: {
      int c = cmp(value(), other.value());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Sym: {
      auto c = symbol() <=> other.symbol();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case Kind::Fn:
      if (func() != other.func()) return func() < other.func() ? -1 : 1;
      [[fallthrough]];
    default: {
      const auto& a = args();
      const auto& b = other.args();
      if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
      for (std::size_t i = 0; i < a.size(); ++i) {
        int c = a[i].compare(b[i]);
        if (c != 0) return c;
      }
      return 0;
    }
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
  return Expr::add({a, Expr::mul({Expr(-1), b})});
}
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  return Expr::mul({a, Expr::pow(b, Expr(-1))});
}
Expr operator-(const Expr& a) { return Expr::mul({Expr(-1), a}); }
Expr pow(const Expr& base, const Expr& exponent) {
  return Expr::pow(base, exponent);
}
Expr exp(const Expr& a) { return Expr::fn(Func::Exp, a); }
Expr ln(const Expr& a) { return Expr::fn(Func::Ln, a); }
Expr sqrt(const Expr& a) { return Expr::fn(Func::Sqrt, a); }
Expr sin(const Expr& a) { return Expr::fn(Func::Sin, a); }
Expr cos(const Expr& a) { return Expr::fn(Func::Cos, a); }

// ---------------------------------------------------------------- printing

std::string rational_to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

constexpr int kPrecAdd = 1;
constexpr int kPrecMul = 2;
constexpr int kPrecPow = 3;
constexpr int kPrecAtom = 4;

int precedence(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      return (sgn(e.value()) < 0 || e.value().get_den() != 1) ? kPrecMul
                                                              : kPrecAtom;
    case Expr::Kind::Sym:
    case Expr::Kind::Fn:
      return kPrecAtom;
    case Expr::Kind::Add:
      return kPrecAdd;
    case Expr::Kind::Mul:
      return kPrecMul;
    case Expr::Kind::Pow:
      return kPrecPow;
  }
  return kPrecAtom;
}

void print(std::ostream& os, const Expr& e, int context);

void print_wrapped(std::ostream& os, const Expr& e, int min_prec) {
  if (precedence(e) < min_prec) {
    os << '(';
    print(os, e, 0);
    os << ')';
  } else {
    print(os, e, min_prec);
  }
}

bool is_negative_term(const Expr& e) {
  if (e.is_const()) return sgn(e.value()) < 0;
  if (e.kind() == Expr::Kind::Mul) {
    const auto& first = e.args().front();
    return first.is_const() && sgn(first.value()) < 0;
  }
  return false;
}

void print_mul(std::ostream& os, const Expr& e) {
  Rational coeff = 1;
  std::vector<Expr> num;
  std::vector<Expr> den;
  for (const auto& f : e.args()) {
    if (f.is_const()) {
      coeff *= f.value();
      continue;
    }
    if (f.kind() == Expr::Kind::Pow && f.args()[1].is_const() &&
        sgn(f.args()[1].value()) < 0) {
      den.push_back(Expr::pow(f.args()[0], Expr(-f.args()[1].value())));
      continue;
    }
    num.push_back(f);
  }
  bool first = true;
  if (sgn(coeff) < 0) {
    os << '-';
    coeff = -coeff;
  }
  Rational cnum(coeff.get_num());
  Rational cden(coeff.get_den());
  if (cnum != 1 || num.empty()) {
    os << cnum.get_num().get_str();
    first = false;
  }
  for (const auto& f : num) {
    if (!first) os << '*';
    print_wrapped(os, f, kPrecPow);
    first = false;
  }
  if (cden != 1) den.insert(den.begin(), Expr(cden));
  if (den.empty()) return;
  os << '/';
  if (den.size() == 1) {
    print_wrapped(os, den.front(), kPrecPow);
    return;
  }
  os << '(';
  for (std::size_t i = 0; i < den.size(); ++i) {
    if (i) os << '*';
    print_wrapped(os, den[i], kPrecPow);
  }
  os << ')';
}

void print(std::ostream& os, const Expr& e, int /*context*/) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      os << rational_to_string(e.value());
      return;
    case Expr::Kind::Sym:
      os << e.symbol().str();
      return;
    case Expr::Kind::Fn:
      os << func_name(e.func()) << '(';
      print(os, e.args()[0], 0);
      os << ')';
      return;
    case Expr::Kind::Add: {
      bool first = true;
      for (const auto& t : e.args()) {
        if (first) {
          print_wrapped(os, t, kPrecAdd);
        } else if (is_negative_term(t)) {
          os << " - ";
          print_wrapped(os, -t, kPrecMul);
        } else {
          os << " + ";
          print_wrapped(os, t, kPrecAdd);
        }
        first = false;
      }
      return;
    }
    case Expr::Kind::Mul:
      print_mul(os, e);
      return;
    case Expr::Kind::Pow:
      print_wrapped(os, e.args()[0], kPrecAtom);
      os << '^';
      print_wrapped(os, e.args()[1], kPrecAtom);
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) {
  print(os, e, 0);
  return os;
}

// ---------------------------------------------------------- tree utilities

namespace {

void collect_symbols(const Expr& e, std::set<Symbol>& out) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      return;
    case Expr::Kind::Sym:
      out.insert(e.symbol());
      return;
    default:
      for (const auto& c : e.args()) collect_symbols(c, out);
  }
}

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  switch (e.kind()) {
    case Expr::Kind::Add:
      return Expr::add(std::move(args));
    case Expr::Kind::Mul:
      return Expr::mul(std::move(args));
    case Expr::Kind::Pow:
      return Expr::pow(args[0], args[1]);
    case Expr::Kind::Fn:
      return Expr::fn(e.func(), args[0]);
    default:
      return e;
  }
}

Expr map_symbols(const Expr& e,
                 const std::function<std::optional<Expr>(const Symbol&)>& fn) {
  if (e.is_const()) return e;
  if (e.kind() == Expr::Kind::Sym) {
    auto r = fn(e.symbol());
    return r ? *r : e;
  }
  std::vector<Expr> args;
  args.reserve(e.args().size());
  bool changed = false;
  for (const auto& c : e.args()) {
    args.push_back(map_symbols(c, fn));
    if (!args.back().same(c)) changed = true;
  }
  return changed ? rebuild(e, std::move(args)) : e;
}

}  // namespace

std::set<Symbol> free_symbols(const Expr& e) {
  std::set<Symbol> out;
  collect_symbols(e, out);
  return out;
}

bool depends_on(const Expr& e, const Symbol& v) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      return false;
    case Expr::Kind::Sym:
      return e.symbol() == v;
    default:
      for (const auto& c : e.args()) {
        if (depends_on(c, v)) return true;
      }
      return false;
  }
}

std::optional<std::pair<int, int>> shift_range(const Expr& e) {
  std::optional<std::pair<int, int>> range;
  for (const auto& s : free_symbols(e)) {
    if (!s.is_lattice()) continue;
    if (!range) {
      range = {s.shift(), s.shift()};
    } else {
      range->first = std::min(range->first, s.shift());
      range->second = std::max(range->second, s.shift());
    }
  }
  return range;
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  return map_symbols(e, [&](const Symbol& s) -> std::optional<Expr> {
    auto it = bindings.find(s);
    if (it == bindings.end()) return std::nullopt;
    return it->second;
  });
}

Expr shift(const Expr& e, int k) {
  if (k == 0) return e;
  return map_symbols(e, [&](const Symbol& s) -> std::optional<Expr> {
    if (!s.is_lattice()) return std::nullopt;
    return Expr(s.shifted(k));
  });
}

Expr diff(const Expr& e, const Symbol& v) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      return Expr();
    case Expr::Kind::Sym:
      return e.symbol() == v ? Expr(1) : Expr();
    case Expr::Kind::Add: {
      std::vector<Expr> terms;
      for (const auto& t : e.args()) terms.push_back(diff(t, v));
      return Expr::add(std::move(terms));
    }
    case Expr::Kind::Mul: {
      std::vector<Expr> terms;
      const auto& fs = e.args();
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr d = diff(fs[i], v);
        if (d.is_zero()) continue;
        std::vector<Expr> prod;
        for (std::size_t j = 0; j < fs.size(); ++j) {
          prod.push_back(j == i ? d : fs[j]);
        }
        terms.push_back(Expr::mul(std::move(prod)));
      }
      return Expr::add(std::move(terms));
    }
    case Expr::Kind::Pow: {
      const Expr& b = e.args()[0];
      const Expr& p = e.args()[1];
      Expr db = diff(b, v);
      if (!depends_on(p, v)) {
        if (db.is_zero()) return Expr();
        return Expr::mul({p, Expr::pow(b, p - Expr(1)), db});
      }
      Expr dp = diff(p, v);
      return e * (dp * ln(b) + p * db / b);
    }
    case Expr::Kind::Fn: {
      const Expr& a = e.args()[0];
      Expr da = diff(a, v);
      if (da.is_zero()) return Expr();
      switch (e.func()) {
        case Func::Exp:
          return e * da;
        case Func::Ln:
          return da / a;
        case Func::Sqrt:
          return da / (Expr(2) * e);
        case Func::Sin:
          return cos(a) * da;
        case Func::Cos:
          return -(sin(a) * da);
      }
    }
  }
  return Expr();
}

// -------------------------------------------------------------- evaluation

namespace {

template <class C>
C complex_ipow(C b, long n) {
  C result = 1.0;
  unsigned long k = n < 0 ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
  while (k) {
    if (k & 1u) result *= b;
    b *= b;
    k >>= 1u;
  }
  if (n < 0) {
    if (result == C(0.0)) throw ZeroDenominator("division by zero in evaluation");
    result = C(1.0) / result;
  }
  return result;
}

template <class C>
bool finite(C z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <class C>
C eval_rec(const Expr& e, const std::map<Symbol, C>& env) {
  using R = typename C::value_type;
  switch (e.kind()) {
    case Expr::Kind::Const:
      return C(static_cast<R>(e.value().get_num().get_d()) / static_cast<R>(e.value().get_den().get_d()));
    case Expr::Kind::Sym: {
      auto it = env.find(e.symbol());
      if (it == env.end()) throw MissingBinding("no value bound for " + e.symbol().str());
      return it->second;
    }
    case Expr::Kind::Add: {
      C s = 0.0;
      for (const auto& t : e.args()) s += eval_rec(t, env);
      return s;
    }
    case Expr::Kind::Mul: {
      C p = 1.0;
      for (const auto& f : e.args()) p *= eval_rec(f, env);
      return p;
    }
    case Expr::Kind::Pow: {
      C b = eval_rec(e.args()[0], env);
      auto n = e.args()[1].as_integer();
      if (n && std::labs(*n) <= 1024) return complex_ipow(b, *n);
      C p = eval_rec(e.args()[1], env);
      if (b == C(0.0)) {
        if (p.real() > 0) return 0.0;
        throw ZeroDenominator("zero raised to a non-positive power");
      }
      return std::pow(b, p);
    }
    case Expr::Kind::Fn: {
      C a = eval_rec(e.args()[0], env);
      switch (e.func()) {
        case Func::Exp:
          return std::exp(a);
        case Func::Ln:
          if (a == C(0.0)) throw NumericError("logarithm of zero");
          return std::log(a);
        case Func::Sqrt:
          return std::sqrt(a);
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
      }
    }
  }
  return 0.0;
}

std::optional<Rational> exact_rec(const Expr& e, const ExactEnv& env) {
  switch (e.kind()) {
    case Expr::Kind::Const:
      return e.value();
    case Expr::Kind::Sym: {
      auto it = env.find(e.symbol());
      if (it == env.end()) throw MissingBinding("no value bound for " + e.symbol().str());
      return it->second;
    }
    case Expr::Kind::Add: {
      Rational s = 0;
      for (const auto& t : e.args()) {
        auto v = exact_rec(t, env);
        if (!v) return std::nullopt;
        s += *v;
      }
      return s;
    }
    case Expr::Kind::Mul: {
      Rational p = 1;
      for (const auto& f : e.args()) {
        auto v = exact_rec(f, env);
        if (!v) return std::nullopt;
        p *= *v;
      }
      return p;
    }
    case Expr::Kind::Pow: {
      auto p = exact_rec(e.args()[1], env);
      if (!p || p->get_den() != 1 || !p->get_num().fits_slong_p()) return std::nullopt;
      long n = p->get_num().get_si();
      if (std::labs(n) > 4096) return std::nullopt;
      auto b = exact_rec(e.args()[0], env);
      if (!b) return std::nullopt;
      if (sgn(*b) == 0 && n < 0) throw ZeroDenominator("division by zero in exact evaluation");
      return rational_ipow(*b, n);
    }
    case Expr::Kind::Fn:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

Complex eval_numeric(const Expr& e, const NumericEnv& env) {
  Complex v = eval_rec<Complex>(e, env);
  if (!finite(v)) throw NumericError("non-finite value in evaluation of " + to_string(e).substr(0, 80));
  return v;
}

ComplexL eval_numeric_l(const Expr& e, const NumericEnvL& env) {
  ComplexL v = eval_rec<ComplexL>(e, env);
  if (!finite(v)) throw NumericError("non-finite value in evaluation of " + to_string(e).substr(0, 80));
  return v;
}

std::optional<Rational> eval_exact(const Expr& e, const ExactEnv& env) {
  return exact_rec(e, env);
}

}  // namespace deltasym
