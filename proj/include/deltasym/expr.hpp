#pragma once

#include <gmpxx.h>

#include <complex>
#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deltasym {

using Rational = mpq_class;
using Complex = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class MissingBinding : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

enum class SymbolKind { Param, X, U, T, Ut, Utt, Ux, Uxt };

// A variable of the prolonged space or a named parameter. x[k] and u[k]
// carry a lattice shift; t and the derivative symbols never do.
class Symbol {
 public:
  static Symbol x(int shift) { return Symbol(SymbolKind::X, shift, {}); }
  static Symbol u(int shift) { return Symbol(SymbolKind::U, shift, {}); }
  static Symbol t() { return Symbol(SymbolKind::T, 0, {}); }
  static Symbol ut() { return Symbol(SymbolKind::Ut, 0, {}); }
  static Symbol utt() { return Symbol(SymbolKind::Utt, 0, {}); }
  static Symbol ux() { return Symbol(SymbolKind::Ux, 0, {}); }
  static Symbol uxt() { return Symbol(SymbolKind::Uxt, 0, {}); }
  static Symbol param(std::string name) {
    return Symbol(SymbolKind::Param, 0, std::move(name));
  }

  SymbolKind kind() const { return kind_; }
  int shift() const { return shift_; }
  const std::string& name() const { return name_; }

  bool is_param() const { return kind_ == SymbolKind::Param; }
  bool is_lattice() const {
    return kind_ == SymbolKind::X || kind_ == SymbolKind::U;
  }
  bool is_derivative() const {
    return kind_ == SymbolKind::Ut || kind_ == SymbolKind::Utt ||
           kind_ == SymbolKind::Ux || kind_ == SymbolKind::Uxt;
  }
  Symbol shifted(int k) const {
    return is_lattice() ? Symbol(kind_, shift_ + k, name_) : *this;
  }

  std::string str() const;

  auto operator<=>(const Symbol&) const = default;

 private:
  Symbol(SymbolKind kind, int shift, std::string name)
      : kind_(kind), shift_(shift), name_(std::move(name)) {}

  SymbolKind kind_;
  int shift_;
  std::string name_;
};

enum class Func { Exp, Ln, Sqrt, Sin, Cos };

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);

// Immutable expression tree. Copies share nodes; no node is ever mutated
// after construction, so values can be passed across threads freely.
class Expr {
 public:
  enum class Kind { Const, Sym, Add, Mul, Pow, Fn };

  Expr();
  Expr(int value);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& value);  // NOLINT(google-explicit-constructor)
  Expr(const Symbol& symbol);  // NOLINT(google-explicit-constructor)

  // Builders apply only light local simplification (flattening, constant
  // folding, identities with 0 and 1); canonical forms come from normalize().
  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(const Expr& base, const Expr& exponent);
  static Expr fn(Func f, const Expr& arg);

  Kind kind() const;
  const Rational& value() const;
  const Symbol& symbol() const;
  Func func() const;
  const std::vector<Expr>& args() const;

  bool is_const() const { return kind() == Kind::Const; }
  bool is_zero() const;
  bool is_one() const;
  std::optional<long> as_integer() const;

  // Structural comparison (total order, equality means identical trees).
  int compare(const Expr& other) const;
  bool same(const Expr& other) const { return compare(other) == 0; }

  std::size_t node_count() const;
  // Identity of the shared node; equal ids imply identical trees.
  const void* id() const { return node_.get(); }

  // Implementation detail, defined in expr.cpp.
  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr sqrt(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);

inline Expr x(int k) { return Expr(Symbol::x(k)); }
inline Expr u(int k) { return Expr(Symbol::u(k)); }
inline Expr param(std::string name) { return Expr(Symbol::param(std::move(name))); }
inline Expr rat(long p, long q = 1) { return Expr(Rational(p, q)); }

// Prints in the input grammar; parse(to_string(e)) reproduces e up to
// normalization.
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);
std::string rational_to_string(const Rational& q);

Expr parse(std::string_view text);

Expr diff(const Expr& e, const Symbol& v);
using Bindings = std::map<Symbol, Expr>;
// Simultaneous replacement: replacement values are not themselves rewritten.
Expr substitute(const Expr& e, const Bindings& bindings);
Expr shift(const Expr& e, int k);

std::set<Symbol> free_symbols(const Expr& e);
bool depends_on(const Expr& e, const Symbol& v);
// Smallest and largest lattice shift present, if any lattice symbol occurs.
std::optional<std::pair<int, int>> shift_range(const Expr& e);

using NumericEnv = std::map<Symbol, Complex>;
Complex eval_numeric(const Expr& e, const NumericEnv& env);
// Extended-precision variant used by the lattice integrator.
using ComplexL = std::complex<long double>;
using NumericEnvL = std::map<Symbol, ComplexL>;
ComplexL eval_numeric_l(const Expr& e, const NumericEnvL& env);

using ExactEnv = std::map<Symbol, Rational>;
// nullopt when the value is not a rational function of the bindings
// (function nodes, non-integer powers). Throws ZeroDenominator.
std::optional<Rational> eval_exact(const Expr& e, const ExactEnv& env);

}  // namespace deltasym
