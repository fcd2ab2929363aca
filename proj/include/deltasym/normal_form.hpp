#pragma once

// Canonical rational-function form over Q. Atoms are symbols, function
// applications (arguments normalized recursively) and powers of non-atomic
// bases with non-integer exponent. exp(a) factors are merged by adding
// arguments; a sum base raised to p/q keeps only the fractional part of the
// exponent, so sqrt(a)^2 reduces to a. Denominators are kept as a list of
// canonical (content-free, monic) polynomial factors.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "deltasym/expr.hpp"

namespace deltasym {

class NormalizationBudget : public Error {
 public:
  using Error::Error;
};

namespace nf {

// Caps the size of intermediate polynomials on this thread while in scope;
// exceeding it throws NormalizationBudget so callers can fall back to
// numeric testing.
class TermBudget {
 public:
  explicit TermBudget(std::size_t max_terms);
  ~TermBudget();
  TermBudget(const TermBudget&) = delete;
  TermBudget& operator=(const TermBudget&) = delete;

 private:
  std::size_t saved_;
};

class RatFun;
using RatFunPtr = std::shared_ptr<const RatFun>;

struct Exponent {
  Rational q;     // rational part
  RatFunPtr sym;  // symbolic part without constant term, or null
  bool is_rational() const { return !sym; }
  bool is_zero() const { return !sym && sgn(q) == 0; }
};

enum class AtomKind { Sym, Fn, PowBase };

struct AtomData {
  AtomKind kind;
  std::optional<Symbol> sym;
  Func func = Func::Ln;
  RatFunPtr arg;  // Fn argument or PowBase base
};
using Atom = std::shared_ptr<const AtomData>;

struct Monomial {
  std::vector<std::pair<Atom, Exponent>> factors;  // sorted by atom
  RatFunPtr exp_arg;                               // exp(...) factor or null
};

int compare(const Monomial& a, const Monomial& b);
struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

using Poly = std::map<Monomial, Rational, MonomialLess>;
using DenFactors = std::vector<std::pair<Poly, int>>;

class RatFun {
 public:
  RatFun() = default;
  explicit RatFun(const Rational& q);
  explicit RatFun(const Symbol& s);
  RatFun(Poly num, DenFactors den) : num_(std::move(num)), den_(std::move(den)) {}

  const Poly& num() const { return num_; }
  const DenFactors& den() const { return den_; }

  bool is_zero() const { return num_.empty(); }
  std::optional<Rational> as_rational() const;

 private:
  Poly num_;
  DenFactors den_;
};

int compare(const RatFun& a, const RatFun& b);
inline bool operator==(const RatFun& a, const RatFun& b) { return compare(a, b) == 0; }

RatFun add(const RatFun& a, const RatFun& b);
RatFun sub(const RatFun& a, const RatFun& b);
RatFun mul(const RatFun& a, const RatFun& b);
RatFun div(const RatFun& a, const RatFun& b);
RatFun neg(const RatFun& a);
RatFun inv(const RatFun& a);
RatFun pow_int(const RatFun& base, long n);
RatFun pow(const RatFun& base, const RatFun& exponent);
RatFun apply_fn(Func f, const RatFun& arg);

RatFun to_ratfun(const Expr& e);
Expr to_expr(const RatFun& r);

// True when the form contains function atoms, exp factors, or non-integer
// powers, i.e. when a nonzero result may still be an identity.
bool has_opaque_atoms(const RatFun& r);
bool depends_on(const RatFun& r, const Symbol& v);
// Degree of r as a polynomial in v, nullopt if r is not polynomial in v.
std::optional<int> degree_in(const RatFun& r, const Symbol& v);
RatFun coefficient_of(const RatFun& r, const Symbol& v, int k);

struct BasisKey {
  Monomial mono;
  DenFactors den;
};
int compare(const BasisKey& a, const BasisKey& b);
Expr to_expr(const BasisKey& k);

// Splits r into sum_k coeff_k * basis_k where every basis element collects
// the atoms that depend on a basis symbol and coefficients are free of them.
std::vector<std::pair<BasisKey, RatFun>> decompose(
    const RatFun& r, const std::function<bool(const Symbol&)>& is_basis_symbol);

}  // namespace nf

Expr normalize(const Expr& e);
// Exact test: true iff e normalizes to literal zero.
bool normalizes_to_zero(const Expr& e);

}  // namespace deltasym
