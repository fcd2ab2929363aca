#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deltasym/expr.hpp"
#include "deltasym/rng.hpp"

namespace deltasym {

class SchemeError : public Error {
 public:
  using Error::Error;
};

enum class SchemeKind { Difference, DifferentialDifference };

// Sampling domain of a symbolic parameter.
struct ParamSpec {
  std::string name;
  double lo = 0.5;
  double hi = 2.0;
  std::vector<double> exclude;
};

struct Substitution {
  Symbol target;
  Expr value;
};

// Ordered substitutions; the value of step i may mention only the targets of
// later steps, so applying the steps in order eliminates every target.
struct EliminationPlan {
  std::vector<Substitution> steps;

  Expr apply(const Expr& e) const;
  bool eliminates(const Symbol& s) const;
};

// An equation imposed on shell: E, Omega, or a shifted copy of Omega.
struct Relation {
  std::string label;
  Expr expr;
};

class Scheme {
 public:
  // Derives the elimination plan when none is given; validates it by
  // back-substitution either way. Throws SchemeError.
  Scheme(std::string name, SchemeKind kind, Expr E, Expr omega, std::vector<ParamSpec> params = {},
         std::optional<EliminationPlan> plan = std::nullopt, bool fixed_lattice = false);

  const std::string& name() const { return name_; }
  SchemeKind kind() const { return kind_; }
  bool is_ddelta() const { return kind_ == SchemeKind::DifferentialDifference; }
  const Expr& E() const { return E_; }
  const Expr& omega() const { return omega_; }
  const std::vector<ParamSpec>& params() const { return params_; }
  const ParamSpec* param(const std::string& name) const;
  const EliminationPlan& plan() const { return plan_; }
  const std::vector<Relation>& relations() const { return relations_; }
  bool fixed_lattice() const { return fixed_lattice_; }
  const std::string& description() const { return description_; }
  void set_description(std::string d) { description_ = std::move(d); }

  // Stencil [lo, hi] = [-M, N].
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int M() const { return -lo_; }
  int N() const { return hi_; }

  // Coordinates of the prolonged space: x[k], u[k] over the stencil plus
  // t and the derivative symbols for differential-difference schemes.
  std::vector<Symbol> coordinates() const;

 private:
  void derive_plan();
  void validate_plan() const;

  std::string name_;
  SchemeKind kind_;
  Expr E_;
  Expr omega_;
  std::vector<ParamSpec> params_;
  EliminationPlan plan_;
  std::vector<Relation> relations_;
  bool fixed_lattice_;
  std::string description_;
  int lo_ = 0;
  int hi_ = 0;
};

Scheme parse_scheme(std::string_view text, const std::string& origin = "<input>");
Scheme load_scheme(const std::string& path);
std::string read_text_file(const std::string& path);

struct SolvabilityReport {
  int trials = 0;
  double min_forward = 0;  // smallest |det| seen at the leading pair
  double min_backward = 0;  // smallest |det| seen at the trailing pair
  bool forward_ok = false;
  bool backward_ok = false;
  bool pass() const { return forward_ok && backward_ok; }
};

// Jacobian determinants of (E, Omega) with respect to (x[N], u[N]) and
// (x[-M], u[-M]) at random points; one equation is shifted when needed so
// that both reach the same extreme node.
SolvabilityReport check_solvability(const Scheme& s, int trials, Rng& rng);

enum class DiscreteDerivative {
  Ux,           // (u+ - u)/(x+ - x)
  UxBackward,   // (u - u-)/(x - x-)
  UxForward,    // (u++ - u+)/(x++ - x+)
  UxxCentered,  // 2(u_x - u_x-)/(x+ - x-)
  UxxForward,   // 2(u_x+ - u_x)/(x++ - x)
  Uxxx,         // 3(u_xx+ - u_xx)/(x++ - x-)
};

Expr discrete_derivative(DiscreteDerivative kind);
std::optional<DiscreteDerivative> discrete_derivative_from_name(std::string_view name);

// e with the elimination plan applied, normalized.
Expr on_shell(const Scheme& s, const Expr& e);

// Draws points of the on-shell space: free coordinates and parameters are
// sampled, eliminated symbols are computed from the plan. Points where any
// denominator of the involved expressions is smaller than 1e-6 in modulus
// are rejected (at most 100 attempts).
class OnShellSampler {
 public:
  explicit OnShellSampler(const Scheme& s, const std::vector<Expr>& extra = {});

  NumericEnv sample(Rng& rng) const;
  // Rational sample; nullopt when the plan cannot be evaluated exactly.
  std::optional<ExactEnv> sample_exact(Rng& rng) const;

  const std::vector<Symbol>& free_symbols() const { return free_; }

 private:
  const Scheme* scheme_;
  std::vector<Symbol> free_;
  std::vector<Expr> denominators_;
};

// Bases of negative or fractional powers and logarithm arguments occurring in e.
std::vector<Expr> singular_subexpressions(const Expr& e);

// Sum of the moduli of the top-level terms of e, the natural scale against
// which a cancelling sum is compared.
double term_scale(const Expr& e, const NumericEnv& env);

}  // namespace deltasym
