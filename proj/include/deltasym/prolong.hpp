#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deltasym/expr.hpp"
#include "deltasym/rng.hpp"
#include "deltasym/scheme.hpp"

namespace deltasym {

class FieldError : public Error {
 public:
  using Error::Error;
};

class SamplingDegenerate : public Error {
 public:
  using Error::Error;
};

class AnsatzTooSmall : public Error {
 public:
  using Error::Error;
};

enum class Slot { Xi, Tau, Phi };

// X = xi(x,t,u) d_x + tau(t) d_t + phi(x,t,u) d_u with x = x[0], u = u[0].
struct VectorField {
  std::string name;
  Expr xi;
  Expr tau;
  Expr phi;

  // Validates the argument restrictions; throws FieldError.
  static VectorField make(std::string name, Expr xi, Expr tau, Expr phi);

  const Expr& slot(Slot s) const;
  bool is_zero() const;  // exact
};

VectorField linear_combination(const std::string& name, const std::vector<std::pair<Expr, const VectorField*>>& terms);
VectorField normalized(const VectorField& f);

// "Name: xi=...; tau=...; phi=..."; zero components are omitted.
std::string to_string(const VectorField& f);
std::vector<VectorField> parse_fields(std::string_view text, const std::string& origin = "<input>");
std::vector<VectorField> load_fields(const std::string& path);

struct AnsatzTerm {
  Slot slot;
  Expr fn;
};
std::vector<AnsatzTerm> parse_ansatz(std::string_view text, const std::string& origin = "<input>");
std::vector<AnsatzTerm> load_ansatz(const std::string& path);

// Coefficients of the prolonged field on the stencil [lo, hi]: xi(x[k],t,u[k])
// at x[k], phi(x[k],t,u[k]) at u[k], tau at t, phi^t at ut, phi^tt at utt.
struct ProlongedField {
  VectorField base;
  int lo = 0;
  int hi = 0;
  int order_t = 0;
  std::map<Symbol, Expr> coeff;
};

ProlongedField prolong(const VectorField& f, int M, int N, int order_t);
// Total t-derivative on functions of (x, t, u, ut, ux), u = u(x, t).
Expr total_dt(const Expr& f);
Expr apply_raw(const ProlongedField& p, const Expr& e);
Expr apply(const ProlongedField& p, const Expr& e);  // normalized

// pr X E and pr X Omega before on-shell substitution, with the partial
// derivatives of E and Omega computed once per scheme.
class DeterminingSystem {
 public:
  explicit DeterminingSystem(const Scheme& s);

  const Scheme& scheme() const { return *scheme_; }
  int order_t() const { return order_t_; }
  std::vector<std::string> labels() const;
  std::vector<Expr> raw(const VectorField& f) const;
  // Checks the field against the kind of scheme; throws FieldError.
  void check_field(const VectorField& f) const;

 private:
  struct Part {
    std::string label;
    std::vector<std::pair<Symbol, Expr>> partials;
  };
  const Scheme* scheme_;
  int order_t_;
  std::vector<Part> parts_;
};

struct ResidualComponent {
  std::string label;
  Expr value;
};

// On-shell residuals of pr X E and pr X Omega. For differential-difference
// schemes pr X E is split into the coefficients of the monomials in the
// free derivative symbols (ut, ux, uxt), each of which must vanish.
// Throws NormalizationBudget when the exact form is too large.
std::vector<ResidualComponent> onshell_residual(const VectorField& f, const Scheme& s);

struct Witness {
  std::string component;
  NumericEnv point;
  Complex residual;
  double scale = 0;
};

struct VerifyResult {
  bool holds = false;
  bool exact = false;  // decided by exact normalization
  std::optional<Witness> witness;
};

constexpr int kVerifySamples = 50;

VerifyResult verify_symmetry(const VectorField& f, const DeterminingSystem& ds, Rng& rng, double tol = 1e-9);
VerifyResult verify_symmetry(const VectorField& f, const Scheme& s, Rng& rng, double tol = 1e-9);

struct FindResult {
  std::vector<VectorField> basis;
  std::vector<VectorField> rejected;  // nullspace vectors failing re-verification
  int coefficients = 0;
  int rank = 0;
  bool exact = false;  // rational linear algebra was used
};

// Throws AnsatzTooSmall, SamplingDegenerate.
FindResult find_symmetries(const Scheme& s, const std::vector<AnsatzTerm>& ansatz, Rng& rng, double tol = 1e-9);

enum class Invariance { Identical, OnManifold, Fails };

struct InvarianceReport {
  std::string field;
  Invariance kind = Invariance::Fails;
  std::optional<Expr> lambda;  // pr X q = lambda * manifold
};

std::vector<InvarianceReport> check_invariant_on_manifold(const std::vector<VectorField>& fields, const Expr& q,
                                                          const std::optional<Expr>& manifold, Rng& rng,
                                                          double tol = 1e-9);

std::string_view invariance_name(Invariance k);

}  // namespace deltasym
