#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deltasym/expr.hpp"
#include "deltasym/scheme.hpp"

namespace deltasym {

class DomainError : public Error {
 public:
  using Error::Error;
};

class PoleOnRange : public Error {
 public:
  using Error::Error;
};

struct LatticePoint {
  long n = 0;
  long double x = 0;
  ComplexL u = 0;
};

struct LatticeTrajectory {
  std::string scheme;
  std::string init;  // description of the seed data
  std::string method;  // "exact", "closed-form", "newton" or the generator kind
  std::vector<LatticePoint> points;  // sorted by n
  // Rational values per point when the exact path was taken.
  std::optional<std::vector<std::pair<Rational, Rational>>> exact;
  long double max_E = 0;
  long double max_omega = 0;
  bool diverged = false;
  bool monotone = true;  // x strictly monotone in n
};

// Integration failure after `step` successful steps; `partial` holds the
// points computed so far, flagged diverged.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, int step, LatticeTrajectory partial)
      : Error(what), step(step), partial(std::make_shared<LatticeTrajectory>(std::move(partial))) {}
  int step;
  std::shared_ptr<LatticeTrajectory> partial;
};

class NewtonDiverged : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class SingularJacobian : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

constexpr int kNewtonMaxIterations = 50;
constexpr long double kNewtonTol = 1e-12L;
constexpr int kNewtonMaxHalvings = 6;
constexpr long double kSingularDet = 1e-12L;
constexpr long double kResidualLimit = 1e-9L;

enum class StepMethod { Auto, Newton };

struct Seed {
  Expr x;
  Expr u;
};

struct IntegrateOptions {
  StepMethod method = StepMethod::Auto;
  std::map<std::string, Expr> params;  // values of the scheme parameters
  long n0 = 0;                         // lattice index of the first seed
};

// Seeds are hi - lo consecutive points starting at n0. Each step solves
// (E, Omega) for the leading node: closed form when the relations (or the
// supplied elimination plan) give it explicitly, exactly in rationals when
// seeds and formulas allow, otherwise damped Newton in extended precision.
LatticeTrajectory integrate(const Scheme& s, const std::vector<Seed>& init, int steps, int direction = 1,
                            const IntegrateOptions& opt = {});

// Seeds for the integrator from a closed-form solution u(x) on given lattice x values.
std::vector<Seed> seeds_from(const std::vector<Expr>& xs, const Expr& solution);

enum class LatticeKind { Uniform, Quadratic, Moebius, Log };

std::optional<LatticeKind> lattice_kind_from_name(std::string_view name);
std::string_view lattice_kind_name(LatticeKind k);
std::size_t lattice_param_count(LatticeKind k);

// uniform (h, x0): x = h n + x0; quadratic (L2, L1, L0): x = L2 n^2 + L1 n + L0;
// moebius (alpha, beta, gamma, delta): x = (alpha n + beta)/(gamma n + delta);
// log (c3, c4): x = -ln(c3 n + c4)/2. Throws PoleOnRange, DomainError.
LatticeTrajectory lattice_generator(LatticeKind kind, const std::vector<long double>& params, long n_lo, long n_hi);

// (x++ - x)(x+ - x-) / ((x - x-)(x++ - x+)); throws ZeroDenominator.
long double anharmonic_ratio(long double xm, long double x, long double xp, long double xpp);
// Ratios at all interior nodes of consecutive points.
std::vector<long double> anharmonic_ratios(const LatticeTrajectory& traj);

// K_+ or K_- = ((2 + h^2 +- h sqrt(4 + h^2))/2)^(1/h).
Expr k_pm(const Expr& h, int sign);

// u_n on the logarithmic lattice from c1 z^(-1/2) + c2 z^(1/2), z = c3 n + c4,
// and from the composition u = f / sqrt(z) with f = A n + B.
struct LogLatticeValue {
  long double direct;
  long double composed;
  long double exponential;  // c1 e^x + c2 e^-x with x = -ln(z)/2
};
LogLatticeValue log_lattice_solution(long double c1, long double c2, long double c3, long double c4, long n);

// Reduced equations of the three subgroup reductions.
struct ReductionCase {
  std::string name;
  std::string reduction;           // u(x, t) in terms of G and eta
  std::string reduced_difference;  // reduced differential-difference equation
  std::string reduced_ode;         // reduced PDE
  Expr candidate;                  // candidate solution G(eta) or G(x)
};
std::vector<ReductionCase> reduction_cases();

// Translation case: v^2 G'' [G(eta+h) - 2G(eta) + G(eta-h)]^3 - h^6 for
// G = sign eta^2/(2 sqrt(v)) + A eta + B, normalized.
Expr translation_candidate(int sign);
Expr reduction_exactness(const Expr& G);

struct OrderReport {
  std::vector<double> h;
  std::vector<double> r;
  double slope = 0;
};
// Relative residual |G(s+h) - 2G(s) + G(s-h) - h^2 G''(s)| / (h^2 |G''(s)|) at
// s = x - x0 = 1 for G a function of the parameter s; least-squares slope of
// log r against log h. Throws DomainError when G'' vanishes or r underflows.
OrderReport reduction_order(const Expr& G, const std::vector<double>& h_list = {0.1, 0.05, 0.025, 0.0125});
Expr dilation_candidate();  // 4 (-3)^(-3/4) s^(3/2)

struct EtaReport {
  long double max_residual = 0;
  bool pass = false;
};
// eta_n = (a n + b)^3 against eta_+^(1/3) - 2 eta^(1/3) + eta_-^(1/3) = 0.
EtaReport eta_lattice_check(long double a, long double b, long n_lo, long n_hi);
long double eta_residual(long double eta_m, long double eta, long double eta_p);

std::string trajectory_csv(const LatticeTrajectory& traj);
std::string trajectory_svg(const LatticeTrajectory& traj);
void write_file(const std::string& path, const std::string& content);

}  // namespace deltasym
