#include "deltasym/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "deltasym/normal_form.hpp"

namespace deltasym {

namespace {

using LD = long double;

struct Solved {
  Expr x;
  Expr u;
};

// Solution of r = 0 for v when the numerator of r is linear in v.
std::optional<Expr> solve_linear(const Expr& r, const Symbol& v) {
  nf::RatFun f = nf::to_ratfun(r);
  nf::RatFun num(f.num(), {});
  auto deg = nf::degree_in(num, v);
  if (!deg || *deg != 1) return std::nullopt;
  nf::RatFun c1 = nf::coefficient_of(num, v, 1);
  nf::RatFun c0 = nf::coefficient_of(num, v, 0);
  if (nf::depends_on(c1, v) || nf::depends_on(c0, v)) return std::nullopt;
  return normalize(nf::to_expr(nf::neg(nf::div(c0, c1))));
}

bool only_symbols(const Expr& e, const std::set<Symbol>& allowed) {
  for (const Symbol& s : free_symbols(e)) {
    if (!allowed.count(s)) return false;
  }
  return true;
}

class Stepper {
 public:
  Stepper(const Scheme& s, int direction, const IntegrateOptions& opt) : direction_(direction) {
    Bindings bind;
    for (const auto& [name, value] : opt.params) bind[Symbol::param(name)] = value;
    for (const ParamSpec& p : s.params()) {
      if (!bind.count(Symbol::param(p.name))) throw SchemeError("parameter " + p.name + " needs a value for integration");
    }
    lo_ = s.lo();
    hi_ = s.hi();
    node_ = direction > 0 ? hi_ : lo_;
    tx_ = Symbol::x(node_);
    tu_ = Symbol::u(node_);
    for (int k = lo_; k <= hi_; ++k) {
      if (k == node_) continue;
      known_.insert(Symbol::x(k));
      known_.insert(Symbol::u(k));
    }
    for (const Relation& r : s.relations()) {
      Expr e = substitute(r.expr, bind);
      if (depends_on(e, tx_) || depends_on(e, tu_)) rel_.push_back({r.label, e});
    }
    if (rel_.size() != 2) {
      throw SchemeError("scheme " + s.name() + ": expected two relations at the leading node, found " +
                        std::to_string(rel_.size()));
    }
    for (const auto& r : rel_) {
      jac_.push_back({diff(r.expr, tx_), diff(r.expr, tu_)});
    }
    if (opt.method == StepMethod::Auto) {
      if (direction > 0) closed_ = from_plan(s, bind);
      if (!closed_) closed_ = from_relations();
    }
  }

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int node() const { return node_; }
  bool closed_form() const { return closed_.has_value(); }
  const std::vector<Relation>& relations() const { return rel_; }

  std::optional<std::pair<Rational, Rational>> exact_step(const ExactEnv& env) const {
    if (!closed_) return std::nullopt;
    try {
      auto x = eval_exact(closed_->x, env);
      if (!x) return std::nullopt;
      ExactEnv e2 = env;
      e2[tx_] = *x;
      auto u = eval_exact(closed_->u, e2);
      if (!u) return std::nullopt;
      return std::make_pair(*x, *u);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  std::pair<ComplexL, ComplexL> closed_step(const NumericEnvL& env) const {
    ComplexL x = eval_numeric_l(closed_->x, env);
    NumericEnvL e2 = env;
    e2[tx_] = x;
    return {x, eval_numeric_l(closed_->u, e2)};
  }

  // Damped Newton from the guess (x, u); returns false on divergence.
  bool newton(NumericEnvL& env, ComplexL& x, ComplexL& u, std::string& why) const {
    auto residual = [&](ComplexL xv, ComplexL uv, ComplexL F[2]) {
      env[tx_] = xv;
      env[tu_] = uv;
      for (int i = 0; i < 2; ++i) F[i] = eval_numeric_l(rel_[i].expr, env);
      return std::max(std::abs(F[0]), std::abs(F[1]));
    };
    ComplexL F[2];
    LD norm;
    try {
      norm = residual(x, u, F);
    } catch (const Error& e) {
      why = std::string("initial guess not evaluable: ") + e.what();
      return false;
    }
    for (int it = 0; it < kNewtonMaxIterations; ++it) {
      if (norm == 0) return true;
      ComplexL a = eval_numeric_l(jac_[0][0], env), b = eval_numeric_l(jac_[0][1], env);
      ComplexL c = eval_numeric_l(jac_[1][0], env), d = eval_numeric_l(jac_[1][1], env);
      ComplexL det = a * d - b * c;
      if (std::abs(det) < kSingularDet) {
        why = "singular Jacobian";
        return false;
      }
      ComplexL dx = -(d * F[0] - b * F[1]) / det;
      ComplexL du = -(-c * F[0] + a * F[1]) / det;
      LD lambda = 1;
      ComplexL G[2];
      LD trial = 0;
      int halvings = 0;
      for (;; ++halvings) {
        try {
          trial = residual(x + lambda * dx, u + lambda * du, G);
        } catch (const Error&) {
          trial = INFINITY;
        }
        if (trial <= norm || halvings == kNewtonMaxHalvings) break;
        lambda /= 2;
      }
      if (!(trial <= norm)) {
        why = "residual increased after " + std::to_string(kNewtonMaxHalvings) + " halvings";
        return false;
      }
      x += lambda * dx;
      u += lambda * du;
      F[0] = G[0];
      F[1] = G[1];
      norm = trial;
      LD step = std::max(std::abs(lambda * dx), std::abs(lambda * du));
      if (step <= kNewtonTol * (1 + std::max(std::abs(x), std::abs(u)))) {
        env[tx_] = x;
        env[tu_] = u;
        return true;
      }
    }
    why = "no convergence in " + std::to_string(kNewtonMaxIterations) + " iterations";
    return false;
  }

  LD jacobian_det(const NumericEnvL& env) const {
    ComplexL a = eval_numeric_l(jac_[0][0], env), b = eval_numeric_l(jac_[0][1], env);
    ComplexL c = eval_numeric_l(jac_[1][0], env), d = eval_numeric_l(jac_[1][1], env);
    return std::abs(a * d - b * c);
  }

 private:
  std::optional<Solved> from_plan(const Scheme& s, const Bindings& bind) const {
    std::vector<Substitution> mine;
    for (const auto& st : s.plan().steps) {
      if (st.target == tx_ || st.target == tu_) mine.push_back({st.target, substitute(st.value, bind)});
    }
    if (mine.size() != 2) return std::nullopt;
    Bindings later;
    for (auto it = mine.rbegin(); it != mine.rend(); ++it) {
      it->value = substitute(it->value, later);
      later[it->target] = it->value;
    }
    Expr x = later.at(tx_);
    Expr u = later.at(tu_);
    if (!only_symbols(x, known_)) return std::nullopt;
    std::set<Symbol> with_x = known_;
    with_x.insert(tx_);
    if (!only_symbols(u, with_x)) return std::nullopt;
    return Solved{x, u};
  }

  std::optional<Solved> from_relations() const {
    for (int first = 0; first < 2; ++first) {
      for (int which = 0; which < 2; ++which) {
        const Symbol& v1 = which == 0 ? tx_ : tu_;
        const Symbol& v2 = which == 0 ? tu_ : tx_;
        auto s1 = solve_linear(rel_[first].expr, v1);
        if (!s1) continue;
        auto s2 = solve_linear(substitute(rel_[1 - first].expr, {{v1, *s1}}), v2);
        if (!s2 || !only_symbols(*s2, known_)) continue;
        Expr full1 = normalize(substitute(*s1, {{v2, *s2}}));
        if (!only_symbols(full1, known_)) continue;
        return which == 0 ? Solved{full1, *s2} : Solved{*s2, full1};
      }
    }
    return std::nullopt;
  }

  int direction_;
  int lo_ = 0;
  int hi_ = 0;
  int node_ = 0;
  Symbol tx_ = Symbol::x(0);
  Symbol tu_ = Symbol::u(0);
  std::set<Symbol> known_;
  std::vector<Relation> rel_;
  std::vector<std::vector<Expr>> jac_;
  std::optional<Solved> closed_;
};

bool strictly_monotone(const std::vector<LatticePoint>& p) {
  if (p.size() < 2) return true;
  bool up = true, down = true;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (!(p[i].x > p[i - 1].x)) up = false;
    if (!(p[i].x < p[i - 1].x)) down = false;
  }
  return up || down;
}

std::string describe_seeds(const std::vector<Seed>& init, long n0) {
  std::ostringstream os;
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (i) os << "; ";
    os << "n=" << n0 + static_cast<long>(i) << ": x=" << to_string(init[i].x) << ", u=" << to_string(init[i].u);
  }
  return os.str();
}

}  // namespace

LatticeTrajectory integrate(const Scheme& s, const std::vector<Seed>& init, int steps, int direction,
                            const IntegrateOptions& opt) {
  if (s.is_ddelta()) throw SchemeError("scheme " + s.name() + " is differential-difference; only difference schemes integrate");
  if (direction != 1 && direction != -1) throw SchemeError("direction must be +1 or -1");
  Stepper st(s, direction, opt);
  const int width = st.hi() - st.lo();
  if (static_cast<int>(init.size()) != width) {
    throw SchemeError("scheme " + s.name() + " needs " + std::to_string(width) + " seed points, got " +
                      std::to_string(init.size()));
  }
  LatticeTrajectory traj;
  traj.scheme = s.name();
  traj.init = describe_seeds(init, opt.n0);

  Bindings bind;
  for (const auto& [name, value] : opt.params) bind[Symbol::param(name)] = value;
  std::deque<LatticePoint> pts;
  std::deque<std::pair<Rational, Rational>> exact_pts;
  bool exact = st.closed_form();
  for (std::size_t i = 0; i < init.size(); ++i) {
    Expr xe = substitute(init[i].x, bind), ue = substitute(init[i].u, bind);
    LatticePoint p;
    p.n = opt.n0 + static_cast<long>(i);
    ComplexL xv = eval_numeric_l(xe, {});
    p.x = xv.real();
    p.u = eval_numeric_l(ue, {});
    pts.push_back(p);
    if (exact) {
      auto xq = eval_exact(xe, {}), uq = eval_exact(ue, {});
      if (xq && uq) exact_pts.push_back({*xq, *uq});
      else exact = false;
    }
  }
  traj.method = st.closed_form() ? (exact ? "exact" : "closed-form") : "newton";

  auto finish = [&](bool diverged) {
    traj.points.assign(pts.begin(), pts.end());
    traj.diverged = diverged;
    traj.monotone = strictly_monotone(traj.points);
    if (exact) traj.exact = std::vector<std::pair<Rational, Rational>>(exact_pts.begin(), exact_pts.end());
  };

  for (int step = 0; step < steps; ++step) {
    // Window node k sits at deque index k - lo (forward) or k - lo - 1 (backward).
    NumericEnvL env;
    ExactEnv qenv;
    for (int k = st.lo(); k <= st.hi(); ++k) {
      if (k == st.node()) continue;
      std::size_t idx = direction > 0 ? pts.size() - width + (k - st.lo()) : static_cast<std::size_t>(k - st.lo() - 1);
      env[Symbol::x(k)] = pts[idx].x;
      env[Symbol::u(k)] = pts[idx].u;
      if (exact) {
        qenv[Symbol::x(k)] = exact_pts[idx].first;
        qenv[Symbol::u(k)] = exact_pts[idx].second;
      }
    }
    const LatticePoint& last = direction > 0 ? pts.back() : pts.front();
    LatticePoint p;
    p.n = last.n + direction;
    ComplexL xv, uv;
    std::string why;
    try {
      if (exact) {
        auto q = st.exact_step(qenv);
        if (q) {
          xv = ComplexL(static_cast<LD>(q->first.get_num().get_d()) / static_cast<LD>(q->first.get_den().get_d()));
          uv = ComplexL(static_cast<LD>(q->second.get_num().get_d()) / static_cast<LD>(q->second.get_den().get_d()));
          if (direction > 0) exact_pts.push_back(*q);
          else exact_pts.push_front(*q);
        } else {
          exact = false;
          exact_pts.clear();
          traj.method = "closed-form";
        }
      }
      if (!exact) {
        if (st.closed_form()) {
          std::tie(xv, uv) = st.closed_step(env);
        } else {
          const LatticePoint& prev = pts.size() >= 2 ? (direction > 0 ? pts[pts.size() - 2] : pts[1]) : last;
          xv = 2.0L * last.x - prev.x;
          uv = 2.0L * last.u - prev.u;
          if (!st.newton(env, xv, uv, why)) {
            finish(true);
            if (why == "singular Jacobian") throw SingularJacobian("step " + std::to_string(step) + ": " + why, step, traj);
            throw NewtonDiverged("step " + std::to_string(step) + ": " + why, step, traj);
          }
        }
      }
      env[Symbol::x(st.node())] = xv;
      env[Symbol::u(st.node())] = uv;
      if (st.jacobian_det(env) < kSingularDet) {
        finish(true);
        throw SingularJacobian("step " + std::to_string(step) + ": Jacobian determinant below 1e-12", step, traj);
      }
      for (const Relation& r : st.relations()) {
        LD res = std::abs(eval_numeric_l(r.expr, env));
        LD& slot = r.label == "E" ? traj.max_E : traj.max_omega;
        slot = std::max(slot, res);
      }
    } catch (const IntegrationError&) {
      throw;
    } catch (const ZeroDenominator& e) {
      // The solved-for coefficient vanished: the leading Jacobian is singular.
      finish(true);
      throw SingularJacobian("step " + std::to_string(step) + ": " + e.what(), step, traj);
    } catch (const Error& e) {
      finish(true);
      throw NewtonDiverged("step " + std::to_string(step) + ": " + e.what(), step, traj);
    }
    if (std::abs(xv.imag()) > 1e-12L * (1 + std::abs(xv.real()))) {
      finish(true);
      throw NewtonDiverged("step " + std::to_string(step) + ": lattice point left the real line", step, traj);
    }
    p.x = xv.real();
    p.u = uv;
    if (direction > 0) pts.push_back(p);
    else pts.push_front(p);
    if (std::max(traj.max_E, traj.max_omega) > kResidualLimit) {
      finish(true);
      throw NewtonDiverged("step " + std::to_string(step) + ": residual above 1e-9", step, traj);
    }
  }
  finish(false);
  return traj;
}

std::vector<Seed> seeds_from(const std::vector<Expr>& xs, const Expr& solution) {
  std::vector<Seed> out;
  for (const Expr& x : xs) out.push_back({x, substitute(solution, {{Symbol::x(0), x}})});
  return out;
}

// ------------------------------------------------------------ generators

std::optional<LatticeKind> lattice_kind_from_name(std::string_view name) {
  if (name == "uniform") return LatticeKind::Uniform;
  if (name == "quadratic") return LatticeKind::Quadratic;
  if (name == "moebius") return LatticeKind::Moebius;
  if (name == "log") return LatticeKind::Log;
  return std::nullopt;
}

std::string_view lattice_kind_name(LatticeKind k) {
  switch (k) {
    case LatticeKind::Uniform:
      return "uniform";
    case LatticeKind::Quadratic:
      return "quadratic";
    case LatticeKind::Moebius:
      return "moebius";
    case LatticeKind::Log:
      return "log";
  }
  return "?";
}

std::size_t lattice_param_count(LatticeKind k) {
  switch (k) {
    case LatticeKind::Uniform:
      return 2;
    case LatticeKind::Quadratic:
      return 3;
    case LatticeKind::Moebius:
      return 4;
    case LatticeKind::Log:
      return 2;
  }
  return 0;
}

LatticeTrajectory lattice_generator(LatticeKind kind, const std::vector<long double>& p, long n_lo, long n_hi) {
  if (p.size() != lattice_param_count(kind)) {
    throw Error(std::string(lattice_kind_name(kind)) + " lattice takes " + std::to_string(lattice_param_count(kind)) +
                " parameters");
  }
  if (n_hi < n_lo) throw Error("empty index range");
  if (kind == LatticeKind::Moebius && p[0] * p[3] - p[1] * p[2] == 0) {
    throw DomainError("moebius lattice requires alpha*delta - beta*gamma != 0");
  }
  LatticeTrajectory t;
  t.scheme = std::string(lattice_kind_name(kind));
  t.method = t.scheme;
  std::ostringstream init;
  init.precision(17);
  for (std::size_t i = 0; i < p.size(); ++i) init << (i ? "," : "") << static_cast<double>(p[i]);
  t.init = init.str();
  for (long n = n_lo; n <= n_hi; ++n) {
    LD nn = static_cast<LD>(n);
    LD x = 0;
    switch (kind) {
      case LatticeKind::Uniform:
        x = p[0] * nn + p[1];
        break;
      case LatticeKind::Quadratic:
        x = (p[0] * nn + p[1]) * nn + p[2];
        break;
      case LatticeKind::Moebius: {
        LD den = p[2] * nn + p[3];
        if (std::abs(den) < 1e-12L * (1 + std::abs(p[2] * nn) + std::abs(p[3]))) {
          throw PoleOnRange("moebius lattice has a pole at n = " + std::to_string(n));
        }
        x = (p[0] * nn + p[1]) / den;
        break;
      }
      case LatticeKind::Log: {
        LD z = p[0] * nn + p[1];
        if (!(z > 0)) throw DomainError("log lattice needs c3*n + c4 > 0, fails at n = " + std::to_string(n));
        x = -std::log(z) / 2;
        break;
      }
    }
    t.points.push_back({n, x, 0});
  }
  t.monotone = strictly_monotone(t.points);
  return t;
}

long double anharmonic_ratio(long double xm, long double x, long double xp, long double xpp) {
  LD d = (x - xm) * (xpp - xp);
  if (d == 0) throw ZeroDenominator("anharmonic ratio with coincident points");
  return (xpp - x) * (xp - xm) / d;
}

std::vector<long double> anharmonic_ratios(const LatticeTrajectory& traj) {
  std::vector<long double> out;
  const auto& p = traj.points;
  for (std::size_t i = 1; i + 2 < p.size(); ++i) {
    out.push_back(anharmonic_ratio(p[i - 1].x, p[i].x, p[i + 1].x, p[i + 2].x));
  }
  return out;
}

Expr k_pm(const Expr& h, int sign) {
  Expr root = h * sqrt(Expr(4) + pow(h, Expr(2)));
  Expr base = (Expr(2) + pow(h, Expr(2)) + (sign > 0 ? root : -root)) / Expr(2);
  return pow(base, Expr(1) / h);
}

LogLatticeValue log_lattice_solution(long double c1, long double c2, long double c3, long double c4, long n) {
  LD z = c3 * static_cast<LD>(n) + c4;
  if (!(z > 0)) throw DomainError("log lattice needs c3*n + c4 > 0");
  LD A = c2 * c3, B = c2 * c4 + c1;
  LD x = -std::log(z) / 2;
  return {c1 / std::sqrt(z) + c2 * std::sqrt(z), (A * static_cast<LD>(n) + B) / std::sqrt(z),
          c1 * std::exp(x) + c2 * std::exp(-x)};
}

// ------------------------------------------------------------ reductions

namespace {

const Symbol kEta = Symbol::param("eta");
const Symbol kS = Symbol::param("s");

}  // namespace

std::vector<ReductionCase> reduction_cases() {
  return {
      {"translation", "u(x,t) = G(eta), eta = x + v*t", "v^2*G''(eta)*(G(eta+h) - 2*G(eta) + G(eta-h))^3 = h^6",
       "v^2*G''(eta)^4 = 1", translation_candidate(1)},
      {"dilation", "u(x,t) = t^(1/2)*G(x)", "G(x)*(G(x+h) - 2*G(x) + G(x-h))^3 = -4*h^6", "G*G''^3 = -4",
       dilation_candidate()},
      {"mixed", "u(x,t) = G(eta), eta = x^3*t",
       "G''(eta) = (eta_+^(1/3) - eta^(1/3))^6/(eta^2*(G(eta_+) - 2*G(eta) + G(eta_-))^3), "
       "eta_+^(1/3) - 2*eta^(1/3) + eta_-^(1/3) = 0",
       "27*eta^3*G''*(3*eta*G'' + 2*G')^3 = 1", Expr()},
  };
}

Expr translation_candidate(int sign) {
  return parse(std::string(sign > 0 ? "" : "-") + "eta^2/(2*sqrt(v)) + A*eta + B");
}

Expr reduction_exactness(const Expr& G) {
  Expr h = parse("h");
  Expr v = parse("v");
  Expr gpp = diff(diff(G, kEta), kEta);
  Expr second = substitute(G, {{kEta, Expr(kEta) + h}}) - Expr(2) * G + substitute(G, {{kEta, Expr(kEta) - h}});
  return normalize(pow(v, Expr(2)) * gpp * pow(second, Expr(3)) - pow(h, Expr(6)));
}

Expr dilation_candidate() { return parse("4*(-3)^(-3/4)*s^(3/2)"); }

OrderReport reduction_order(const Expr& G, const std::vector<double>& h_list) {
  if (h_list.size() < 4) throw Error("reduction order needs at least four step sizes");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (!(h_list[i] < h_list[i - 1])) throw Error("step sizes must decrease");
  }
  Expr gpp = diff(diff(G, kS), kS);
  auto at = [&](const Expr& e, double s) { return eval_numeric(e, {{kS, Complex(s)}}); };
  const double s0 = 1.0;
  Complex g2 = at(gpp, s0);
  if (std::abs(g2) < 1e-300) throw DomainError("second derivative vanishes at the evaluation point");
  OrderReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double h : h_list) {
    Complex d = at(G, s0 + h) - 2.0 * at(G, s0) + at(G, s0 - h);
    double r = std::abs(d - h * h * g2) / (h * h * std::abs(g2));
    if (!(r > 1e-13)) throw DomainError("relative residual at rounding level: the candidate solves the difference equation");
    rep.h.push_back(h);
    rep.r.push_back(r);
    double lx = std::log(h), ly = std::log(r);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = static_cast<double>(h_list.size());
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rep;
}

long double eta_residual(long double eta_m, long double eta, long double eta_p) {
  return std::cbrt(eta_p) - 2 * std::cbrt(eta) + std::cbrt(eta_m);
}

EtaReport eta_lattice_check(long double a, long double b, long n_lo, long n_hi) {
  EtaReport rep;
  for (long n = n_lo - 1; n <= n_hi + 1; ++n) {
    if (!(a * n + b > 0)) throw DomainError("eta lattice needs a*n + b > 0, fails at n = " + std::to_string(n));
  }
  auto eta = [&](long n) {
    LD w = a * static_cast<LD>(n) + b;
    return w * w * w;
  };
  for (long n = n_lo; n <= n_hi; ++n) {
    LD r = std::abs(eta_residual(eta(n - 1), eta(n), eta(n + 1)));
    rep.max_residual = std::max(rep.max_residual, r);
  }
  rep.pass = rep.max_residual < 1e-12L;
  return rep;
}

// ------------------------------------------------------------ output

std::string trajectory_csv(const LatticeTrajectory& traj) {
  std::string out = "n,x,u_re,u_im\n";
  char buf[128];
  for (const auto& p : traj.points) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g\n", p.n, static_cast<double>(p.x),
                  static_cast<double>(p.u.real()), static_cast<double>(p.u.imag()));
    out += buf;
  }
  return out;
}

std::string trajectory_svg(const LatticeTrajectory& traj) {
  const double W = 640, H = 480, mx = 0.05 * W, my = 0.05 * H;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : traj.points) {
    double x = static_cast<double>(p.x);
    if (std::isfinite(x)) pts.push_back({static_cast<double>(p.n), x});
  }
  double n0 = 0, n1 = 1, x0 = 0, x1 = 1;
  if (!pts.empty()) {
    n0 = n1 = pts[0].first;
    x0 = x1 = pts[0].second;
    for (auto [n, x] : pts) {
      n0 = std::min(n0, n);
      n1 = std::max(n1, n);
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
    }
  }
  if (n1 == n0) n1 = n0 + 1;
  if (x1 == x0) x1 = x0 + 1;
  auto px = [&](double n) { return mx + (n - n0) / (n1 - n0) * (W - 2 * mx); };
  auto py = [&](double x) { return H - my - (x - x0) / (x1 - x0) * (H - 2 * my); };
  std::ostringstream os;
  char buf[200];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  os << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n", mx, H - my,
                W - mx, H - my);
  os << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n", mx, my, mx,
                H - my);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.3f\" y=\"%.3f\" font-size=\"12\" text-anchor=\"middle\">n</text>\n", W / 2,
                H - my / 4);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.3f\" y=\"%.3f\" font-size=\"12\" text-anchor=\"middle\">x</text>\n", mx / 2,
                H / 2);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.3f\" y=\"%.3f\" font-size=\"10\">n: [%.6g, %.6g]  x: [%.6g, %.6g]</text>\n", mx,
                my * 0.7, n0, n1, x0, x1);
  os << buf;
  for (auto [n, x] : pts) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"black\"/>\n", px(n), py(x));
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace deltasym
