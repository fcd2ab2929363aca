#include "deltasym/liealg.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "deltasym/linalg.hpp"
#include "deltasym/normal_form.hpp"

namespace deltasym {

namespace {

Expr act(const VectorField& X, const Expr& f) {
  return Expr::add({X.xi * diff(f, Symbol::x(0)), X.tau * diff(f, Symbol::t()), X.phi * diff(f, Symbol::u(0))});
}

struct KeyLess {
  bool operator()(const std::pair<int, nf::BasisKey>& a, const std::pair<int, nf::BasisKey>& b) const {
    if (a.first != b.first) return a.first < b.first;
    return nf::compare(a.second, b.second) < 0;
  }
};

// Row index (component, basis function) -> coefficient.
using Decomposition = std::map<std::pair<int, nf::BasisKey>, nf::RatFun, KeyLess>;

Decomposition decompose_field(const VectorField& f) {
  Decomposition out;
  auto coord = [](const Symbol& s) { return !s.is_param(); };
  const Expr* comps[3] = {&f.xi, &f.tau, &f.phi};
  for (int c = 0; c < 3; ++c) {
    for (auto& [key, coeff] : nf::decompose(nf::to_ratfun(*comps[c]), coord)) {
      out.emplace(std::make_pair(c, key), coeff);
    }
  }
  return out;
}

// Solves sum_k a_k c_k = b over rational functions of the parameters;
// nullopt when inconsistent.
std::optional<std::vector<nf::RatFun>> solve_span(const std::vector<Decomposition>& basis, const Decomposition& target) {
  std::vector<std::pair<int, nf::BasisKey>> rows;
  std::map<std::pair<int, nf::BasisKey>, bool, KeyLess> seen;
  auto add_keys = [&](const Decomposition& d) {
    for (const auto& [k, v] : d) {
      if (seen.emplace(k, true).second) rows.push_back(k);
    }
  };
  for (const auto& d : basis) add_keys(d);
  add_keys(target);
  const std::size_t n = basis.size();
  std::vector<std::vector<nf::RatFun>> m;
  for (const auto& key : rows) {
    std::vector<nf::RatFun> row;
    for (const auto& d : basis) {
      auto it = d.find(key);
      row.push_back(it == d.end() ? nf::RatFun() : it->second);
    }
    auto it = target.find(key);
    row.push_back(it == target.end() ? nf::RatFun() : it->second);
    m.push_back(std::move(row));
  }
  std::vector<int> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && m[p][c].is_zero()) ++p;
    if (p == m.size()) continue;
    std::swap(m[r], m[p]);
    nf::RatFun inv = nf::inv(m[r][c]);
    for (auto& v : m[r]) v = nf::mul(v, inv);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || m[i][c].is_zero()) continue;
      nf::RatFun f = m[i][c];
      for (std::size_t k = c; k <= n; ++k) m[i][k] = nf::sub(m[i][k], nf::mul(f, m[r][k]));
    }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  for (std::size_t i = r; i < m.size(); ++i) {
    if (!m[i][n].is_zero()) return std::nullopt;
  }
  std::vector<nf::RatFun> sol(n);
  for (std::size_t i = 0; i < r; ++i) sol[pivot_col[i]] = m[i][n];
  return sol;
}

void check_independent(const std::vector<VectorField>& fields, Rng& rng) {
  const int n = static_cast<int>(fields.size());
  int rank = numeric_rank(fields, rng);
  if (rank < n) {
    throw DependentBasis("the " + std::to_string(n) + " fields span only " + std::to_string(rank) + " dimensions");
  }
}

}  // namespace

int numeric_rank(const std::vector<VectorField>& fields, Rng& rng) {
  if (fields.empty()) return 0;
  std::set<Symbol> syms;
  for (const auto& f : fields) {
    for (const Expr* e : {&f.xi, &f.tau, &f.phi}) {
      auto fs = free_symbols(*e);
      syms.insert(fs.begin(), fs.end());
    }
  }
  const int n = static_cast<int>(fields.size());
  linalg::Matrix<Complex> m;
  for (int p = 0; p < n + 2; ++p) {
    NumericEnv env;
    for (const Symbol& s : syms) env[s] = s.is_param() ? Complex(rng.uniform(0.5, 2.0)) : rng.annulus(0.5, 2.0);
    for (int c = 0; c < 3; ++c) {
      std::vector<Complex> row;
      for (const auto& f : fields) row.push_back(eval_numeric(c == 0 ? f.xi : c == 1 ? f.tau : f.phi, env));
      m.push_back(std::move(row));
    }
  }
  return linalg::rref(m, n, 1e-9).rank();
}

VectorField bracket(const VectorField& X, const VectorField& Y) {
  return VectorField{"[" + X.name + "," + Y.name + "]", normalize(act(X, Y.xi) - act(Y, X.xi)),
                     normalize(act(X, Y.tau) - act(Y, X.tau)), normalize(act(X, Y.phi) - act(Y, X.phi))};
}

SymmetryBasis close_and_constants(const std::vector<VectorField>& fields, Rng& rng) {
  check_independent(fields, rng);
  SymmetryBasis b;
  b.fields = fields;
  const std::size_t n = fields.size();
  std::vector<Decomposition> dec;
  for (const auto& f : fields) dec.push_back(decompose_field(normalized(f)));
  b.c.assign(n, std::vector<std::vector<Expr>>(n, std::vector<Expr>(n, Expr(0))));
  b.closed = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      VectorField br = bracket(fields[i], fields[j]);
      auto sol = solve_span(dec, decompose_field(br));
      bool ok = sol.has_value();
      if (ok) {
        std::vector<std::pair<Expr, const VectorField*>> combo;
        for (std::size_t k = 0; k < n; ++k) {
          b.c[i][j][k] = nf::to_expr((*sol)[k]);
          combo.push_back({-b.c[i][j][k], &fields[k]});
        }
        combo.push_back({Expr(1), &br});
        ok = linear_combination("rest", combo).is_zero();
      }
      if (!ok && b.closed) {
        b.closed = false;
        b.offending = std::make_pair(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return b;
}

bool antisymmetry_check(const SymmetryBasis& b) {
  const std::size_t n = b.fields.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!normalizes_to_zero(b.c[i][j][k] + b.c[j][i][k])) return false;
      }
    }
  }
  return true;
}

bool jacobi_check(const SymmetryBasis& b) {
  const std::size_t n = b.fields.size();
  if (!b.closed) return false;
  // Rational fast path.
  std::vector<std::vector<std::vector<Rational>>> q(n, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n)));
  bool rational = true;
  for (std::size_t i = 0; i < n && rational; ++i) {
    for (std::size_t j = 0; j < n && rational; ++j) {
      for (std::size_t k = 0; k < n && rational; ++k) {
        if (b.c[i][j][k].is_const()) {
          q[i][j][k] = b.c[i][j][k].value();
        } else {
          rational = false;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
          if (rational) {
            Rational s = 0;
            for (std::size_t m = 0; m < n; ++m) {
              s += q[i][j][m] * q[m][k][l] + q[j][k][m] * q[m][i][l] + q[k][i][m] * q[m][j][l];
            }
            if (sgn(s) != 0) return false;
          } else {
            std::vector<Expr> terms;
            for (std::size_t m = 0; m < n; ++m) {
              terms.push_back(b.c[i][j][m] * b.c[m][k][l]);
              terms.push_back(b.c[j][k][m] * b.c[m][i][l]);
              terms.push_back(b.c[k][i][m] * b.c[m][j][l]);
            }
            if (!normalizes_to_zero(Expr::add(terms))) return false;
          }
        }
      }
    }
  }
  return true;
}

namespace {

std::string expansion(const SymmetryBasis& b, std::size_t i, std::size_t j) {
  if (!b.closed) return "?";
  std::string out;
  for (std::size_t k = 0; k < b.fields.size(); ++k) {
    const Expr& c = b.c[i][j][k];
    if (c.is_zero()) continue;
    std::string term;
    if (c.is_one()) {
      term = b.fields[k].name;
    } else if (c.is_const() && c.value() == -1) {
      term = "-" + b.fields[k].name;
    } else if (c.kind() == Expr::Kind::Add) {
      term = "(" + to_string(c) + ")*" + b.fields[k].name;
    } else {
      term = to_string(c) + "*" + b.fields[k].name;
    }
    if (!out.empty()) out += term.front() == '-' ? " - " + term.substr(1) : " + " + term;
    else out = term;
  }
  return out.empty() ? "0" : out;
}

}  // namespace

std::string bracket_table_text(const SymmetryBasis& b) {
  const std::size_t n = b.fields.size();
  std::vector<std::vector<std::string>> cells(n + 1, std::vector<std::string>(n + 1));
  cells[0][0] = "[row,col]";
  for (std::size_t i = 0; i < n; ++i) {
    cells[0][i + 1] = b.fields[i].name;
    cells[i + 1][0] = b.fields[i].name;
    for (std::size_t j = 0; j < n; ++j) cells[i + 1][j + 1] = expansion(b, i, j);
  }
  std::vector<std::size_t> width(n + 1, 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c <= n; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c <= n; ++c) {
      line += row[c];
      if (c < n) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    os << line << "\n";
  }
  return os.str();
}

std::string bracket_table_csv(const SymmetryBasis& b) {
  std::ostringstream os;
  os << "i,j,k,value\n";
  const std::size_t n = b.fields.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!b.c[i][j][k].is_zero()) os << i + 1 << "," << j + 1 << "," << k + 1 << "," << to_string(b.c[i][j][k]) << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace deltasym
