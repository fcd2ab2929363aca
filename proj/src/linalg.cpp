#include "deltasym/linalg.hpp"

#include <cmath>

namespace deltasym::linalg {

Rref<Rational> rref(Matrix<Rational> m, int cols) {
  Rref<Rational> out;
  out.cols = cols;
  std::size_t row = 0;
  for (int c = 0; c < cols && row < m.size(); ++c) {
    std::size_t p = row;
    while (p < m.size() && sgn(m[p][c]) == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[row], m[p]);
    Rational inv = 1 / m[row][c];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || sgn(m[r][c]) == 0) continue;
      Rational f = m[r][c];
      for (int k = c; k < cols; ++k) m[r][k] -= f * m[row][k];
    }
    out.pivots.push_back(c);
    ++row;
  }
  m.resize(row);
  out.m = std::move(m);
  return out;
}

Rref<Complex> rref(Matrix<Complex> m, int cols, double pivot_tol) {
  for (auto& row : m) {
    double mx = 0;
    for (const Complex& v : row) mx = std::max(mx, std::abs(v));
    if (mx > 0) {
      for (Complex& v : row) v /= mx;
    }
  }
  Rref<Complex> out;
  out.cols = cols;
  std::size_t row = 0;
  for (int c = 0; c < cols && row < m.size(); ++c) {
    std::size_t p = row;
    double best = 0;
    for (std::size_t r = row; r < m.size(); ++r) {
      if (std::abs(m[r][c]) > best) {
        best = std::abs(m[r][c]);
        p = r;
      }
    }
    if (best <= pivot_tol) continue;
    std::swap(m[row], m[p]);
    Complex inv = 1.0 / m[row][c];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row) continue;
      Complex f = m[r][c];
      if (f == 0.0) continue;
      for (int k = c; k < cols; ++k) m[r][k] -= f * m[row][k];
    }
    out.pivots.push_back(c);
    ++row;
  }
  m.resize(row);
  out.m = std::move(m);
  return out;
}

namespace {

template <typename T>
Matrix<T> nullspace_impl(const Rref<T>& r) {
  std::vector<bool> is_pivot(r.cols, false);
  for (int p : r.pivots) is_pivot[p] = true;
  Matrix<T> out;
  for (int f = 0; f < r.cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<T> v(r.cols, T(0));
    v[f] = T(1);
    for (std::size_t i = 0; i < r.pivots.size(); ++i) v[r.pivots[i]] = -r.m[i][f];
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

Matrix<Rational> nullspace(const Rref<Rational>& r) { return nullspace_impl(r); }
Matrix<Complex> nullspace(const Rref<Complex>& r) { return nullspace_impl(r); }

std::optional<Rational> rationalize(double v, long max_den, double tol) {
  if (!std::isfinite(v)) return std::nullopt;
  double scale = std::max(1.0, std::abs(v));
  // Continued-fraction convergents p/q.
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = v;
  for (int i = 0; i < 64; ++i) {
    double a = std::floor(x);
    if (std::abs(a) > 1e15) break;
    long ai = static_cast<long>(a);
    long p2 = ai * p1 + p0;
    long q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    if (std::abs(v - static_cast<double>(p1) / static_cast<double>(q1)) <= tol * scale) {
      Rational r(p1, q1);
      r.canonicalize();
      return r;
    }
    double frac = x - a;
    if (frac < 1e-300) break;
    x = 1.0 / frac;
  }
  return std::nullopt;
}

std::vector<Rational> primitive(std::vector<Rational> v) {
  mpz_class den = 1;
  for (const auto& q : v) {
    if (sgn(q) != 0) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t());
  }
  mpz_class g = 0;
  for (auto& q : v) {
    q *= den;
    q.canonicalize();
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), q.get_num_mpz_t());
  }
  if (g == 0) return v;
  int lead = 0;
  for (const auto& q : v) {
    if (sgn(q) != 0) {
      lead = sgn(q);
      break;
    }
  }
  for (auto& q : v) {
    q /= g;
    if (lead < 0) q = -q;
  }
  return v;
}

}  // namespace deltasym::linalg
