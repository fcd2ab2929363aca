#pragma once

#include <optional>
#include <vector>

#include "deltasym/expr.hpp"

namespace deltasym::linalg {

template <typename T>
using Matrix = std::vector<std::vector<T>>;

template <typename T>
struct Rref {
  Matrix<T> m;              // reduced rows, zero rows dropped
  std::vector<int> pivots;  // pivot column of each row
  int cols = 0;
  int rank() const { return static_cast<int>(pivots.size()); }
};

Rref<Rational> rref(Matrix<Rational> m, int cols);
// Partial pivoting after scaling every row to unit max-modulus; entries
// below pivot_tol count as zero.
Rref<Complex> rref(Matrix<Complex> m, int cols, double pivot_tol);

// One basis vector per free column, with that column set to 1.
Matrix<Rational> nullspace(const Rref<Rational>& r);
Matrix<Complex> nullspace(const Rref<Complex>& r);

// Best rational approximation with denominator <= max_den, accepted when
// within tol (relative to max(1, |v|)).
std::optional<Rational> rationalize(double v, long max_den, double tol);

// Scales a rational vector to coprime integers with a positive leading entry.
std::vector<Rational> primitive(std::vector<Rational> v);

}  // namespace deltasym::linalg
