#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deltasym/prolong.hpp"

namespace deltasym {

class DependentBasis : public Error {
 public:
  using Error::Error;
};

// Rank over the constants of the sampled coefficient vectors (parameters
// sampled per point).
int numeric_rank(const std::vector<VectorField>& fields, Rng& rng);

// [X, Y] = X(Y^a) - Y(X^a) on the coordinates (x, t, u), normalized.
VectorField bracket(const VectorField& X, const VectorField& Y);

struct SymmetryBasis {
  std::vector<VectorField> fields;
  // c[i][j][k]: [X_i, X_j] = sum_k c[i][j][k] X_k; entries are rationals or
  // rational functions of the parameters. Filled only for pairs in the span.
  std::vector<std::vector<std::vector<Expr>>> c;
  bool closed = false;
  std::optional<std::pair<int, int>> offending;  // first pair outside the span (0-based)
};

// Throws DependentBasis when the fields are linearly dependent over the
// constants (rank of sampled coefficient values).
SymmetryBasis close_and_constants(const std::vector<VectorField>& fields, Rng& rng);

bool antisymmetry_check(const SymmetryBasis& b);
// sum over cyclic (i, j, k) of c[i][j][m] c[m][k][l] = 0 for all i, j, k, l.
bool jacobi_check(const SymmetryBasis& b);

// n x n grid of bracket expansions (aligned text).
std::string bracket_table_text(const SymmetryBasis& b);
// "i,j,k,value" rows, 1-based, nonzero entries only, all ordered pairs.
std::string bracket_table_csv(const SymmetryBasis& b);

}  // namespace deltasym
