#pragma once

#include <vector>

namespace levyhom {

// Dense LU factorization with partial pivoting, factored once and reused for
// repeated solves against the same matrix.
struct LuFactor {
  int n = 0;
  std::vector<double> lu;  // combined L (unit diagonal) and U, row-major
  std::vector<int> piv;
};

LuFactor lu_factor(std::vector<double> a, int n);
std::vector<double> lu_solve(const LuFactor& f, std::vector<double> b);

}  // namespace levyhom
