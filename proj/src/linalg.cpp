#include "levyhom/linalg.hpp"

#include <cmath>
#include <utility>

#include "levyhom/errors.hpp"

namespace levyhom {

LuFactor lu_factor(std::vector<double> a, int n) {
  if (n <= 0 || static_cast<size_t>(n) * n != a.size()) {
    throw ConfigError("factorization needs a square matrix");
  }
  LuFactor f;
  f.n = n;
  f.piv.resize(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a[static_cast<size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[static_cast<size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw NumericError("singular matrix in factorization");
    f.piv[col] = piv;
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(piv) * n + c], a[static_cast<size_t>(col) * n + c]);
      }
    }
    const double d = a[static_cast<size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      double& l = a[static_cast<size_t>(r) * n + col];
      l /= d;
      if (l == 0.0) continue;
      const double* urow = a.data() + static_cast<size_t>(col) * n;
      double* rrow = a.data() + static_cast<size_t>(r) * n;
      for (int c = col + 1; c < n; ++c) rrow[c] -= l * urow[c];
    }
  }
  f.lu = std::move(a);
  return f;
}

std::vector<double> lu_solve(const LuFactor& f, std::vector<double> b) {
  const int n = f.n;
  if (static_cast<int>(b.size()) != n) {
    throw ConfigError("right-hand side does not match the factorization");
  }
  // The factorization swaps whole rows, so the stored multipliers live at
  // their final positions; permute the data first, then substitute.
  for (int col = 0; col < n; ++col) {
    if (f.piv[col] != col) std::swap(b[f.piv[col]], b[col]);
  }
  for (int col = 0; col < n; ++col) {
    const double x = b[col];
    if (x == 0.0) continue;
    for (int r = col + 1; r < n; ++r) {
      b[r] -= f.lu[static_cast<size_t>(r) * n + col] * x;
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    const double* row = f.lu.data() + static_cast<size_t>(r) * n;
    for (int c = r + 1; c < n; ++c) s -= row[c] * b[c];
    b[r] = s / row[r];
  }
  return b;
}

}  // namespace levyhom
