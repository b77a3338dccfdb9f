#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "levyhom/errors.hpp"
#include "levyhom/quadrature.hpp"

// Independent reference computations for the tests; nothing here shares code
// with the library paths under test beyond basic utilities.
namespace testsupport {

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[static_cast<size_t>(r) * n + col]) >
          std::abs(a[static_cast<size_t>(piv) * n + col])) {
        piv = r;
      }
    }
    if (a[static_cast<size_t>(piv) * n + col] == 0.0) {
      throw levyhom::NumericError("singular reference matrix");
    }
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(piv) * n + c], a[static_cast<size_t>(col) * n + c]);
      }
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r) * n + col] / a[static_cast<size_t>(col) * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) {
        a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
      }
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<size_t>(r) * n + c] * x[c];
    x[r] = s / a[static_cast<size_t>(r) * n + r];
  }
  return x;
}

// Reference value of the two-cell double integral of |x-y|^(-2-alpha) in
// d=2, computed in polar coordinates: after reducing to the difference
// variable the integrand is a product of triangle weights, which are linear
// along every ray between kink crossings, so the radial integral has a
// closed form piece by piece; the angle is integrated adaptively between the
// directions of the nine kink intersections.
inline double polar_pair_integral(double alpha, int k1, int k2, double h) {
  k1 = std::abs(k1);
  k2 = std::abs(k2);
  const double us[3] = {(k1 - 1) * h, k1 * h, (k1 + 1) * h};
  const double vs[3] = {(k2 - 1) * h, k2 * h, (k2 + 1) * h};

  auto term = [&](double coef, double expo, double r0, double r1) {
    if (coef == 0.0) return 0.0;
    auto tp = [&](double r) {
      if (r == 0.0) {
        if (expo > 0.0) return 0.0;
        throw levyhom::NumericError("divergent polar reference integral");
      }
      return std::pow(r, expo);
    };
    if (expo == 0.0) return coef * std::log(r1 / r0);
    return coef * (tp(r1) - tp(r0)) / expo;
  };

  auto ray = [&](double th) {
    const double c = std::cos(th), s = std::sin(th);
    std::vector<double> bps{0.0};
    for (double u : us) {
      if (std::abs(c) > 1e-14 && u / c > 0.0) bps.push_back(u / c);
    }
    for (double v : vs) {
      if (std::abs(s) > 1e-14 && v / s > 0.0) bps.push_back(v / s);
    }
    std::sort(bps.begin(), bps.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < bps.size(); ++i) {
      const double r0 = bps[i], r1 = bps[i + 1];
      if (r1 - r0 < 1e-13 * h) continue;
      const double rm = 0.5 * (r0 + r1);
      if (std::abs(c * rm - k1 * h) >= h || std::abs(s * rm - k2 * h) >= h) continue;
      const double s1 = (c * rm >= k1 * h) ? 1.0 : -1.0;
      const double s2 = (s * rm >= k2 * h) ? 1.0 : -1.0;
      const double a1 = h * (1.0 + s1 * k1), b1 = -s1 * c;
      const double a2 = h * (1.0 + s2 * k2), b2 = -s2 * s;
      total += term(a1 * a2, -alpha, r0, r1);
      total += term(a1 * b2 + a2 * b1, 1.0 - alpha, r0, r1);
      total += term(b1 * b2, 2.0 - alpha, r0, r1);
    }
    return total;
  };

  std::vector<double> angs;
  for (double u : us) {
    for (double v : vs) {
      if (u != 0.0 || v != 0.0) angs.push_back(std::atan2(v, u));
    }
  }
  std::sort(angs.begin(), angs.end());
  double total = 0.0;
  for (size_t i = 0; i + 1 < angs.size(); ++i) {
    if (angs[i + 1] - angs[i] < 1e-14) continue;
    total += levyhom::integrate_1d(ray, angs[i], angs[i + 1], 1e-13);
  }
  return total;
}

}  // namespace testsupport
