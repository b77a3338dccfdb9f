#pragma once

#include <array>
#include <cmath>

namespace levyhom {

// Points live in dimension 1 or 2; unused trailing components stay zero.
using Pt = std::array<double, 2>;

struct Box {
  int dim = 1;
  Pt lo{0.0, 0.0};
  Pt hi{0.0, 0.0};
};

inline double dist(int dim, const Pt& a, const Pt& b) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Fractional part in [0, 1); guards against rounding to exactly 1.
inline double frac01(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;
  if (f < 0.0) f = 0.0;
  return f;
}

}  // namespace levyhom
