#pragma once

#include <array>
#include <functional>

namespace levyhom {

// Shared quadrature pieces for the grid and torus-cell discretizations.

// Integral of |z|^(-d-alpha) over |z| > r.
double tail_mass(int dim, double alpha, double r);

// Exact double integral of |x-y|^(-d-alpha) over two cells of edge h whose
// centers differ by k*h (k integer, nonzero).  Closed form in d=1; in d=2 the
// pair integral reduces to triangle-weighted rectangles which are split at
// the weight kinks and integrated by Gauss panels, with the corner-singular
// pieces summed exactly as geometric series of dyadic annuli.
double exact_pair_integral(int dim, double alpha, const std::array<int, 2>& k, double h);

// Pair weight in apply scale (single-integral units): exact pair integral
// divided by h^d when the center distance is within r_near, midpoint value
// h^d |kh|^(-d-alpha) beyond.  Touching pairs with a divergent exact integral
// (alpha >= 1) fall back to the midpoint value.
double base_pair_weight(int dim, double alpha, const std::array<int, 2>& k, double h,
                        double r_near);

// Adaptive Simpson on [a,b] to absolute tolerance.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    double tol_abs);

}  // namespace levyhom
