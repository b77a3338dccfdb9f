#pragma once

#include <span>
#include <string>
#include <vector>

#include "levyhom/operator.hpp"

namespace levyhom {

struct SolveOptions {
  double tol = 1e-8;       // residual target relative to the data norm
  int max_iterations = 0;  // 0 selects the per-method default
};

struct SolveResult {
  std::vector<double> u;
  int iterations = 0;
  double residual = 0.0;  // achieved relative residual
  double wall_ms = 0.0;
  std::string method;
  double objective = 0.0;               // nonlinear path only
  std::vector<double> objective_trace;  // nonlinear path only
};

// Solves (m I - L) u = f to ||(m I - L) u - f||_2 <= tol ||f||_2.  Kernels
// with a symmetrizing weight use conjugate directions in the nu-weighted
// inner product; plain non-symmetric kernels use a stabilized bi-Lanczos
// iteration with a damped Jacobi fallback.
SolveResult solve_resolvent(const DiscreteOperator& op, double m,
                            std::span<const double> f, const SolveOptions& opt = {});

// phi_p(t) = |t|^(p-2) t, with phi_p(0) = 0.
double phi_p(double t, double p);

// Nonlinear jump operator
//   (L_p u)_i = sum_j W_ij phi_p(u_j - u_i) - kappa_i phi_p(u_i).
std::vector<double> apply_plaplace(const DiscreteOperator& op, double p,
                                   std::span<const double> u);

// Discrete energy
//   h^d [ (1/2p) sum_ij nu_i W_ij |u_j - u_i|^p + (1/p) sum_i nu_i kappa_i |u_i|^p
//         + (m/p) sum_i nu_i |u_i|^p + sum_i nu_i f_i u_i ].
// Strictly convex for p > 1; its minimizer solves L_p u - m phi_p(u) = f.
double objective_value(const DiscreteOperator& op, double m, double p,
                       std::span<const double> f, std::span<const double> u);

// Minimizes the energy by descent along local-curvature-scaled directions
// with a backtracking line search; where the curvature matrix degenerates it
// is blended with the quadratic operator.  Stops when the Euler-Lagrange
// mismatch ||L_p u - m phi_p(u) - f||_2 falls below tol ||f||_2.  Requires a
// kernel with a symmetrizing weight (otherwise the energy does not represent
// the equation).
SolveResult solve_plaplace(const DiscreteOperator& op, double m, double p,
                           std::span<const double> f, const SolveOptions& opt = {});

}  // namespace levyhom
