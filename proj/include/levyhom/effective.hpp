#pragma once

#include <vector>

#include "levyhom/fields.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

// Homogenized kernel constants for the averaged regimes.  The product cases
// return (mean of the ratio mu/lambda)^(-1) times the squared mean of mu;
// the locally periodic and probability-space cases return plain averages of
// the microstructure, scaled by the macroscopic factor where one exists.
double effective_p1(const TorusField& lambda, const TorusField& mu);
double effective_p2(const KernelModel& model, const Pt& x, const Pt& y);
// Exact expectation over the finite single-site laws.  Specs sharing a draw
// stream (and the same site geometry) are coupled through one uniform draw;
// distinct streams factorize into a product of marginal expectations.
double effective_q1(const RandomFieldSpec& lambda_spec, const RandomFieldSpec& mu_spec);
double effective_q2(const KernelModel& model, const Pt& x, const Pt& y);

// Discretization of the torus jump operator pair (L, L~) used by the
// non-symmetric cell problem.  Pair weights aggregate the base integrals of
// |zeta - eta|^(-d-alpha) over lattice images up to r_img periods; the mass
// beyond that radius is completed by a uniform per-cell share, which keeps
// constant annihilation and the product-kernel null vector exact.  Weights
// are stored as a stencil over periodic offsets, so the adjoint matrix is
// the exact transpose of the forward one.
struct CellOperatorDiscretization {
  int dim = 1;
  int n = 1;
  double alpha = 0.5;
  double gamma = 2.0;
  int r_img = 8;
  KernelTable lper;
  std::vector<double> stencil;  // aggregated base weight per periodic offset
  double row_mass = 0.0;        // stencil sum, tail share included
  double tail_share = 0.0;      // uniform completion of the far mass, per cell
  double lambda_shift = 0.0;    // spectral shift for the inverse iteration

  int size() const;
};

// lambda_shift <= 0 selects the default 4 * gamma * row_mass.
CellOperatorDiscretization make_cell_operator(const KernelTable& lper, double alpha,
                                              double gamma, int r_img = 8,
                                              double lambda_shift = 0.0);

TorusField forward_apply(const CellOperatorDiscretization& disc, const TorusField& q);
TorusField adjoint_apply(const CellOperatorDiscretization& disc, const TorusField& q);

struct CellSolution {
  TorusField p0;             // principal null vector of the adjoint, mean one
  double eigenvalue = 0.0;   // resolvent eigenvalue estimate, ~ 1/lambda_shift
  double residual = 0.0;     // max norm of the adjoint action on p0
  double p_min = 0.0;
  double lambda_eff = 0.0;   // weighted double average of the kernel
  double tail_bound = 0.0;   // bound on the long-range term beyond r_img
  int iterations = 0;
};

// Inverse power iteration on the shifted adjoint.  Stops once successive
// mean-normalized iterates differ by less than tol in max norm and the
// adjoint residual is below residual_tol; errors on non-convergence or on a
// nonpositive component in the converged vector.
CellSolution principal_eigenfunction(const CellOperatorDiscretization& disc,
                                     double tol = 1e-12, double residual_tol = 1e-8,
                                     int max_iterations = 200000);

// <Lambda p0> / <p0>: the mean over cell pairs of Lambda(zeta, eta) p0(zeta)
// divided by the mean of p0.
double effective_nonsym(const KernelTable& lper, const TorusField& p0);

}  // namespace levyhom
