#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "levyhom/kernels.hpp"
#include "levyhom/operator.hpp"

namespace levyhom {

// Smooth compactly supported source centered at the origin:
// height * exp(1 - 1/(1 - |x/radius|^2)) inside the ball, 0 outside.
std::function<double(const Pt&)> bump_source(int dim, double radius = 1.0,
                                             double height = 1.0);

// One homogenization sweep: a scale ladder of resolvent problems
// (L^eps - m) u = f compared against the effective solution on a shared grid.
struct SweepConfig {
  KernelModel model;
  double m = 1.0;
  double p = 2.0;                    // 2 selects the linear path
  std::function<double(const Pt&)> f;
  double r_dom = 2.0;                // box half-width
  int refine = 8;                    // grid step h = eps_min / refine
  double r_near = 0.0;               // 0 selects the assembly default
  std::vector<double> eps_list;      // strictly decreasing, positive
  std::vector<uint64_t> seeds;       // random cases; empty selects {0}
  double tol = 0.0;                  // 0 selects 1e-8 linear / 1e-6 nonlinear
  int max_iterations = 0;            // 0 selects the solver default
  double kernel_override = 0.0;      // nonzero replaces the constant effective
                                     // kernel (control runs)
};

struct SweepRecord {
  double eps = 0.0;
  uint64_t seed = 0;
  double rel_error = 0.0;     // |u^eps - u0|_p / |u0|_p on the grid
  double gamma_value = 0.0;   // quadratic functional at u^eps (weighted cases)
  double gamma_value_u0 = 0.0;  // same functional at the effective solution
  double seminorm = 0.0;      // Gagliardo seminorm of u^eps, exponent p
  int iterations = 0;
  double residual = 0.0;
  double wall_ms = 0.0;
  double norm_u = 0.0;        // discrete L2 norm of u^eps
  // Weighted energy identity pieces (non-symmetric case, zero elsewhere):
  // lhs = jump energy + killing + mass terms against the cell weight p0,
  // rhs = -sum p0 u f, zeroint = the u^2-weighted adjoint residual of p0.
  double energy_lhs = 0.0;
  double energy_rhs = 0.0;
  double zeroint = 0.0;
};

struct SweepReport {
  int dim = 1;
  double alpha = 0.0;
  double gamma = 1.0;
  double m = 1.0;
  double p = 2.0;
  std::string case_name;
  Grid grid;
  int threads = 1;
  double lambda_eff = 0.0;       // constant effective kernel (0 when varying)
  double f_eff_value = 0.0;      // limit functional at u0 (weighted cases)
  double norm_f = 0.0;           // discrete L2 norm of f
  double norm_u0 = 0.0;          // discrete L2 norm of the effective solution
  double resolvent_bound = 0.0;  // (gamma^2 / m) |f|_2
  double fitted_rate = 0.0;      // log-log slope of mean error vs eps
  bool rate_fitted = false;
  std::vector<double> mean_errors;  // per eps, averaged over seeds
  std::vector<SweepRecord> records;
  std::vector<double> u_eff;        // effective solution cell values
};

// Rejects configs run_sweep would refuse (bad eps ladder, refine, m, p,
// r_dom, missing source) without solving anything.
void validate_config(const SweepConfig& config);

SweepReport run_sweep(const SweepConfig& config);

// Minimum values of the scale-ladder quadratic functionals against the limit
// functional, for the product periodic case.
struct GammaReport {
  std::vector<double> eps_list;
  std::vector<double> f_eps;        // functional at its minimizer u^eps
  std::vector<double> f_eps_at_u0;  // functional at the competitor u0
  double f_eff = 0.0;               // limit functional at u0
};

GammaReport gamma_values(const SweepConfig& config);

// Spatial kernel averages over a box against the probabilistic mean.
struct ErgodicReport {
  std::vector<double> eps_list;
  double target = 0.0;                          // mean of the limit kernel
  std::vector<std::vector<double>> deviations;  // [eps][seed]
  std::vector<double> mean_deviation;           // per eps
};

ErgodicReport ergodic_average_check(const KernelModel& model, const Box& q,
                                    const std::vector<double>& eps_list,
                                    const std::vector<uint64_t>& seeds);

// Least-squares slope of log(error) against log(eps).
double estimate_rate(const std::vector<double>& errors,
                     const std::vector<double>& eps_list);

// Pinned table schema:
// eps,seed,rel_l2_error,gamma_value,seminorm,iters,residual,wall_ms
void write_sweep_csv(const std::string& path, const SweepReport& report);

}  // namespace levyhom
