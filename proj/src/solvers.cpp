#include "levyhom/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "levyhom/errors.hpp"
#include "levyhom/linalg.hpp"
#include "levyhom/matrix_io.hpp"

namespace levyhom {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double wdot(const DiscreteOperator& op, std::span<const double> a,
            std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += op.nu_at(static_cast<int>(i)) * a[i] * b[i];
  return s;
}

std::vector<double> resolvent_apply(const DiscreteOperator& op, double m,
                                    std::span<const double> u) {
  std::vector<double> out = apply_op(op, u);
  for (size_t i = 0; i < out.size(); ++i) out[i] = m * u[i] - out[i];
  return out;
}

std::vector<double> residual_vec(const DiscreteOperator& op, double m,
                                 std::span<const double> f,
                                 std::span<const double> u) {
  std::vector<double> r = resolvent_apply(op, m, u);
  for (size_t i = 0; i < r.size(); ++i) r[i] = f[i] - r[i];
  return r;
}

[[noreturn]] void iteration_cap(const std::string& method, int iters, double rel) {
  throw NumericError(method + " did not reach the tolerance after " +
                     std::to_string(iters) + " iterations (relative residual " +
                     format_double(rel) + ")");
}

// Damped Jacobi sweep; converges because the stencil is monotone and the
// diagonal m + row mass + kappa strictly dominates the row.
void richardson(const DiscreteOperator& op, double m, std::span<const double> f,
                SolveResult& res, double tol_abs, int max_iter) {
  const int n = op.n();
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = m + op.row_sum[i] + op.kappa[i];
  while (res.iterations < max_iter) {
    std::vector<double> r = residual_vec(op, m, f, res.u);
    const double rn = norm2(r);
    if (rn <= tol_abs) return;
    for (int i = 0; i < n; ++i) res.u[i] += r[i] / diag[i];
    ++res.iterations;
  }
  std::vector<double> r = residual_vec(op, m, f, res.u);
  if (norm2(r) <= tol_abs) return;
  iteration_cap("the damped fallback iteration", res.iterations,
                norm2(r) / std::max(tol_abs, 1e-300));
}

void weighted_cg(const DiscreteOperator& op, double m, std::span<const double> f,
                 SolveResult& res, double tol_abs, int max_iter) {
  const int n = op.n();
  std::vector<double> r(f.begin(), f.end());
  std::vector<double> p = r;
  double rr = wdot(op, r, r);
  while (res.iterations < max_iter) {
    if (norm2(r) <= tol_abs) {
      // Confirm against the true residual before accepting.
      r = residual_vec(op, m, f, res.u);
      if (norm2(r) <= tol_abs) return;
      p = r;
      rr = wdot(op, r, r);
    }
    std::vector<double> ap = resolvent_apply(op, m, p);
    const double pap = wdot(op, p, ap);
    if (!(pap > 0.0)) {
      throw NumericError("conjugate iteration lost positive definiteness");
    }
    const double a = rr / pap;
    for (int i = 0; i < n; ++i) {
      res.u[i] += a * p[i];
      r[i] -= a * ap[i];
    }
    ++res.iterations;
    const double rr_new = wdot(op, r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  if (norm2(residual_vec(op, m, f, res.u)) <= tol_abs) return;
  iteration_cap("the conjugate iteration", res.iterations,
                norm2(residual_vec(op, m, f, res.u)) / std::max(tol_abs, 1e-300));
}

void bicgstab(const DiscreteOperator& op, double m, std::span<const double> f,
              SolveResult& res, double tol_abs, int max_iter) {
  const int n = op.n();
  std::vector<double> r(f.begin(), f.end());
  const std::vector<double> rhat = r;
  std::vector<double> p(n, 0.0), v(n, 0.0);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  while (res.iterations < max_iter) {
    if (norm2(r) <= tol_abs) {
      r = residual_vec(op, m, f, res.u);
      if (norm2(r) <= tol_abs) return;
    }
    const double rho_new = dot(rhat, r);
    if (std::abs(rho_new) < 1e-280 || std::abs(omega) < 1e-280) {
      richardson(op, m, f, res, tol_abs, max_iter * 10);
      res.method = "richardson";
      return;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    v = resolvent_apply(op, m, p);
    alpha = rho_new / dot(rhat, v);
    std::vector<double> s = r;
    for (int i = 0; i < n; ++i) s[i] -= alpha * v[i];
    std::vector<double> t = resolvent_apply(op, m, s);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (int i = 0; i < n; ++i) {
      res.u[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    ++res.iterations;
  }
  if (norm2(residual_vec(op, m, f, res.u)) <= tol_abs) return;
  iteration_cap("the stabilized iteration", res.iterations,
                norm2(residual_vec(op, m, f, res.u)) / std::max(tol_abs, 1e-300));
}

}  // namespace

SolveResult solve_resolvent(const DiscreteOperator& op, double m,
                            std::span<const double> f, const SolveOptions& opt) {
  if (!(m > 0.0)) throw ConfigError("the resolvent mass must be positive");
  if (static_cast<int>(f.size()) != op.n()) {
    throw ConfigError("data vector does not match the grid");
  }
  if (!(opt.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  const auto start = Clock::now();
  SolveResult res;
  res.u.assign(op.n(), 0.0);
  const double fn = norm2(f);
  if (fn == 0.0) {
    res.method = "trivial";
    res.wall_ms = elapsed_ms(start);
    return res;
  }
  const double tol_abs = opt.tol * fn;
  const bool can_symmetrize = op.symmetric || op.weighted;
  if (can_symmetrize) {
    res.method = "cg";
    weighted_cg(op, m, f, res, tol_abs,
                opt.max_iterations > 0 ? opt.max_iterations : 10000);
  } else {
    res.method = "bicgstab";
    bicgstab(op, m, f, res, tol_abs,
             opt.max_iterations > 0 ? opt.max_iterations : 10000);
  }
  res.residual = norm2(residual_vec(op, m, f, res.u)) / fn;
  res.wall_ms = elapsed_ms(start);
  return res;
}

double phi_p(double t, double p) {
  if (t == 0.0) return 0.0;
  const double mag = std::pow(std::abs(t), p - 1.0);
  return t > 0.0 ? mag : -mag;
}

std::vector<double> apply_plaplace(const DiscreteOperator& op, double p,
                                   std::span<const double> u) {
  if (!(p > 1.0)) throw ConfigError("the jump exponent must exceed 1");
  const int n = op.n();
  if (static_cast<int>(u.size()) != n) {
    throw ConfigError("data vector does not match the grid");
  }
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = op.w.data() + static_cast<size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (row[j] != 0.0) s += row[j] * phi_p(u[j] - u[i], p);
    }
    out[i] = s - op.kappa[i] * phi_p(u[i], p);
  }
  return out;
}

double objective_value(const DiscreteOperator& op, double m, double p,
                       std::span<const double> f, std::span<const double> u) {
  if (!(p > 1.0)) throw ConfigError("the energy exponent must exceed 1");
  const int n = op.n();
  if (static_cast<int>(u.size()) != n || static_cast<int>(f.size()) != n) {
    throw ConfigError("data vector does not match the grid");
  }
  double jumps = 0.0, lower = 0.0;
  for (int i = 0; i < n; ++i) {
    const double nui = op.nu_at(i);
    const double* row = op.w.data() + static_cast<size_t>(i) * n;
    double rowsum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (row[j] != 0.0) rowsum += row[j] * std::pow(std::abs(u[j] - u[i]), p);
    }
    jumps += nui * rowsum;
    lower += nui * ((op.kappa[i] + m) / p * std::pow(std::abs(u[i]), p) + f[i] * u[i]);
  }
  const double hd = std::pow(op.grid.h, op.grid.dim);
  return hd * (jumps / (2.0 * p) + lower);
}

SolveResult solve_plaplace(const DiscreteOperator& op, double m, double p,
                           std::span<const double> f, const SolveOptions& opt) {
  if (!(m > 0.0)) throw ConfigError("the resolvent mass must be positive");
  if (!(p > 1.0)) throw ConfigError("the jump exponent must exceed 1");
  if (static_cast<int>(f.size()) != op.n()) {
    throw ConfigError("data vector does not match the grid");
  }
  if (!op.weighted && !op.symmetric) {
    throw NumericError(
        "the variational solver needs a symmetric or weight-balanced kernel");
  }
  const auto start = Clock::now();
  const int n = op.n();
  SolveResult res;
  res.method = "descent";
  res.u.assign(n, 0.0);
  res.objective = objective_value(op, m, p, f, res.u);
  res.objective_trace.push_back(res.objective);
  const double fn = norm2(f);
  if (fn == 0.0) {
    res.wall_ms = elapsed_ms(start);
    return res;
  }
  const int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 100000;

  // Local curvature of t -> |t|^p, floored for p < 2 where it blows up at 0.
  const auto curvature = [p](double t) {
    if (p == 2.0) return 1.0;
    double s = std::abs(t);
    if (p < 2.0 && s < 1e-12) s = 1e-12;
    return (p - 1.0) * std::pow(s, p - 2.0);
  };

  // Assembles the damped Hessian of the energy at the current iterate and
  // factors it. tau = 0 is the plain Newton system; tau > 0 blends in the
  // quadratic operator, which keeps the system regular when every jump of
  // the iterate vanishes.
  std::vector<double> a(static_cast<size_t>(n) * n);
  const auto factor_hessian = [&](double tau) {
    for (int i = 0; i < n; ++i) {
      const double* row = op.w.data() + static_cast<size_t>(i) * n;
      double* arow = a.data() + static_cast<size_t>(i) * n;
      double diag = (op.kappa[i] + m) * curvature(res.u[i]) +
                    tau * (m + op.row_sum[i] + op.kappa[i]);
      for (int j = 0; j < n; ++j) {
        if (row[j] != 0.0) {
          const double wt = row[j] * curvature(res.u[j] - res.u[i]);
          arow[j] = -wt - tau * row[j];
          diag += wt;
        } else {
          arow[j] = 0.0;
        }
      }
      arow[i] = diag;
    }
    return lu_factor(a, n);
  };

  const double hd = std::pow(op.grid.h, op.grid.dim);
  while (res.iterations < max_iter) {
    const std::vector<double> lp = apply_plaplace(op, p, res.u);
    std::vector<double> grad(n);  // unweighted energy gradient
    for (int i = 0; i < n; ++i) grad[i] = f[i] + m * phi_p(res.u[i], p) - lp[i];
    res.residual = norm2(grad) / fn;
    if (res.residual <= opt.tol) {
      res.wall_ms = elapsed_ms(start);
      return res;
    }
    std::vector<double> dir;
    try {
      dir = lu_solve(factor_hessian(0.0), grad);
    } catch (const NumericError&) {
      dir = lu_solve(factor_hessian(1.0), grad);
    }
    auto slope_of = [&](const std::vector<double>& d) {
      double s = 0.0;  // derivative of J(u - t d) at t = 0
      for (int i = 0; i < n; ++i) s -= op.nu_at(i) * grad[i] * d[i];
      return s * hd;
    };
    double slope = slope_of(dir);
    if (!(slope < 0.0)) {
      dir = lu_solve(factor_hessian(1.0), grad);
      slope = slope_of(dir);
      if (!(slope < 0.0)) {
        throw NumericError("the newton direction is not a descent direction");
      }
    }
    double t = 1.0;
    bool accepted = false;
    std::vector<double> trial(n);
    while (t >= 1e-14) {
      for (int i = 0; i < n; ++i) trial[i] = res.u[i] - t * dir[i];
      const double jt = objective_value(op, m, p, f, trial);
      if (jt <= res.objective + 1e-4 * t * slope) {
        res.u.swap(trial);
        res.objective = jt;
        res.objective_trace.push_back(jt);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      throw NumericError("the line search found no energy decrease");
    }
    ++res.iterations;
  }
  iteration_cap("the descent iteration", res.iterations, res.residual / opt.tol);
}

}  // namespace levyhom
