#include "levyhom/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include "levyhom/effective.hpp"
#include "levyhom/errors.hpp"
#include "levyhom/fields.hpp"
#include "levyhom/parallel.hpp"
#include "levyhom/solvers.hpp"

namespace levyhom {

namespace {

template <class Fn>
auto with_context(const std::string& label, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(label + e.what());
  } catch (const NumericError& e) {
    throw NumericError(label + e.what());
  } catch (const IoError& e) {
    throw IoError(label + e.what());
  }
}

std::string scale_label(double eps, uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "eps %.17g seed %llu: ", eps,
                static_cast<unsigned long long>(seed));
  return buf;
}

double l2_norm(const std::vector<double>& v, double hd) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(hd * s);
}

double relative_p_error(const std::vector<double>& u, const std::vector<double>& ref,
                        double p) {
  double num = 0.0;
  double den = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    num += std::pow(std::abs(u[i] - ref[i]), p);
    den += std::pow(std::abs(ref[i]), p);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : HUGE_VAL;
  return std::pow(num / den, 1.0 / p);
}

// Quadratic functional whose minimizer solves (L - m) u = f: the energy form
// of the operator plus the nu-weighted mass and data terms.
double quadratic_functional(const DiscreteOperator& op, double m,
                            const std::vector<double>& f,
                            const std::vector<double>& u) {
  double lower = 0.0;
  for (int i = 0; i < op.n(); ++i) {
    lower += op.nu_at(i) * (m * u[i] * u[i] + 2.0 * f[i] * u[i]);
  }
  const double hd = std::pow(op.grid.h, op.grid.dim);
  return hd * (energy_form(op, u, u) + lower);
}

struct EffectiveSetup {
  BoundKernel kernel;
  double lambda_eff = 0.0;  // 0 when the effective kernel varies in space
  double rho_bar = 1.0;     // mean of the symmetrizing weight
  bool constant = false;
};

EffectiveSetup effective_setup(const KernelModel& model, double override_value) {
  EffectiveSetup s;
  if (const auto* k = std::get_if<P1Kernel>(&model.k)) {
    s.lambda_eff = effective_p1(k->lambda, k->mu);
    s.rho_bar = cell_average_ratio(k->mu, k->lambda);
    s.constant = true;
  } else if (const auto* k = std::get_if<Q1Kernel>(&model.k)) {
    s.lambda_eff = effective_q1(k->lambda_spec, k->mu_spec);
    const double mu_mean = field_expectation(k->mu_spec);
    s.rho_bar = mu_mean * mu_mean / s.lambda_eff;
    s.constant = true;
  } else if (const auto* k = std::get_if<P2Kernel>(&model.k)) {
    double mean = 0.0;
    for (double v : k->lper.v) mean += v;
    mean /= static_cast<double>(k->lper.v.size());
    const MacroRule a = k->a;
    const int dim = model.dim;
    s.kernel = bind_macro_kernel(
        [a, mean, dim](const Pt& x, const Pt& y) { return a.eval(dim, x, y) * mean; },
        model.gamma);
  } else if (std::get_if<Q2Kernel>(&model.k)) {
    const KernelModel local = model;
    s.kernel = bind_macro_kernel(
        [local](const Pt& x, const Pt& y) { return effective_q2(local, x, y); },
        model.gamma);
  } else {
    const auto* k = std::get_if<NonSymKernel>(&model.k);
    const CellOperatorDiscretization disc =
        make_cell_operator(k->lper, model.alpha, model.gamma);
    s.lambda_eff = principal_eigenfunction(disc).lambda_eff;
    s.constant = true;
    s.rho_bar = 0.0;
  }
  if (override_value != 0.0) {
    if (!(override_value > 0.0) || !std::isfinite(override_value)) {
      throw ConfigError("the kernel override must be a positive number");
    }
    if (!s.constant) {
      throw ConfigError("a kernel override needs a constant effective kernel");
    }
    s.lambda_eff = override_value;
  }
  if (s.constant) s.kernel = bind_constant_kernel(s.lambda_eff);
  return s;
}

SolveResult solve_equation(const DiscreteOperator& op, double m, double p,
                           const std::vector<double>& f, const SolveOptions& opt) {
  if (p == 2.0) {
    std::vector<double> g(f.size());
    for (size_t i = 0; i < f.size(); ++i) g[i] = -f[i];
    return solve_resolvent(op, m, g, opt);
  }
  return solve_plaplace(op, m, p, f, opt);
}

// Samples the periodic table of the non-symmetric case at the torus
// positions actually visited by the grid, one scale at a time, and solves the
// matching cell problem.  Cell a pairs with every grid cell congruent to a
// modulo the period, so the sampled weight transfers back by index.
std::vector<double> cell_weight_on_grid(const KernelModel& model, const Grid& grid,
                                        double eps) {
  const auto* k = std::get_if<NonSymKernel>(&model.k);
  const double ratio = eps / grid.h;
  const int n_cell = static_cast<int>(std::llround(ratio));
  if (n_cell < 1 || std::abs(ratio - n_cell) > 1e-9 * ratio) {
    throw ConfigError(
        "each eps must be an integer multiple of the grid step for the "
        "weighted identity");
  }
  std::vector<double> pos(static_cast<size_t>(n_cell));
  for (int a = 0; a < n_cell; ++a) {
    pos[a] = frac01((-grid.r_dom + (a + 0.5) * grid.h) / eps);
  }
  const auto node = [&](int c) {
    if (model.dim == 1) return Pt{pos[static_cast<size_t>(c)], 0.0};
    return Pt{pos[static_cast<size_t>(c / n_cell)], pos[static_cast<size_t>(c % n_cell)]};
  };
  const int size = model.dim == 1 ? n_cell : n_cell * n_cell;
  std::vector<double> entries(static_cast<size_t>(size) * size);
  for (int ci = 0; ci < size; ++ci) {
    for (int cj = 0; cj < size; ++cj) {
      entries[static_cast<size_t>(ci) * size + cj] = k->lper.value_at(node(ci), node(cj));
    }
  }
  KernelTable sampled = make_kernel_table(model.dim, n_cell, std::move(entries));
  const CellOperatorDiscretization disc =
      make_cell_operator(sampled, model.alpha, model.gamma);
  const CellSolution sol = principal_eigenfunction(disc);

  std::vector<double> p0g(static_cast<size_t>(grid.cell_count()));
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (model.dim == 1) {
      p0g[i] = sol.p0.samples[i % n_cell];
    } else {
      const int ia = (i / grid.m) % n_cell;
      const int ib = (i % grid.m) % n_cell;
      p0g[i] = sol.p0.samples[static_cast<size_t>(ia) * n_cell + ib];
    }
  }
  return p0g;
}

// Transcribes the weighted energy identity of the non-symmetric case: testing
// the solved equation with p0 u gives
//   (1/2) sum_ij W_ij p0_i (u_j - u_i)^2 + sum_i (kappa_i + m) p0_i u_i^2
//     = - sum_i p0_i u_i f_i + (1/2) sum_i u_i^2 z_i
// where z_i = sum_j (W_ji p0_j - W_ij p0_i) is the adjoint residual of p0 on
// the grid (zero in the continuum).  All terms carry the cell volume.
void energy_identity(const DiscreteOperator& op, const std::vector<double>& p0g,
                     const std::vector<double>& f, const std::vector<double>& u,
                     double m, SweepRecord* rec) {
  const int n = op.n();
  std::vector<double> colp(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const double* row = op.w.data() + static_cast<size_t>(j) * n;
    for (int i = 0; i < n; ++i) colp[i] += row[i] * p0g[j];
  }
  double jump = 0.0;
  double lower = 0.0;
  double rhs = 0.0;
  double zero = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = op.w.data() + static_cast<size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double d = u[j] - u[i];
      s += row[j] * d * d;
    }
    jump += p0g[i] * s;
    lower += (op.kappa[i] + m) * p0g[i] * u[i] * u[i];
    rhs += p0g[i] * u[i] * f[i];
    zero += u[i] * u[i] * (colp[i] - op.row_sum[i] * p0g[i]);
  }
  const double hd = std::pow(op.grid.h, op.grid.dim);
  rec->energy_lhs = hd * (0.5 * jump + lower);
  rec->energy_rhs = -hd * rhs;
  rec->zeroint = hd * 0.5 * zero;
}

}  // namespace

void validate_config(const SweepConfig& config) {
  if (config.eps_list.empty()) throw ConfigError("the eps list is empty");
  double prev = HUGE_VAL;
  for (double e : config.eps_list) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw ConfigError("every eps must be a positive number");
    }
    if (!(e < prev)) throw ConfigError("the eps list must be strictly decreasing");
    prev = e;
  }
  if (config.refine < 8) {
    throw ConfigError("the grid must resolve the finest scale with at least eight cells");
  }
  if (!(config.m > 0.0)) throw ConfigError("the mass term must be positive");
  if (!(config.p > 1.0)) throw ConfigError("the energy exponent must exceed 1");
  if (!(config.r_dom > 0.0)) throw ConfigError("the box half-width must be positive");
  if (!config.f) throw ConfigError("no source function was provided");
}

std::function<double(const Pt&)> bump_source(int dim, double radius, double height) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
  if (!(radius > 0.0)) throw ConfigError("the bump radius must be positive");
  return [dim, radius, height](const Pt& x) {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
    r2 /= radius * radius;
    if (r2 >= 1.0) return 0.0;
    return height * std::exp(1.0 - 1.0 / (1.0 - r2));
  };
}

SweepReport run_sweep(const SweepConfig& config) {
  validate_config(config);
  const KernelModel& model = config.model;

  SweepReport report;
  report.dim = model.dim;
  report.alpha = model.alpha;
  report.gamma = model.gamma;
  report.m = config.m;
  report.p = config.p;
  report.case_name = model.case_name();
  report.threads = thread_budget();

  const double eps_min = config.eps_list.back();
  report.grid = build_grid(model.dim, config.r_dom, eps_min / config.refine);
  const Grid& grid = report.grid;
  const int n = grid.cell_count();
  const double hd = std::pow(grid.h, grid.dim);

  std::vector<double> f(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f[i] = config.f(grid.center(i));
  report.norm_f = l2_norm(f, hd);
  report.resolvent_bound = model.gamma * model.gamma / config.m * report.norm_f;

  SolveOptions opt;
  opt.tol = config.tol > 0.0 ? config.tol : (config.p == 2.0 ? 1e-8 : 1e-6);
  opt.max_iterations = config.max_iterations;

  const EffectiveSetup eff =
      with_context("effective kernel: ",
                   [&] { return effective_setup(model, config.kernel_override); });
  report.lambda_eff = eff.lambda_eff;

  const DiscreteOperator op_eff = assemble(eff.kernel, model.alpha, grid, config.r_near);
  const SolveResult sol0 = with_context(
      "effective problem: ", [&] { return solve_equation(op_eff, config.m, config.p, f, opt); });
  report.u_eff = sol0.u;
  report.norm_u0 = l2_norm(sol0.u, hd);

  const bool has_gamma =
      config.p == 2.0 && (model.has_weight() || model.is_symmetric());
  if (has_gamma) {
    report.f_eff_value =
        eff.rho_bar * quadratic_functional(op_eff, config.m, f, sol0.u);
  }

  const bool nonsym = std::get_if<NonSymKernel>(&model.k) != nullptr;
  std::vector<std::vector<double>> p0_per_eps;
  if (nonsym) {
    p0_per_eps.reserve(config.eps_list.size());
    for (double eps : config.eps_list) {
      p0_per_eps.push_back(with_context(scale_label(eps, 0),
                                        [&] { return cell_weight_on_grid(model, grid, eps); }));
    }
  }

  const DiscreteOperator unit_op = unit_kernel_operator(grid, model.alpha);

  std::vector<uint64_t> seeds = config.seeds;
  if (!model.is_random() || seeds.empty()) seeds.assign(1, 0);
  const int n_eps = static_cast<int>(config.eps_list.size());
  const int n_tasks = static_cast<int>(seeds.size()) * n_eps;
  report.records.assign(static_cast<size_t>(n_tasks), SweepRecord{});

  parallel_blocks(n_tasks, [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      const uint64_t seed = seeds[static_cast<size_t>(t / n_eps)];
      const int eps_idx = t % n_eps;
      const double eps = config.eps_list[static_cast<size_t>(eps_idx)];
      SweepRecord& rec = report.records[static_cast<size_t>(t)];
      rec.eps = eps;
      rec.seed = seed;

      const Realization rz{seed};
      const BoundKernel bk =
          bind_kernel(model, eps, model.is_random() ? &rz : nullptr);
      const DiscreteOperator op = assemble(bk, model.alpha, grid, config.r_near);
      const SolveResult sol = with_context(
          scale_label(eps, seed),
          [&] { return solve_equation(op, config.m, config.p, f, opt); });

      rec.rel_error = relative_p_error(sol.u, sol0.u, config.p);
      rec.iterations = sol.iterations;
      rec.residual = sol.residual;
      rec.wall_ms = sol.wall_ms;
      rec.norm_u = l2_norm(sol.u, hd);
      rec.seminorm = fractional_seminorm_p(unit_op, sol.u, config.p);
      if (has_gamma) {
        rec.gamma_value = quadratic_functional(op, config.m, f, sol.u);
        rec.gamma_value_u0 = quadratic_functional(op, config.m, f, sol0.u);
      }
      if (nonsym) {
        energy_identity(op, p0_per_eps[static_cast<size_t>(eps_idx)], f, sol.u,
                        config.m, &rec);
      }
    }
  });

  report.mean_errors.assign(static_cast<size_t>(n_eps), 0.0);
  for (int t = 0; t < n_tasks; ++t) {
    report.mean_errors[static_cast<size_t>(t % n_eps)] += report.records[t].rel_error;
  }
  for (double& e : report.mean_errors) e /= static_cast<double>(seeds.size());

  if (n_eps >= 3 &&
      std::all_of(report.mean_errors.begin(), report.mean_errors.end(),
                  [](double e) { return e > 0.0; })) {
    report.fitted_rate = estimate_rate(report.mean_errors, config.eps_list);
    report.rate_fitted = true;
  }
  return report;
}

GammaReport gamma_values(const SweepConfig& config) {
  if (!std::get_if<P1Kernel>(&config.model.k)) {
    throw ConfigError("minimum-value comparisons need the product periodic case");
  }
  if (config.p != 2.0) {
    throw ConfigError("minimum-value comparisons need the quadratic exponent");
  }
  const SweepReport report = run_sweep(config);
  GammaReport g;
  g.eps_list = config.eps_list;
  g.f_eff = report.f_eff_value;
  g.f_eps.reserve(report.records.size());
  for (const SweepRecord& rec : report.records) {
    g.f_eps.push_back(rec.gamma_value);
    g.f_eps_at_u0.push_back(rec.gamma_value_u0);
  }
  return g;
}

ErgodicReport ergodic_average_check(const KernelModel& model, const Box& q,
                                    const std::vector<double>& eps_list,
                                    const std::vector<uint64_t>& seeds) {
  const bool q1 = std::get_if<Q1Kernel>(&model.k) != nullptr;
  const bool q2 = std::get_if<Q2Kernel>(&model.k) != nullptr;
  if (!q1 && !q2) throw ConfigError("spatial averaging applies to the random cases");
  if (q.dim != model.dim) throw ConfigError("box/model dimension mismatch");
  for (int k = 0; k < q.dim; ++k) {
    if (!(q.hi[k] > q.lo[k])) throw ConfigError("the box must have positive volume");
  }
  if (eps_list.empty()) throw ConfigError("the eps list is empty");
  for (double e : eps_list) {
    if (!(e > 0.0)) throw ConfigError("every eps must be a positive number");
  }
  if (seeds.size() < 10) throw ConfigError("at least ten seeds are required");

  ErgodicReport report;
  report.eps_list = eps_list;
  report.deviations.resize(eps_list.size());
  report.mean_deviation.assign(eps_list.size(), 0.0);

  // Midpoint nodes per axis; the second grid is one cell finer so the two
  // sampling lattices never lock onto a shared pattern of the environment.
  const auto nodes = [&](double eps, int extra) {
    double side = 0.0;
    for (int k = 0; k < q.dim; ++k) side = std::max(side, q.hi[k] - q.lo[k]);
    const int cap = model.dim == 1 ? 4096 : 48;
    const int per_axis =
        std::clamp(static_cast<int>(std::ceil(8.0 * side / eps)), 16, cap) + extra;
    std::vector<Pt> pts;
    if (model.dim == 1) {
      pts.reserve(static_cast<size_t>(per_axis));
      const double dx = (q.hi[0] - q.lo[0]) / per_axis;
      for (int i = 0; i < per_axis; ++i) {
        pts.push_back(Pt{q.lo[0] + (i + 0.5) * dx, 0.0});
      }
    } else {
      pts.reserve(static_cast<size_t>(per_axis) * per_axis);
      const double dx = (q.hi[0] - q.lo[0]) / per_axis;
      const double dy = (q.hi[1] - q.lo[1]) / per_axis;
      for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
          pts.push_back(Pt{q.lo[0] + (i + 0.5) * dx, q.lo[1] + (j + 0.5) * dy});
        }
      }
    }
    return pts;
  };

  // Probabilistic mean of the kernel, separately in each argument.
  double target_sum = 0.0;
  {
    const std::vector<Pt> xs = nodes(eps_list.back(), 0);
    const std::vector<Pt> ys = nodes(eps_list.back(), 1);
    if (q1) {
      const auto* k = std::get_if<Q1Kernel>(&model.k);
      target_sum = field_expectation(k->lambda_spec) * field_expectation(k->mu_spec);
    } else {
      double s = 0.0;
      for (const Pt& x : xs) {
        for (const Pt& y : ys) s += effective_q2(model, x, y);
      }
      target_sum = s / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
    }
  }
  report.target = target_sum;

  for (size_t ei = 0; ei < eps_list.size(); ++ei) {
    const double eps = eps_list[ei];
    const std::vector<Pt> xs = nodes(eps, 0);
    const std::vector<Pt> ys = nodes(eps, 1);
    report.deviations[ei].resize(seeds.size());
    parallel_blocks(static_cast<int>(seeds.size()), [&](int lo, int hi) {
      for (int s = lo; s < hi; ++s) {
        const Realization rz{seeds[static_cast<size_t>(s)]};
        double sum = 0.0;
        for (const Pt& x : xs) {
          for (const Pt& y : ys) sum += eval_kernel(model, eps, x, y, &rz);
        }
        sum /= static_cast<double>(xs.size()) * static_cast<double>(ys.size());
        report.deviations[ei][static_cast<size_t>(s)] = std::abs(sum - report.target);
      }
    });
    double mean = 0.0;
    for (double d : report.deviations[ei]) mean += d;
    report.mean_deviation[ei] = mean / static_cast<double>(seeds.size());
  }
  return report;
}

double estimate_rate(const std::vector<double>& errors,
                     const std::vector<double>& eps_list) {
  if (errors.size() != eps_list.size()) {
    throw ConfigError("errors and eps lists differ in length");
  }
  if (errors.size() < 3) throw ConfigError("rate fits need at least three points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(errors.size());
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0)) throw ConfigError("rate fits need positive errors");
    if (!(eps_list[i] > 0.0)) throw ConfigError("rate fits need positive eps");
    const double x = std::log(eps_list[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  if (denom <= 1e-12 * std::max(1.0, count * sxx)) {
    throw ConfigError("rate fits need distinct eps values");
  }
  return (count * sxy - sx * sy) / denom;
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "eps,seed,rel_l2_error,gamma_value,seminorm,iters,residual,wall_ms\n";
  char buf[256];
  for (const SweepRecord& rec : report.records) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n",
                  rec.eps, static_cast<unsigned long long>(rec.seed), rec.rel_error,
                  rec.gamma_value, rec.seminorm, rec.iterations, rec.residual,
                  rec.wall_ms);
    out << buf;
  }
  if (!out.good()) throw IoError("cannot write " + path);
}

}  // namespace levyhom
