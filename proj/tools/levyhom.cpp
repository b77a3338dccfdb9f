#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "levyhom/config.hpp"
#include "levyhom/effective.hpp"
#include "levyhom/errors.hpp"
#include "levyhom/experiments.hpp"
#include "levyhom/fields.hpp"
#include "levyhom/kernels.hpp"
#include "levyhom/matrix_io.hpp"
#include "levyhom/operator.hpp"
#include "levyhom/parallel.hpp"
#include "levyhom/solvers.hpp"

using namespace levyhom;

namespace {

using nlohmann::json;

struct CliFlags {
  std::string config;
  std::string out;
  long long seed = -1;
  int threads = 0;
  bool quiet = false;
};

void emit_error(const char* type, const std::string& message) {
  const json e{{"error", json{{"type", type}, {"message", message}}}};
  std::fprintf(stderr, "%s\n", e.dump().c_str());
}

RunConfig load_with_overrides(const CliFlags& fl) {
  RunConfig rc = load_run_config(fl.config);
  json echo = json::parse(rc.echo);
  if (!fl.out.empty()) {
    rc.out = fl.out;
    echo["out"] = fl.out;
  }
  if (fl.seed >= 0) {
    rc.seed = static_cast<uint64_t>(fl.seed);
    rc.sweep.seeds = {rc.seed};
    echo["seed"] = rc.seed;
    echo["seeds"] = std::vector<uint64_t>{rc.seed};
  }
  rc.echo = echo.dump(2);
  return rc;
}

std::string out_file(const RunConfig& rc, const char* name) {
  std::error_code ec;
  std::filesystem::create_directories(rc.out, ec);
  if (ec) throw IoError("cannot create output directory " + rc.out);
  return (std::filesystem::path(rc.out) / name).string();
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << "\n";
  if (!out.good()) throw IoError("cannot write " + path);
}

// The cell problem runs on the periodic microstructure: the stored table for
// the locally periodic and non-symmetric cases, the product of the two
// fields for the product case.  table_n > 0 resamples to that resolution.
KernelTable cell_table(const RunConfig& rc) {
  const KernelModel& model = rc.sweep.model;
  if (const auto* k = std::get_if<NonSymKernel>(&model.k)) {
    if (rc.table_n <= 0 || rc.table_n == k->lper.n) return k->lper;
    const KernelTable& t = k->lper;
    return make_kernel_table(model.dim, rc.table_n,
                             [&t](const Pt& z, const Pt& e) { return t.value_at(z, e); });
  }
  if (const auto* k = std::get_if<P2Kernel>(&model.k)) {
    if (rc.table_n <= 0 || rc.table_n == k->lper.n) return k->lper;
    const KernelTable& t = k->lper;
    return make_kernel_table(model.dim, rc.table_n,
                             [&t](const Pt& z, const Pt& e) { return t.value_at(z, e); });
  }
  if (const auto* k = std::get_if<P1Kernel>(&model.k)) {
    const TorusField& lam = k->lambda;
    const TorusField& mu = k->mu;
    const int n = rc.table_n > 0 ? rc.table_n : std::max(lam.n, mu.n);
    return make_kernel_table(model.dim, n, [&](const Pt& z, const Pt& e) {
      return lam.value_at(z) * mu.value_at(e);
    });
  }
  throw ConfigError("cell problems need a periodic kernel (case p1, p2 or nonsym)");
}

CellSolution solve_cell(const RunConfig& rc, CellOperatorDiscretization* disc_out) {
  CellOperatorDiscretization disc =
      make_cell_operator(cell_table(rc), rc.sweep.model.alpha, rc.sweep.model.gamma,
                         rc.r_img, rc.lambda_shift);
  CellSolution sol = principal_eigenfunction(
      disc, rc.sweep.tol > 0.0 ? rc.sweep.tol : 1e-12);
  if (disc_out != nullptr) *disc_out = std::move(disc);
  return sol;
}

double effective_value(const RunConfig& rc) {
  const KernelModel& model = rc.sweep.model;
  if (const auto* k = std::get_if<P1Kernel>(&model.k)) {
    return effective_p1(k->lambda, k->mu);
  }
  if (const auto* k = std::get_if<Q1Kernel>(&model.k)) {
    return effective_q1(k->lambda_spec, k->mu_spec);
  }
  if (std::holds_alternative<P2Kernel>(model.k)) {
    return effective_p2(model, Pt{0.0, 0.0}, Pt{0.0, 0.0});
  }
  if (std::holds_alternative<Q2Kernel>(model.k)) {
    return effective_q2(model, Pt{0.0, 0.0}, Pt{0.0, 0.0});
  }
  return solve_cell(rc, nullptr).lambda_eff;
}

int cmd_effective(const RunConfig& rc, const CliFlags&) {
  const double v = effective_value(rc);
  std::printf("lambda_eff = %s\n", format_double(v).c_str());
  const json rep{{"case", rc.case_tag},
                 {"lambda_eff", v},
                 {"config", json::parse(rc.echo)}};
  write_json(out_file(rc, "effective.json"), rep);
  return 0;
}

int cmd_cell(const RunConfig& rc, const CliFlags& fl) {
  CellOperatorDiscretization disc;
  const CellSolution sol = solve_cell(rc, &disc);
  save_torus_field(out_file(rc, "p0.txt"), sol.p0);
  const json rep{{"case", rc.case_tag},
                 {"lambda_eff", sol.lambda_eff},
                 {"eigenvalue", sol.eigenvalue},
                 {"lambda_shift", disc.lambda_shift},
                 {"residual", sol.residual},
                 {"p_min", sol.p_min},
                 {"tail_bound", sol.tail_bound},
                 {"iterations", sol.iterations},
                 {"table_n", disc.n},
                 {"config", json::parse(rc.echo)}};
  write_json(out_file(rc, "cell.json"), rep);
  std::printf("lambda_eff = %s\n", format_double(sol.lambda_eff).c_str());
  if (!fl.quiet) {
    std::printf("eigenvalue %.12g (shift %.12g), residual %.3e, p_min %.6g\n",
                sol.eigenvalue, disc.lambda_shift, sol.residual, sol.p_min);
  }
  return 0;
}

int cmd_solve(const RunConfig& rc, const CliFlags& fl) {
  if (rc.sweep.eps_list.size() != 1) {
    throw ConfigError("solve needs exactly one eps value");
  }
  const KernelModel& model = rc.sweep.model;
  const double eps = rc.sweep.eps_list.front();
  if (rc.sweep.refine < 8) throw ConfigError("refine must be at least 8");
  const Grid grid = build_grid(model.dim, rc.sweep.r_dom, eps / rc.sweep.refine);
  const Realization real{rc.seed};
  const BoundKernel kernel =
      bind_kernel(model, eps, model.is_random() ? &real : nullptr);
  const DiscreteOperator op = assemble(kernel, model.alpha, grid, rc.sweep.r_near);

  const int n = grid.cell_count();
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = rc.sweep.f(grid.center(i));

  SolveOptions opt;
  opt.tol = rc.sweep.tol > 0.0 ? rc.sweep.tol : (rc.sweep.p == 2.0 ? 1e-8 : 1e-6);
  opt.max_iterations = rc.sweep.max_iterations;
  SolveResult res;
  if (rc.sweep.p == 2.0) {
    std::vector<double> g(f);
    for (double& v : g) v = -v;
    res = solve_resolvent(op, rc.sweep.m, g, opt);
  } else {
    res = solve_plaplace(op, rc.sweep.m, rc.sweep.p, f, opt);
  }

  const double hd = model.dim == 1 ? grid.h : grid.h * grid.h;
  double nu2 = 0.0;
  for (const double v : res.u) nu2 += v * v;
  const double norm_u = std::sqrt(hd * nu2);

  Matrix um;
  um.rows = model.dim == 1 ? 1 : grid.m;
  um.cols = grid.m;
  um.v = res.u;
  write_matrix(out_file(rc, "u.txt"), um);
  const json rep{{"case", rc.case_tag},
                 {"eps", eps},
                 {"seed", rc.seed},
                 {"method", res.method},
                 {"iterations", res.iterations},
                 {"residual", res.residual},
                 {"norm_u", norm_u},
                 {"cells", n},
                 {"config", json::parse(rc.echo)}};
  write_json(out_file(rc, "solve.json"), rep);
  if (!fl.quiet) {
    std::printf("solved eps = %g on %d cells: %d iterations, residual %.3e\n", eps, n,
                res.iterations, res.residual);
  }
  return 0;
}

json record_json(const SweepRecord& rec) {
  return json{{"eps", rec.eps},
              {"seed", rec.seed},
              {"rel_l2_error", rec.rel_error},
              {"gamma_value", rec.gamma_value},
              {"seminorm", rec.seminorm},
              {"iters", rec.iterations},
              {"residual", rec.residual}};
}

int cmd_sweep(const RunConfig& rc, const CliFlags& fl) {
  const SweepReport report = run_sweep(rc.sweep);
  write_sweep_csv(out_file(rc, "sweep.csv"), report);
  json records = json::array();
  for (const SweepRecord& rec : report.records) records.push_back(record_json(rec));
  json rep{{"case", report.case_name},
           {"dim", report.dim},
           {"alpha", report.alpha},
           {"gamma", report.gamma},
           {"m", report.m},
           {"p", report.p},
           {"lambda_eff", report.lambda_eff},
           {"f_eff_value", report.f_eff_value},
           {"norm_f", report.norm_f},
           {"norm_u0", report.norm_u0},
           {"resolvent_bound", report.resolvent_bound},
           {"eps", rc.sweep.eps_list},
           {"mean_errors", report.mean_errors},
           {"records", records},
           {"config", json::parse(rc.echo)}};
  if (report.rate_fitted) rep["fitted_rate"] = report.fitted_rate;
  write_json(out_file(rc, "sweep.json"), rep);
  if (!fl.quiet) {
    for (size_t i = 0; i < report.mean_errors.size(); ++i) {
      std::printf("eps %-10g mean rel error %.6g\n", rc.sweep.eps_list[i],
                  report.mean_errors[i]);
    }
    if (report.rate_fitted) std::printf("fitted rate %.3f\n", report.fitted_rate);
  }
  return 0;
}

int cmd_gamma(const RunConfig& rc, const CliFlags& fl) {
  const GammaReport g = gamma_values(rc.sweep);
  const json rep{{"case", rc.case_tag},
                 {"eps", g.eps_list},
                 {"f_eps", g.f_eps},
                 {"f_eps_at_u0", g.f_eps_at_u0},
                 {"f_eff", g.f_eff},
                 {"config", json::parse(rc.echo)}};
  write_json(out_file(rc, "gamma.json"), rep);
  if (!fl.quiet) {
    for (size_t i = 0; i < g.eps_list.size(); ++i) {
      std::printf("eps %-10g F_eps %.10g (at u0 %.10g)\n", g.eps_list[i], g.f_eps[i],
                  g.f_eps_at_u0[i]);
    }
    std::printf("F_eff %.10g\n", g.f_eff);
  }
  return 0;
}

int cmd_ergodic(const RunConfig& rc, const CliFlags& fl) {
  if (!rc.has_box) throw ConfigError("ergodic runs need a box");
  const ErgodicReport er =
      ergodic_average_check(rc.sweep.model, rc.box, rc.sweep.eps_list, rc.sweep.seeds);
  const json rep{{"case", rc.case_tag},
                 {"eps", er.eps_list},
                 {"target", er.target},
                 {"mean_deviation", er.mean_deviation},
                 {"deviations", er.deviations},
                 {"config", json::parse(rc.echo)}};
  write_json(out_file(rc, "ergodic.json"), rep);
  if (!fl.quiet) {
    for (size_t i = 0; i < er.eps_list.size(); ++i) {
      std::printf("eps %-10g mean deviation %.6g\n", er.eps_list[i],
                  er.mean_deviation[i]);
    }
    std::printf("target %.10g\n", er.target);
  }
  return 0;
}

int cmd_validate(const RunConfig& rc, const CliFlags& fl) {
  SweepConfig sweep = rc.sweep;
  // A config without a ladder still drives effective and cell runs.
  if (sweep.eps_list.empty()) sweep.eps_list = {1.0};
  validate_config(sweep);
  const KernelModel& model = rc.sweep.model;
  const EllipticityReport rep = check_ellipticity(model);
  if (!rep.pass) {
    throw ConfigError("kernel leaves the elliptic band: " + rep.violations.front());
  }
  if (rc.case_tag == "p2" || rc.case_tag == "q2") {
    const SymmetryReport sym = check_symmetry(model);
    if (!sym.pass) {
      throw ConfigError("kernel is not swap symmetric: " + sym.witness);
    }
  }
  if (!fl.quiet) std::printf("config ok\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective jump kernels and scale-ladder resolvent experiments for "
               "Levy-type operators"};
  app.fallthrough();
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 configuration error, 3 numerical error, "
             "4 I/O error.");

  CliFlags fl;
  app.add_option("--config", fl.config, "JSON config file")->required();
  app.add_option("--out", fl.out, "output directory (overrides the config)");
  app.add_option("--seed", fl.seed, "seed override for random cases");
  app.add_option("--threads", fl.threads,
                 "worker thread budget (or LEVYHOM_THREADS)");
  app.add_flag("--quiet", fl.quiet, "suppress progress output");

  CLI::App* sub_effective =
      app.add_subcommand("effective", "compute the homogenized kernel constant");
  CLI::App* sub_cell =
      app.add_subcommand("cell", "solve the periodic cell problem for p0");
  CLI::App* sub_solve = app.add_subcommand("solve", "solve one resolvent problem");
  CLI::App* sub_sweep =
      app.add_subcommand("sweep", "run a scale ladder against the effective solution");
  CLI::App* sub_gamma =
      app.add_subcommand("gamma", "compare minimum energy values along the ladder");
  CLI::App* sub_ergodic =
      app.add_subcommand("ergodic", "check kernel space averages against the mean");
  CLI::App* sub_validate =
      app.add_subcommand("validate", "check a config without running anything");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("config", e.what());
    return 2;
  }

  try {
    if (fl.threads <= 0) {
      if (const char* env = std::getenv("LEVYHOM_THREADS")) fl.threads = std::atoi(env);
    }
    if (fl.threads > 0) set_thread_budget(fl.threads);

    const RunConfig rc = load_with_overrides(fl);
    if (sub_effective->parsed()) return cmd_effective(rc, fl);
    if (sub_cell->parsed()) return cmd_cell(rc, fl);
    if (sub_solve->parsed()) return cmd_solve(rc, fl);
    if (sub_sweep->parsed()) return cmd_sweep(rc, fl);
    if (sub_gamma->parsed()) return cmd_gamma(rc, fl);
    if (sub_ergodic->parsed()) return cmd_ergodic(rc, fl);
    if (sub_validate->parsed()) return cmd_validate(rc, fl);
    emit_error("config", "no subcommand selected");
    return 2;
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const NumericError& e) {
    emit_error("numeric", e.what());
    return 3;
  } catch (const IoError& e) {
    emit_error("io", e.what());
    return 4;
  }
}
