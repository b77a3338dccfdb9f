#include "levyhom/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "levyhom/errors.hpp"
#include "levyhom/linalg.hpp"
#include "levyhom/quadrature.hpp"

namespace levyhom {

namespace {

constexpr int kMaxCellUnknowns = 8192;
constexpr long long kMaxCoupledStates = 1 << 22;

void check_positive_states(const RandomFieldSpec& spec, const char* name) {
  for (double s : spec.states) {
    if (!(s > 0.0)) {
      throw ConfigError(std::string(name) + " states must be positive for a kernel factor");
    }
  }
}

bool same_site_coupling(const RandomFieldSpec& a, const RandomFieldSpec& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == FieldKind::Checkerboard) return a.cell_size == b.cell_size;
  return a.direction == b.direction;
}

// E[mu/lambda] when both fields read the same draw at every site.  The
// checkerboard picks states by reducing one integer draw modulo the state
// count; the rotation profile picks by interval lookup of one coordinate.
double coupled_ratio_expectation(const RandomFieldSpec& lam, const RandomFieldSpec& mu) {
  const auto n1 = static_cast<long long>(lam.states.size());
  const auto n2 = static_cast<long long>(mu.states.size());
  const long long L = n1 / std::gcd(n1, n2) * n2;
  if (L > kMaxCoupledStates) {
    throw ConfigError("coupled state lists are too large for an exact expectation");
  }
  double s = 0.0;
  if (lam.kind == FieldKind::Checkerboard) {
    for (long long j = 0; j < L; ++j) {
      s += mu.states[static_cast<size_t>(j % n2)] / lam.states[static_cast<size_t>(j % n1)];
    }
  } else {
    for (long long t = 0; t < L; ++t) {
      s += mu.states[static_cast<size_t>(t * n2 / L)] /
           lam.states[static_cast<size_t>(t * n1 / L)];
    }
  }
  return s / static_cast<double>(L);
}

double table_mean(const KernelTable& t) {
  double s = 0.0;
  for (double v : t.v) s += v;
  return s / static_cast<double>(t.v.size());
}

void check_table_band(const KernelTable& t, double gamma) {
  const double lo = (1.0 / gamma) * (1.0 - 1e-9);
  const double hi = gamma * (1.0 + 1e-9);
  const int size = t.size();
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double v = t.at(i, j);
      if (!std::isfinite(v) || v < lo || v > hi) {
        throw NumericError("kernel table value at cells (" + std::to_string(i) + ", " +
                           std::to_string(j) + ") leaves the ellipticity band");
      }
    }
  }
}

int offset_index(const CellOperatorDiscretization& disc, int i, int j) {
  const int n = disc.n;
  if (disc.dim == 1) return ((j - i) % n + n) % n;
  const int da = ((j / n - i / n) % n + n) % n;
  const int db = ((j % n - i % n) % n + n) % n;
  return da * n + db;
}

std::vector<double> adjoint_apply_raw(const CellOperatorDiscretization& disc,
                                      const std::vector<double>& q) {
  const int size = disc.size();
  std::vector<double> out(size, 0.0);
  for (int i = 0; i < size; ++i) {
    double s = 0.0;
    for (int j = 0; j < size; ++j) {
      if (j == i) continue;
      const double w = disc.stencil[static_cast<size_t>(offset_index(disc, i, j))];
      s += w * (disc.lper.at(j, i) * q[static_cast<size_t>(j)] -
                disc.lper.at(i, j) * q[static_cast<size_t>(i)]);
    }
    out[static_cast<size_t>(i)] = s;
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double effective_p1(const TorusField& lambda, const TorusField& mu) {
  if (lambda.dim != mu.dim) throw ConfigError("field dimensions do not match");
  const double mean_mu = cell_average(mu);
  return mean_mu * mean_mu / cell_average_ratio(mu, lambda);
}

double effective_p2(const KernelModel& model, const Pt& x, const Pt& y) {
  const auto* k = std::get_if<P2Kernel>(&model.k);
  if (k == nullptr) throw ConfigError("the locally periodic average needs a separable kernel");
  return k->a.eval(model.dim, x, y) * table_mean(k->lper);
}

double effective_q1(const RandomFieldSpec& lambda_spec, const RandomFieldSpec& mu_spec) {
  validate_field_spec(lambda_spec, 1);
  validate_field_spec(mu_spec, 1);
  check_positive_states(lambda_spec, "lambda");
  check_positive_states(mu_spec, "mu");
  double ratio;
  if (lambda_spec.stream == mu_spec.stream) {
    if (!same_site_coupling(lambda_spec, mu_spec)) {
      throw ConfigError(
          "field specs share a draw stream but couple sites differently; "
          "use distinct streams for independent factors");
    }
    ratio = coupled_ratio_expectation(lambda_spec, mu_spec);
  } else {
    ratio = field_expectation(mu_spec) *
            field_expectation(lambda_spec, [](double v) { return 1.0 / v; });
  }
  const double mean_mu = field_expectation(mu_spec);
  return mean_mu * mean_mu / ratio;
}

double effective_q2(const KernelModel& model, const Pt& x, const Pt& y) {
  const auto* k = std::get_if<Q2Kernel>(&model.k);
  if (k == nullptr) throw ConfigError("the double average needs a probability-space kernel");
  constexpr int kOmegaGrid = 128;
  double s = 0.0;
  for (int i = 0; i < kOmegaGrid; ++i) {
    const double w1 = (i + 0.5) / kOmegaGrid;
    for (int j = 0; j < kOmegaGrid; ++j) {
      const double w2 = (j + 0.5) / kOmegaGrid;
      s += k->rule.eval(model.dim, x, y, w1, w2);
    }
  }
  return s / (static_cast<double>(kOmegaGrid) * kOmegaGrid);
}

int CellOperatorDiscretization::size() const {
  int s = 1;
  for (int k = 0; k < dim; ++k) s *= n;
  return s;
}

CellOperatorDiscretization make_cell_operator(const KernelTable& lper, double alpha,
                                              double gamma, int r_img,
                                              double lambda_shift) {
  if (!(alpha > 0.0) || !(alpha < 2.0)) {
    throw ConfigError("jump exponent must lie in (0, 2)");
  }
  if (!(gamma > 1.0)) throw ConfigError("ellipticity constant must exceed 1");
  if (r_img < 1) throw ConfigError("image truncation radius must be at least 1");
  if (lper.size() > kMaxCellUnknowns) {
    throw ConfigError("torus resolution exceeds the dense cell-problem limit");
  }
  check_table_band(lper, gamma);

  CellOperatorDiscretization disc;
  disc.dim = lper.dim;
  disc.n = lper.n;
  disc.alpha = alpha;
  disc.gamma = gamma;
  disc.r_img = r_img;
  disc.lper = lper;

  const int n = disc.n;
  const double h = 1.0 / n;
  const double r_near = 4.0 * h;
  const long long reach = static_cast<long long>(r_img) * n;  // ball radius in cells
  const int size = disc.size();
  disc.tail_share = tail_mass(disc.dim, alpha, static_cast<double>(r_img)) / size;
  disc.stencil.assign(static_cast<size_t>(size), 0.0);

  if (disc.dim == 1) {
    for (int d = 0; d <= n / 2; ++d) {
      double w = 0.0;
      for (int k = -r_img - 1; k <= r_img; ++k) {
        const long long m = d + static_cast<long long>(k) * n;
        if (m == 0 || std::llabs(m) > reach) continue;
        w += base_pair_weight(1, alpha, {static_cast<int>(m), 0}, h, r_near);
      }
      disc.stencil[static_cast<size_t>(d)] = w + disc.tail_share;
      disc.stencil[static_cast<size_t>((n - d) % n)] = disc.stencil[static_cast<size_t>(d)];
    }
  } else {
    for (int da = 0; da < n; ++da) {
      for (int db = 0; db < n; ++db) {
        const int flat = da * n + db;
        const int mirror = ((n - da) % n) * n + ((n - db) % n);
        if (flat > mirror) continue;
        double w = 0.0;
        for (int k1 = -r_img - 1; k1 <= r_img; ++k1) {
          const long long m1 = da + static_cast<long long>(k1) * n;
          for (int k2 = -r_img - 1; k2 <= r_img; ++k2) {
            const long long m2 = db + static_cast<long long>(k2) * n;
            if (m1 == 0 && m2 == 0) continue;
            if (m1 * m1 + m2 * m2 > reach * reach) continue;
            w += base_pair_weight(2, alpha, {static_cast<int>(m1), static_cast<int>(m2)},
                                  h, r_near);
          }
        }
        disc.stencil[static_cast<size_t>(flat)] = w + disc.tail_share;
        disc.stencil[static_cast<size_t>(mirror)] = disc.stencil[static_cast<size_t>(flat)];
      }
    }
  }

  disc.row_mass = 0.0;
  for (double w : disc.stencil) disc.row_mass += w;
  disc.lambda_shift = lambda_shift > 0.0 ? lambda_shift : 4.0 * gamma * disc.row_mass;
  return disc;
}

TorusField forward_apply(const CellOperatorDiscretization& disc, const TorusField& q) {
  if (q.dim != disc.dim || q.n != disc.n) {
    throw ConfigError("field resolution does not match the cell discretization");
  }
  const int size = disc.size();
  std::vector<double> out(static_cast<size_t>(size), 0.0);
  for (int i = 0; i < size; ++i) {
    double s = 0.0;
    for (int j = 0; j < size; ++j) {
      if (j == i) continue;
      const double w = disc.stencil[static_cast<size_t>(offset_index(disc, i, j))];
      s += w * disc.lper.at(i, j) *
           (q.samples[static_cast<size_t>(j)] - q.samples[static_cast<size_t>(i)]);
    }
    out[static_cast<size_t>(i)] = s;
  }
  return make_torus_field(disc.dim, disc.n, std::move(out));
}

TorusField adjoint_apply(const CellOperatorDiscretization& disc, const TorusField& q) {
  if (q.dim != disc.dim || q.n != disc.n) {
    throw ConfigError("field resolution does not match the cell discretization");
  }
  return make_torus_field(disc.dim, disc.n, adjoint_apply_raw(disc, q.samples));
}

CellSolution principal_eigenfunction(const CellOperatorDiscretization& disc, double tol,
                                     double residual_tol, int max_iterations) {
  if (!(tol > 0.0) || !(residual_tol > 0.0)) {
    throw ConfigError("iteration tolerances must be positive");
  }
  if (max_iterations < 1) throw ConfigError("iteration budget must be positive");
  const int size = disc.size();

  // Shifted adjoint matrix lambda_shift I - L~; its inverse is entrywise
  // positive, so the iteration stays in the positive cone.
  std::vector<double> a(static_cast<size_t>(size) * size, 0.0);
  for (int i = 0; i < size; ++i) {
    double diag = disc.lambda_shift;
    double* row = a.data() + static_cast<size_t>(i) * size;
    for (int j = 0; j < size; ++j) {
      if (j == i) continue;
      const double w = disc.stencil[static_cast<size_t>(offset_index(disc, i, j))];
      row[j] = -w * disc.lper.at(j, i);
      diag += w * disc.lper.at(i, j);
    }
    row[i] = diag;
  }
  const LuFactor lu = lu_factor(std::move(a), size);

  CellSolution sol;
  std::vector<double> q(static_cast<size_t>(size), 1.0);
  while (sol.iterations < max_iterations) {
    std::vector<double> z = lu_solve(lu, q);
    double mz = 0.0;
    for (double v : z) mz += v;
    mz /= size;
    if (!(mz > 0.0)) throw NumericError("the inverse iteration left the positive cone");
    double diff = 0.0;
    for (int i = 0; i < size; ++i) {
      z[static_cast<size_t>(i)] /= mz;
      diff = std::max(diff, std::abs(z[static_cast<size_t>(i)] - q[static_cast<size_t>(i)]));
    }
    sol.eigenvalue = mz;
    q.swap(z);
    ++sol.iterations;
    if (diff < tol && max_abs(adjoint_apply_raw(disc, q)) <= residual_tol) break;
  }
  sol.residual = max_abs(adjoint_apply_raw(disc, q));
  if (sol.residual > residual_tol) {
    throw NumericError("the inverse power iteration did not converge after " +
                       std::to_string(sol.iterations) + " iterations (residual " +
                       std::to_string(sol.residual) + ")");
  }
  sol.p_min = *std::min_element(q.begin(), q.end());
  if (!(sol.p_min > 0.0)) {
    throw NumericError("the converged principal vector has a nonpositive component");
  }
  double pmax = *std::max_element(q.begin(), q.end());
  sol.p0 = make_torus_field(disc.dim, disc.n, q);
  sol.lambda_eff = effective_nonsym(disc.lper, sol.p0);
  sol.tail_bound = 2.0 * disc.gamma * pmax *
                   tail_mass(disc.dim, disc.alpha, static_cast<double>(disc.r_img));
  return sol;
}

double effective_nonsym(const KernelTable& lper, const TorusField& p0) {
  if (p0.dim != lper.dim || p0.n != lper.n) {
    throw ConfigError("field resolution does not match the kernel table");
  }
  const int size = lper.size();
  double weighted = 0.0, mean_p = 0.0;
  for (int i = 0; i < size; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < size; ++j) rowsum += lper.at(i, j);
    weighted += rowsum * p0.samples[static_cast<size_t>(i)];
    mean_p += p0.samples[static_cast<size_t>(i)];
  }
  weighted /= static_cast<double>(size) * size;
  mean_p /= size;
  return weighted / mean_p;
}

}  // namespace levyhom
