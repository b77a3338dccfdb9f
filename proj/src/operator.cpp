#include "levyhom/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "levyhom/errors.hpp"
#include "levyhom/parallel.hpp"
#include "levyhom/quadrature.hpp"

namespace levyhom {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaxCells = 8192;  // dense pair storage needs n^2 doubles

// Base pair weights looked up by absolute cell offset, in apply scale.
struct BaseWeights {
  int dim = 1;
  int m = 0;
  std::vector<double> v;

  double at(int a, int b) const {
    return dim == 1 ? v[a] : v[static_cast<size_t>(a) * m + b];
  }
};

BaseWeights make_base_weights(const Grid& g, double alpha, double r_near) {
  BaseWeights bw{g.dim, g.m, {}};
  if (g.dim == 1) {
    bw.v.assign(g.m, 0.0);
    for (int k = 1; k < g.m; ++k) {
      bw.v[k] = base_pair_weight(1, alpha, {k, 0}, g.h, r_near);
    }
    return bw;
  }
  bw.v.assign(static_cast<size_t>(g.m) * g.m, 0.0);
  for (int a = 0; a < g.m; ++a) {
    for (int b = a; b < g.m; ++b) {
      if (a == 0 && b == 0) continue;
      const double w = base_pair_weight(2, alpha, {a, b}, g.h, r_near);
      bw.v[static_cast<size_t>(a) * g.m + b] = w;
      bw.v[static_cast<size_t>(b) * g.m + a] = w;
    }
  }
  return bw;
}

double checked_kernel_value(const BoundKernel& kernel, const Pt& x, const Pt& y,
                            int i, int j) {
  const double lam = kernel.value(x, y);
  const bool in_range = std::isfinite(lam) && lam > 0.0 &&
                        lam <= kernel.gamma * (1.0 + 1e-9) &&
                        lam * kernel.gamma >= 1.0 - 1e-9;
  if (!in_range) {
    throw NumericError("kernel value " + std::to_string(lam) +
                       " outside the elliptic range at cell pair (" +
                       std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  return lam;
}

// Distance from x to the box wall along direction (ct, st).
double wall_distance(double r_dom, const Pt& x, double ct, double st) {
  double t = std::numeric_limits<double>::infinity();
  if (ct > 1e-15) {
    t = std::min(t, (r_dom - x[0]) / ct);
  } else if (ct < -1e-15) {
    t = std::min(t, (-r_dom - x[0]) / ct);
  }
  if (st > 1e-15) {
    t = std::min(t, (r_dom - x[1]) / st);
  } else if (st < -1e-15) {
    t = std::min(t, (-r_dom - x[1]) / st);
  }
  return t;
}

// Mass of the jump tail from x along the unit direction (cx, cy), starting at
// distance dist.  The radial envelope integral is exact on each subinterval
// and the kernel is frozen at subinterval midpoints: densely over the first
// few oscillation periods, then one period at a time across a fixed length
// mid_len, far enough that the remaining tail can take the mean of the mid
// samples.  Widening the mid zone with shrinking period keeps the sampling
// noise of the far mean at the level of the tail's own fluctuations.  For a
// kernel constant along the ray the sums telescope to the exact tail.
double tail_mass_along(double alpha, const BoundKernel& kernel, const Pt& x,
                       double cx, double cy, double dist, int head_periods,
                       int per_period, int mid_per_period, double mid_len) {
  const double period = kernel.y_scale;
  auto sample = [&](double s) {
    const Pt y{x[0] + cx * s, x[1] + cy * s};
    return kernel.value(x, y);
  };
  double lo = dist;
  double total = 0.0;
  const int head_steps = head_periods * per_period;
  const double head_step = period / per_period;
  for (int k = 0; k < head_steps; ++k) {
    const double hi = dist + (k + 1) * head_step;
    total += sample(lo + 0.5 * head_step) *
             (std::pow(lo, -alpha) - std::pow(hi, -alpha));
    lo = hi;
  }
  const double cut = dist + head_steps * head_step;
  const int mid_periods = std::clamp(
      static_cast<int>(std::lround(mid_len / period)), 1, 2048);
  const int mid_steps = mid_periods * mid_per_period;
  const double mid_step = period / mid_per_period;
  double mean = 0.0;
  for (int k = 0; k < mid_steps; ++k) {
    const double hi = cut + (k + 1) * mid_step;
    const double lam = sample(lo + 0.5 * mid_step);
    total += lam * (std::pow(lo, -alpha) - std::pow(hi, -alpha));
    mean += lam;
    lo = hi;
  }
  mean /= mid_steps;
  return (total + mean * std::pow(lo, -alpha)) / alpha;
}

double exterior_mass_1d(const Grid& g, double alpha, const BoundKernel& kernel,
                        const Pt& x) {
  const double r = g.r_dom;
  if (kernel.y_scale > 0.0) {
    return tail_mass_along(alpha, kernel, x, 1.0, 0.0, r - x[0], 8, 128, 4, 8.0) +
           tail_mass_along(alpha, kernel, x, -1.0, 0.0, r + x[0], 8, 128, 4, 8.0);
  }
  const Pt right{x[0] + r, 0.0};
  const Pt left{x[0] - r, 0.0};
  return (kernel.value(x, right) * std::pow(r - x[0], -alpha) +
          kernel.value(x, left) * std::pow(r + x[0], -alpha)) /
         alpha;
}

double exterior_mass_2d(const Grid& g, double alpha, const BoundKernel& kernel,
                        const Pt& x) {
  const double r = g.r_dom;
  // The wall distance is smooth except toward the four corners; split there.
  std::vector<double> cuts;
  cuts.reserve(5);
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      double th = std::atan2(sy * r - x[1], sx * r - x[0]);
      if (th < 0.0) th += 2.0 * kPi;
      cuts.push_back(th);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(cuts.front() + 2.0 * kPi);

  if (kernel.y_scale > 0.0) {
    double far = 0.0;
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        far = std::max(far, std::hypot(sx * r - x[0], sy * r - x[1]));
      }
    }
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double width = cuts[i + 1] - cuts[i];
      if (width < 1e-14) continue;
      // Four angular samples per kernel oscillation seen along the far wall.
      const double waves = width * far / kernel.y_scale;
      const int slices =
          std::clamp(static_cast<int>(std::ceil(4.0 * waves)), 16, 1024);
      double arc = 0.0;
      for (int a = 0; a < slices; ++a) {
        const double th = cuts[i] + (a + 0.5) * width / slices;
        const double ct = std::cos(th), st = std::sin(th);
        arc += tail_mass_along(alpha, kernel, x, ct, st,
                               wall_distance(r, x, ct, st), 4, 32, 2, 4.0);
      }
      total += arc * (width / slices);
    }
    return total;
  }

  auto ray = [&](double th) {
    const double ct = std::cos(th), st = std::sin(th);
    const Pt y{x[0] + r * ct, x[1] + r * st};
    return kernel.value(x, y) * std::pow(wall_distance(r, x, ct, st), -alpha);
  };
  const double rho_min =
      std::min(std::min(r - x[0], r + x[0]), std::min(r - x[1], r + x[1]));
  const double tol = 2.5e-10 * kernel.gamma * std::pow(rho_min, -alpha);
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-14) continue;
    total += integrate_1d(ray, cuts[i], cuts[i + 1], tol);
  }
  return total / alpha;
}

}  // namespace

int Grid::cell_count() const { return dim == 1 ? m : m * m; }

Pt Grid::center(int flat) const {
  Pt p{0.0, 0.0};
  if (dim == 1) {
    p[0] = -r_dom + (flat + 0.5) * h;
  } else {
    p[0] = -r_dom + (flat / m + 0.5) * h;
    p[1] = -r_dom + (flat % m + 0.5) * h;
  }
  return p;
}

Grid build_grid(int dim, double r_dom, double h) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (!(r_dom > 0.0) || !std::isfinite(r_dom)) {
    throw ConfigError("domain radius must be positive");
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("cell size must be positive");
  const double ratio = 2.0 * r_dom / h;
  const int m = static_cast<int>(std::lround(ratio));
  if (m < 2 || std::abs(ratio - m) > 1e-9 * ratio) {
    throw ConfigError("cell size must divide the box edge 2*r_dom evenly");
  }
  Grid g{dim, r_dom, h, m};
  if (g.cell_count() > kMaxCells) {
    throw ConfigError("grid has " + std::to_string(g.cell_count()) +
                      " cells; the dense discretization supports at most " +
                      std::to_string(kMaxCells));
  }
  return g;
}

double near_diagonal_weight(int dim, double alpha, const std::array<int, 2>& k,
                            double h) {
  return exact_pair_integral(dim, alpha, k, h);
}

BoundKernel bind_kernel(const KernelModel& model, double eps,
                        const Realization* realization) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (model.is_random() && realization == nullptr) {
    throw ConfigError("random kernels need a realization to be bound");
  }
  BoundKernel b;
  b.symmetric = model.is_symmetric();
  b.gamma = model.gamma;
  b.y_scale = eps;
  const KernelModel m = model;
  if (realization != nullptr && model.is_random()) {
    const Realization r = *realization;
    b.value = [m, eps, r](const Pt& x, const Pt& y) {
      return eval_kernel(m, eps, x, y, &r);
    };
    if (m.has_weight()) {
      b.nu = [m, eps, r](const Pt& x) { return symmetrizing_weight(m, eps, x, &r); };
    }
  } else {
    b.value = [m, eps](const Pt& x, const Pt& y) { return eval_kernel(m, eps, x, y); };
    if (m.has_weight()) {
      b.nu = [m, eps](const Pt& x) { return symmetrizing_weight(m, eps, x); };
    }
  }
  return b;
}

BoundKernel bind_constant_kernel(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("constant kernel value must be positive");
  }
  BoundKernel b;
  b.symmetric = true;
  b.gamma = std::max(c, 1.0 / c);
  b.value = [c](const Pt&, const Pt&) { return c; };
  b.nu = [](const Pt&) { return 1.0; };
  return b;
}

BoundKernel bind_macro_kernel(const std::function<double(const Pt&, const Pt&)>& fn,
                              double gamma) {
  if (!fn) throw ConfigError("macro kernel function is empty");
  if (!(gamma >= 1.0)) throw ConfigError("ellipticity constant must be >= 1");
  BoundKernel b;
  b.symmetric = true;  // callers supply swap-symmetric functions
  b.gamma = gamma;
  b.y_scale = 1.0;
  b.value = fn;
  b.nu = [](const Pt&) { return 1.0; };
  return b;
}

DiscreteOperator assemble(const BoundKernel& kernel, double alpha, const Grid& grid,
                          double r_near) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (0,2)");
  if (!kernel.value) throw ConfigError("kernel is not bound");
  if (r_near <= 0.0) r_near = 4.0 * grid.h;

  const int n = grid.cell_count();
  if (n < 2 || n > kMaxCells) throw ConfigError("unsupported grid size");

  DiscreteOperator op;
  op.grid = grid;
  op.alpha = alpha;
  op.r_near = r_near;
  op.symmetric = kernel.symmetric;
  op.w.assign(static_cast<size_t>(n) * n, 0.0);
  op.row_sum.assign(n, 0.0);
  op.kappa.assign(n, 0.0);

  const BaseWeights base = make_base_weights(grid, alpha, r_near);
  std::vector<Pt> centers(n);
  for (int i = 0; i < n; ++i) centers[i] = grid.center(i);

  const int m = grid.m;
  auto offset_a = [&](int i, int j) {
    return grid.dim == 1 ? std::abs(i - j) : std::abs(i / m - j / m);
  };
  auto offset_b = [&](int i, int j) {
    return grid.dim == 1 ? 0 : std::abs(i % m - j % m);
  };

  parallel_blocks(n, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      double* row = op.w.data() + static_cast<size_t>(i) * n;
      const int jstart = kernel.symmetric ? i + 1 : 0;
      for (int j = jstart; j < n; ++j) {
        if (j == i) continue;
        const double lam = checked_kernel_value(kernel, centers[i], centers[j], i, j);
        row[j] = base.at(offset_a(i, j), offset_b(i, j)) * lam;
      }
    }
  });
  if (kernel.symmetric) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        op.w[static_cast<size_t>(j) * n + i] = op.w[static_cast<size_t>(i) * n + j];
      }
    }
  }

  parallel_blocks(n, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const double* row = op.w.data() + static_cast<size_t>(i) * n;
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += row[j];
      op.row_sum[i] = s;
      op.kappa[i] = grid.dim == 1
                        ? exterior_mass_1d(grid, alpha, kernel, centers[i])
                        : exterior_mass_2d(grid, alpha, kernel, centers[i]);
    }
  });

  if (kernel.nu) {
    op.weighted = true;
    op.nu.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double v = kernel.nu(centers[i]);
      if (!std::isfinite(v) || v <= 0.0) {
        throw NumericError("symmetrizing weight is not positive at cell " +
                           std::to_string(i));
      }
      op.nu[i] = v;
    }
  }
  return op;
}

std::vector<double> apply_op(const DiscreteOperator& op, std::span<const double> u) {
  const int n = op.n();
  if (static_cast<int>(u.size()) != n) {
    throw ConfigError("operator/vector size mismatch in apply");
  }
  std::vector<double> out(n, 0.0);
  parallel_blocks(n, [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      const double* row = op.w.data() + static_cast<size_t>(i) * n;
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += row[j] * u[j];
      // Cancel the interior mass before the exterior loss so that constants
      // reproduce -kappa exactly.
      out[i] = (s - op.row_sum[i] * u[i]) - op.kappa[i] * u[i];
    }
  });
  return out;
}

double energy_form(const DiscreteOperator& op, std::span<const double> u,
                   std::span<const double> v) {
  const int n = op.n();
  if (static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n) {
    throw ConfigError("operator/vector size mismatch in energy form");
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = op.w.data() + static_cast<size_t>(i) * n;
    double jumps = 0.0;
    for (int j = 0; j < n; ++j) {
      jumps += row[j] * (u[j] - u[i]) * (v[j] - v[i]);
    }
    total += op.nu_at(i) * (0.5 * jumps + op.kappa[i] * u[i] * v[i]);
  }
  return total;
}

double fractional_seminorm_p(const DiscreteOperator& unit_op, std::span<const double> u,
                             double p) {
  const int n = unit_op.n();
  if (static_cast<int>(u.size()) != n) {
    throw ConfigError("operator/vector size mismatch in seminorm");
  }
  if (!(p > 1.0)) throw ConfigError("seminorm exponent must exceed 1");
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = unit_op.w.data() + static_cast<size_t>(i) * n;
    double jumps = 0.0;
    for (int j = 0; j < n; ++j) {
      jumps += row[j] * std::pow(std::abs(u[j] - u[i]), p);
    }
    // The zero exterior extension jumps by |u_i| across the box boundary.
    s += jumps + 2.0 * unit_op.kappa[i] * std::pow(std::abs(u[i]), p);
  }
  const double hd = std::pow(unit_op.grid.h, unit_op.grid.dim);
  return std::pow(hd * s, 1.0 / p);
}

double fractional_seminorm(const Grid& grid, std::span<const double> u, double alpha) {
  return fractional_seminorm_p(unit_kernel_operator(grid, alpha), u, 2.0);
}

DiscreteOperator unit_kernel_operator(const Grid& grid, double alpha) {
  return assemble(bind_constant_kernel(1.0), alpha, grid);
}

}  // namespace levyhom
