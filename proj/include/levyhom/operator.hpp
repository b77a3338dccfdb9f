#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "levyhom/geometry.hpp"
#include "levyhom/kernels.hpp"

namespace levyhom {

// Uniform cells tiling [-r_dom, r_dom)^d; functions are identified with their
// cell values and extended by zero outside the box.
struct Grid {
  int dim = 1;
  double r_dom = 1.0;
  double h = 0.5;
  int m = 4;  // cells per axis

  int cell_count() const;
  Pt center(int flat) const;
  int flat(int i, int j = 0) const { return dim == 1 ? i : i * m + j; }
};

Grid build_grid(int dim, double r_dom, double h);

// Exact value of the double integral of |x-y|^(-d-alpha) over the cell at the
// origin and the cell at offset k (both of edge h).  Closed form in d=1,
// tensorized adaptive subdivision in d=2.  Errors on k = 0 and on touching
// cell pairs with alpha >= 1, where the integral diverges.
double near_diagonal_weight(int dim, double alpha, const std::array<int, 2>& k, double h);

// Kernel bound to a concrete scale / realization, ready for assembly.
struct BoundKernel {
  std::function<double(const Pt&, const Pt&)> value;
  std::function<double(const Pt&)> nu;  // null when no weight is defined
  bool symmetric = false;
  double gamma = 1.0;
  // Characteristic length of kernel variation in the far argument; exterior
  // masses resolve this scale before falling back to a mean tail.  Zero means
  // constant in the far argument (point-sampled exterior).
  double y_scale = 0.0;
};

BoundKernel bind_kernel(const KernelModel& model, double eps,
                        const Realization* realization = nullptr);
BoundKernel bind_constant_kernel(double c);
BoundKernel bind_macro_kernel(const std::function<double(const Pt&, const Pt&)>& fn,
                              double gamma);

// Dense pair-weight discretization of the jump operator on a grid, with the
// zero exterior condition folded into the killing column kappa.
struct DiscreteOperator {
  Grid grid;
  double alpha = 0.5;
  double r_near = 0.0;
  bool symmetric = false;
  bool weighted = false;           // nu holds a meaningful weight
  std::vector<double> w;           // n*n pair weights, zero diagonal
  std::vector<double> row_sum;     // sum_j w[i][j]
  std::vector<double> kappa;       // exterior killing
  std::vector<double> nu;          // symmetrizing weight per cell (may be empty)

  int n() const { return grid.cell_count(); }
  double wij(int i, int j) const { return w[static_cast<size_t>(i) * n() + j]; }
  double nu_at(int i) const { return nu.empty() ? 1.0 : nu[static_cast<size_t>(i)]; }
};

// r_near <= 0 selects the default 4h.
DiscreteOperator assemble(const BoundKernel& kernel, double alpha, const Grid& grid,
                          double r_near = 0.0);

// (Lu)_i = sum_j W_ij (u_j - u_i) - kappa_i u_i.
std::vector<double> apply_op(const DiscreteOperator& op, std::span<const double> u);

// (1/2) sum_ij nu_i W_ij (u_j-u_i)(v_j-v_i) + sum_i nu_i kappa_i u_i v_i.
double energy_form(const DiscreteOperator& op, std::span<const double> u,
                   std::span<const double> v);

// Discrete Gagliardo-type seminorm with unit kernel weights; the exterior
// jump of the zero extension is included, so nonzero functions give nonzero
// values even when constant inside the box.
double fractional_seminorm(const Grid& grid, std::span<const double> u, double alpha);
double fractional_seminorm_p(const DiscreteOperator& unit_op, std::span<const double> u,
                             double p);

// Unit-kernel operator for seminorm evaluations (reusable across calls).
DiscreteOperator unit_kernel_operator(const Grid& grid, double alpha);

}  // namespace levyhom
