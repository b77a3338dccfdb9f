#include <cmath>
#include <vector>

#include "doctest.h"
#include "levyhom/effective.hpp"
#include "levyhom/errors.hpp"
#include "levyhom/rng.hpp"

using namespace levyhom;

namespace {

const double kTwoPi = 2.0 * std::acos(-1.0);

KernelTable product_table(const std::vector<double>& lam, const std::vector<double>& mu) {
  const int n = static_cast<int>(lam.size());
  std::vector<double> v(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) v[static_cast<size_t>(i) * n + j] = lam[i] * mu[j];
  }
  return make_kernel_table(1, n, v);
}

KernelTable sin_table(int n) {
  return make_kernel_table(1, n, [](const Pt& zeta, const Pt& eta) {
    return 2.0 + 0.5 * std::sin(kTwoPi * zeta[0]) + 0.25 * std::sin(kTwoPi * eta[0]);
  });
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TorusField random_field(int dim, int n, uint64_t seed) {
  SeqRng rng(seed);
  int count = 1;
  for (int k = 0; k < dim; ++k) count *= n;
  std::vector<double> v(static_cast<size_t>(count));
  for (double& x : v) x = rng.next_in(-1.0, 1.0);
  return make_torus_field(dim, n, std::move(v));
}

}  // namespace

TEST_SUITE("effective") {

TEST_CASE("product kernels average to the harmonic-weighted square") {
  TorusField ones = make_torus_field(1, 2, std::vector<double>{1.0, 1.0});
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  TorusField lam = make_torus_field(1, 2, std::vector<double>{1.0, 1.0 / 3.0});
  CHECK(effective_p1(ones, ones) == 1.0);
  CHECK(effective_p1(ones, mu) == 2.0);
  CHECK(effective_p1(lam, mu) == 0.8);
  // The naive product of plain averages is a different number.
  CHECK(cell_average(lam) * cell_average(mu) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("the averaged value never exceeds the plain product average") {
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  TorusField lam = make_torus_field(1, 2, std::vector<double>{2.0, 1.0});
  TorusField prod = make_torus_field(1, 2, std::vector<double>{2.0, 3.0});
  CHECK(effective_p1(lam, mu) < cell_average(prod));
  TorusField c = make_torus_field(1, 2, std::vector<double>{2.0, 2.0});
  CHECK(effective_p1(c, c) == cell_average(make_torus_field(1, 2, std::vector<double>{4.0, 4.0})));
}

TEST_CASE("scaling either factor scales the homogenized value") {
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  TorusField lam = make_torus_field(1, 2, std::vector<double>{2.0, 1.0});
  TorusField lam2 = make_torus_field(1, 2, std::vector<double>{4.0, 2.0});
  TorusField mu2 = make_torus_field(1, 2, std::vector<double>{2.0, 6.0});
  const double base = effective_p1(lam, mu);
  CHECK(effective_p1(lam2, mu) == 2.0 * base);
  CHECK(effective_p1(lam, mu2) == 2.0 * base);
  TorusField flat2d = make_torus_field(2, 2, std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(effective_p1(flat2d, mu), ConfigError);
}

TEST_CASE("locally periodic kernels average the microstructure") {
  KernelTable prod = product_table({1.0, 3.0}, {1.0, 3.0});
  KernelModel flat = make_p2_model(1, 0.5, 4.0, MacroRule{}, prod);
  CHECK(effective_p2(flat, Pt{0.3, 0.0}, Pt{0.9, 0.0}) == 4.0);
  MacroRule twice{MacroRule::Kind::Constant, 2.0, 0.0};
  KernelModel scaled = make_p2_model(1, 0.5, 8.0, twice, prod);
  CHECK(effective_p2(scaled, Pt{0.0, 0.0}, Pt{1.0, 0.0}) == 8.0);
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  KernelModel p1 = make_p1_model(1, 0.5, 3.0, mu, mu);
  CHECK_THROWS_AS(effective_p2(p1, Pt{0.0, 0.0}, Pt{1.0, 0.0}), ConfigError);
}

TEST_CASE("random product expectations factorize or couple by stream") {
  RandomFieldSpec lam_one;
  lam_one.states = {1.0};
  lam_one.stream = 1;
  RandomFieldSpec mu13;
  mu13.states = {1.0, 3.0};
  mu13.stream = 2;
  CHECK(effective_q1(lam_one, mu13) == 2.0);

  RandomFieldSpec lam12;
  lam12.states = {1.0, 2.0};
  lam12.stream = 1;
  CHECK(effective_q1(lam12, mu13) == 8.0 / 3.0);

  RandomFieldSpec coupled_lam = mu13;
  RandomFieldSpec coupled_mu = mu13;
  CHECK(effective_q1(coupled_lam, coupled_mu) == 4.0);
}

TEST_CASE("shared streams with unequal state counts couple through one draw") {
  RandomFieldSpec lam;
  lam.states = {1.0, 2.0};
  RandomFieldSpec mu;
  mu.states = {1.0, 3.0, 5.0};
  // Same stream: cell draws reduce one integer modulo each state count.
  CHECK(effective_q1(lam, mu) == 4.0);

  RandomFieldSpec rlam = lam;
  rlam.kind = FieldKind::Rotation;
  RandomFieldSpec rmu = mu;
  rmu.kind = FieldKind::Rotation;
  // Rotation profiles couple through one coordinate by interval lookup.
  CHECK(effective_q1(rlam, rmu) == 9.0 / ((1.0 + 1.0 + 3.0 + 1.5 + 2.5 + 2.5) / 6.0));
}

TEST_CASE("ambiguous couplings and bad states are rejected") {
  RandomFieldSpec a;
  a.states = {1.0, 3.0};
  RandomFieldSpec b = a;
  b.cell_size = 0.5;
  CHECK_THROWS_AS(effective_q1(a, b), ConfigError);
  RandomFieldSpec rot = a;
  rot.kind = FieldKind::Rotation;
  CHECK_THROWS_AS(effective_q1(a, rot), ConfigError);
  RandomFieldSpec neg = a;
  neg.states = {1.0, -2.0};
  neg.stream = 9;
  CHECK_THROWS_AS(effective_q1(neg, a), ConfigError);
}

TEST_CASE("probability space kernels average over both coordinates") {
  OmegaRule cross{OmegaRule::Kind::SinCross, 2.0, 1.0};
  KernelModel mcross = make_q2_model(1, 0.5, 4.0, cross);
  CHECK(effective_q2(mcross, Pt{0.1, 0.0}, Pt{0.4, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
  OmegaRule prod{OmegaRule::Kind::ProductCos, 2.0, 0.5};
  KernelModel mprod = make_q2_model(1, 0.5, 4.0, prod);
  CHECK(effective_q2(mprod, Pt{0.1, 0.0}, Pt{0.4, 0.0}) == doctest::Approx(4.0).epsilon(1e-12));
  OmegaRule flat{OmegaRule::Kind::Constant, 1.5, 0.0};
  KernelModel mflat = make_q2_model(2, 0.5, 2.0, flat);
  CHECK(effective_q2(mflat, Pt{0.0, 0.0}, Pt{1.0, 1.0}) == 1.5);
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  KernelModel p1 = make_p1_model(1, 0.5, 3.0, mu, mu);
  CHECK_THROWS_AS(effective_q2(p1, Pt{0.0, 0.0}, Pt{1.0, 0.0}), ConfigError);
}

TEST_CASE("cell discretizations validate their inputs") {
  KernelTable t = product_table({1.0, 1.0}, {1.0, 3.0});
  CHECK_THROWS_AS(make_cell_operator(t, 2.0, 4.0), ConfigError);
  CHECK_THROWS_AS(make_cell_operator(t, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(make_cell_operator(t, 0.5, 4.0, 0), ConfigError);
  CHECK_THROWS_AS(make_cell_operator(t, 0.5, 2.0), NumericError);  // 3 > gamma
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
  TorusField wrong = make_torus_field(1, 4, std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(adjoint_apply(disc, wrong), ConfigError);
  CHECK_THROWS_AS(effective_nonsym(t, wrong), ConfigError);
}

TEST_CASE("torus weights are symmetric with positive off-diagonal entries") {
  KernelTable t = sin_table(12);
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
  const int n = disc.n;
  for (int d = 1; d < n; ++d) {
    CHECK(disc.stencil[static_cast<size_t>(d)] ==
          disc.stencil[static_cast<size_t>(n - d)]);
    CHECK(disc.stencil[static_cast<size_t>(d)] > 0.0);
  }
  CHECK(disc.row_mass > 0.0);
  CHECK(disc.lambda_shift == 16.0 * disc.row_mass);
  CHECK(disc.tail_share > 0.0);
}

TEST_CASE("constants are annihilated exactly") {
  KernelTable sym = make_kernel_table(1, 8, [](const Pt& zeta, const Pt& eta) {
    return 2.0 + std::cos(kTwoPi * (zeta[0] - eta[0]));
  });
  CellOperatorDiscretization disc = make_cell_operator(sym, 0.75, 4.0);
  TorusField ones = make_torus_field(1, 8, std::vector<double>(8, 1.0));
  TorusField fwd = forward_apply(disc, ones);
  TorusField adj = adjoint_apply(disc, ones);
  for (int i = 0; i < 8; ++i) {
    CHECK(fwd.samples[static_cast<size_t>(i)] == 0.0);
    CHECK(adj.samples[static_cast<size_t>(i)] == 0.0);
  }
}

TEST_CASE("translation invariant kernels keep pure modes pure") {
  KernelTable flat = make_kernel_table(1, 16, [](const Pt&, const Pt&) { return 1.0; });
  CellOperatorDiscretization disc = make_cell_operator(flat, 0.5, 2.0);
  TorusField q = make_torus_field(
      1, 16, [](const Pt& z) { return std::sin(kTwoPi * z[0]); });
  TorusField out = adjoint_apply(disc, q);
  const double ratio = out.samples[0] / q.samples[0];
  CHECK(ratio < 0.0);
  for (int i = 0; i < 16; ++i) {
    CHECK(out.samples[static_cast<size_t>(i)] ==
          doctest::Approx(ratio * q.samples[static_cast<size_t>(i)]).epsilon(1e-10));
  }
}

TEST_CASE("forward and adjoint actions are dual") {
  for (int dim : {1, 2}) {
    const int n = dim == 1 ? 12 : 4;
    KernelTable t = make_kernel_table(dim, n, [&](const Pt& zeta, const Pt& eta) {
      return 2.0 + 0.5 * std::sin(kTwoPi * zeta[0]) + 0.25 * std::cos(kTwoPi * eta[dim - 1]);
    });
    CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
    TorusField q = random_field(dim, n, 7);
    TorusField r = random_field(dim, n, 11);
    const double lhs = dot(forward_apply(disc, q).samples, r.samples);
    const double rhs = dot(q.samples, adjoint_apply(disc, r).samples);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("product kernels have an explicit adjoint null vector") {
  KernelTable t = product_table({1.0, 1.0 / 3.0}, {1.0, 3.0});
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
  // mu/lambda = [1, 9]
  TorusField q = make_torus_field(1, 2, std::vector<double>{1.0, 9.0});
  TorusField out = adjoint_apply(disc, q);
  for (double v : out.samples) CHECK(std::abs(v) <= 1e-12 * disc.row_mass);
}

TEST_CASE("symmetric kernels have the constant principal vector") {
  KernelTable sym = make_kernel_table(1, 16, [](const Pt& zeta, const Pt& eta) {
    return 2.0 + std::cos(kTwoPi * (zeta[0] - eta[0]));
  });
  CellOperatorDiscretization disc = make_cell_operator(sym, 0.5, 4.0);
  CellSolution sol = principal_eigenfunction(disc);
  for (double v : sol.p0.samples) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sol.residual < 1e-10);
  CHECK(sol.eigenvalue == doctest::Approx(1.0 / disc.lambda_shift).epsilon(1e-9));
  CHECK(sol.p_min > 0.0);
  // Symmetric kernel: the weighted average reduces to the plain double mean.
  double mean = 0.0;
  for (double v : sym.v) mean += v;
  mean /= static_cast<double>(sym.v.size());
  CHECK(sol.lambda_eff == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("the cell pipeline matches the product formula") {
  std::vector<double> lam(32), mu(32);
  for (int i = 0; i < 32; ++i) {
    mu[static_cast<size_t>(i)] = i % 2 == 0 ? 1.0 : 3.0;
    lam[static_cast<size_t>(i)] = 1.0 / mu[static_cast<size_t>(i)];
  }
  KernelTable t = product_table(lam, mu);
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
  CellSolution sol = principal_eigenfunction(disc);
  // p0 is mu/lambda = mu^2, mean-normalized: cells alternate 0.2 and 1.8.
  for (int i = 0; i < 32; ++i) {
    const double expect = i % 2 == 0 ? 0.2 : 1.8;
    CHECK(sol.p0.samples[static_cast<size_t>(i)] ==
          doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(sol.eigenvalue == doctest::Approx(1.0 / disc.lambda_shift).epsilon(1e-9));
  CHECK(sol.p_min > 0.0);
  CHECK(sol.tail_bound > 0.0);
  TorusField lamf = make_torus_field(1, 32, lam);
  TorusField muf = make_torus_field(1, 32, mu);
  CHECK(sol.lambda_eff == doctest::Approx(effective_p1(lamf, muf)).epsilon(1e-9));
}

TEST_CASE("the principal vector does not depend on the spectral shift") {
  KernelTable t = sin_table(16);
  CellOperatorDiscretization a = make_cell_operator(t, 0.5, 4.0);
  CellOperatorDiscretization b = make_cell_operator(t, 0.5, 4.0, 8, 2.0 * a.lambda_shift);
  CellSolution sa = principal_eigenfunction(a, 1e-13, 1e-10);
  CellSolution sb = principal_eigenfunction(b, 1e-13, 1e-10);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(sa.p0.samples[static_cast<size_t>(i)] ==
          doctest::Approx(sb.p0.samples[static_cast<size_t>(i)]).epsilon(1e-9));
  }
  CHECK(sa.p_min > 0.0);
  CHECK(sa.lambda_eff == doctest::Approx(sb.lambda_eff).epsilon(1e-9));
}

TEST_CASE("two dimensional cell problems behave the same way") {
  KernelTable t = make_kernel_table(2, 4, [](const Pt& zeta, const Pt& eta) {
    return 2.0 + 0.5 * std::sin(kTwoPi * zeta[0]) * std::cos(kTwoPi * zeta[1]) +
           0.25 * std::sin(kTwoPi * eta[1]);
  });
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0, 4);
  CellSolution sol = principal_eigenfunction(disc, 1e-12, 1e-9);
  CHECK(sol.p_min > 0.0);
  CHECK(sol.eigenvalue == doctest::Approx(1.0 / disc.lambda_shift).epsilon(1e-8));
  CHECK(sol.p0.dim == 2);
  CHECK(sol.p0.n == 4);
  double mean = 0.0;
  for (double v : sol.p0.samples) mean += v;
  CHECK(mean / 16.0 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("iteration budgets are enforced") {
  KernelTable t = sin_table(12);
  CellOperatorDiscretization disc = make_cell_operator(t, 0.5, 4.0);
  CHECK_THROWS_AS(principal_eigenfunction(disc, 1e-13, 1e-13, 2), NumericError);
  CHECK_THROWS_AS(principal_eigenfunction(disc, 0.0, 1e-8), ConfigError);
}

TEST_CASE("the weighted kernel average uses the principal density") {
  KernelTable t = product_table({1.0, 1.0}, {1.0, 3.0});
  TorusField half = make_torus_field(1, 2, std::vector<double>{0.5, 1.5});
  // Rows of the product table sum identically, so the weight drops out.
  CHECK(effective_nonsym(t, half) == doctest::Approx(2.0).epsilon(1e-14));
  TorusField ones = make_torus_field(1, 2, std::vector<double>{1.0, 1.0});
  CHECK(effective_nonsym(t, ones) == doctest::Approx(2.0).epsilon(1e-14));
}

}  // TEST_SUITE
