#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "levyhom/fields.hpp"
#include "levyhom/geometry.hpp"

namespace levyhom {

// Periodic kernel table Lambda(zeta, eta) sampled on the cells of the torus
// squared; stored as a (n^dim) x (n^dim) matrix indexed by flattened cells.
struct KernelTable {
  int dim = 1;
  int n = 1;
  std::vector<double> v;

  int size() const;  // n^dim
  double at(int ci, int cj) const { return v[static_cast<size_t>(ci) * size() + cj]; }
  int cell_of(const Pt& xi) const;
  Pt cell_center(int flat) const;
  double value_at(const Pt& xi, const Pt& eta) const;
};

KernelTable make_kernel_table(int dim, int n,
                              const std::function<double(const Pt&, const Pt&)>& rule);
KernelTable make_kernel_table(int dim, int n, std::vector<double> entries);
KernelTable load_kernel_table(const std::string& path, int dim);
void save_kernel_table(const std::string& path, const KernelTable& t);

// Largest |K(c)-K(c')| / dist(c,c') over neighboring table cells (periodic).
double table_lipschitz_modulus(const KernelTable& t);

// Slowly varying macroscopic factor a(x, y) for the locally periodic case.
struct MacroRule {
  enum class Kind { One, Constant, ExpDist };
  Kind kind = Kind::One;
  double base = 1.0;
  double amplitude = 0.0;

  double eval(int dim, const Pt& x, const Pt& y) const;
  double lo() const;
  double hi() const;
};

// Probability-space kernel rho(x, y, omega1, omega2) for the random
// environment case with compact state space Omega = [0,1).
struct OmegaRule {
  enum class Kind { Constant, ProductCos, SinCross };
  Kind kind = Kind::Constant;
  double base = 1.0;
  double amplitude = 0.0;

  double eval(int dim, const Pt& x, const Pt& y, double w1, double w2) const;
  double lo() const;
  double hi() const;
};

// The five coefficient regimes.
struct P1Kernel {  // lambda(x/eps) mu(y/eps), periodic fields
  TorusField lambda;
  TorusField mu;
};
struct P2Kernel {  // a(x,y) Lper(x/eps, y/eps), separable locally periodic
  MacroRule a;
  KernelTable lper;
};
struct Q1Kernel {  // lambda(x/eps, omega) mu(y/eps, omega), stationary ergodic
  RandomFieldSpec lambda_spec;
  RandomFieldSpec mu_spec;
};
struct Q2Kernel {  // rho(x, y, T_{x/eps} omega, T_{y/eps} omega)
  OmegaRule rule;
  std::vector<double> direction;  // empty selects the default
};
struct NonSymKernel {  // periodic Lambda(x/eps, y/eps), possibly asymmetric
  KernelTable lper;
  double lipschitz_bound = 0.0;    // declared
  double lipschitz_modulus = 0.0;  // measured on the table
};

struct KernelModel {
  int dim = 1;
  double alpha = 0.5;    // jump exponent, in (0,2); NonSym requires (0,1)
  double gamma = 2.0;    // ellipticity constant, > 1
  std::variant<P1Kernel, P2Kernel, Q1Kernel, Q2Kernel, NonSymKernel> k;

  bool is_symmetric() const;   // Lambda(x,y) == Lambda(y,x) structurally
  bool has_weight() const;     // a symmetrizing weight nu exists
  bool is_random() const;
  const char* case_name() const;
};

KernelModel make_p1_model(int dim, double alpha, double gamma, TorusField lambda,
                          TorusField mu);
KernelModel make_p2_model(int dim, double alpha, double gamma, MacroRule a,
                          KernelTable lper);
KernelModel make_q1_model(int dim, double alpha, double gamma, RandomFieldSpec lambda_spec,
                          RandomFieldSpec mu_spec);
KernelModel make_q2_model(int dim, double alpha, double gamma, OmegaRule rule,
                          std::vector<double> direction = {});
// Rejects alpha >= 1 and tables whose measured Lipschitz modulus exceeds the
// declared bound (bound <= 0 adopts the measured modulus).
KernelModel make_nonsym_model(int dim, double alpha, double gamma, KernelTable lper,
                              double lipschitz_bound = 0.0);

// Realization handle for the random cases: everything derives from the seed.
struct Realization {
  uint64_t seed = 0;
};

// Lambda^eps(x, y).  Random cases require a realization.
double eval_kernel(const KernelModel& model, double eps, const Pt& x, const Pt& y,
                   const Realization* realization = nullptr);

// Probability-space coordinate of the rotation environment at site xi.
double omega_coordinate(const KernelModel& model, const Realization& realization,
                        const Pt& xi);

struct EllipticityReport {
  bool pass = true;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<std::string> violations;  // each names the offending cell/tuple
};

struct SymmetryReport {
  bool pass = true;
  double max_asymmetry = 0.0;
  std::string witness;
};

// Deterministic scan of table entries plus a seeded sample of rule arguments.
EllipticityReport check_ellipticity(const KernelModel& model, int budget = 4096);
// Swap symmetry for the structurally symmetric cases (P2, Q2); errors otherwise.
SymmetryReport check_symmetry(const KernelModel& model, int budget = 4096);

// nu(x) = mu(x/eps)/lambda(x/eps) for the product case, 1 for the locally
// periodic case; errors for models without a defined weight.
double symmetrizing_weight(const KernelModel& model, double eps, const Pt& x,
                           const Realization* realization = nullptr);

}  // namespace levyhom
