#include "levyhom/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levyhom/errors.hpp"
#include "levyhom/matrix_io.hpp"
#include "levyhom/rng.hpp"

namespace levyhom {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
}

void check_alpha_gamma(double alpha, double gamma) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw ConfigError("alpha must lie in (0,2)");
  if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
}

Pt scaled(int dim, const Pt& x, double eps) {
  Pt p{0.0, 0.0};
  for (int k = 0; k < dim; ++k) p[k] = x[k] / eps;
  return p;
}

}  // namespace

int KernelTable::size() const {
  int c = n;
  for (int k = 1; k < dim; ++k) c *= n;
  return c;
}

int KernelTable::cell_of(const Pt& xi) const {
  int idx = 0;
  for (int k = 0; k < dim; ++k) {
    int c = static_cast<int>(frac01(xi[k]) * n);
    if (c >= n) c = n - 1;
    idx = idx * n + c;
  }
  return idx;
}

Pt KernelTable::cell_center(int flat) const {
  Pt p{0.0, 0.0};
  if (dim == 1) {
    p[0] = (flat + 0.5) / n;
  } else {
    p[0] = (flat / n + 0.5) / n;
    p[1] = (flat % n + 0.5) / n;
  }
  return p;
}

double KernelTable::value_at(const Pt& xi, const Pt& eta) const {
  return at(cell_of(xi), cell_of(eta));
}

KernelTable make_kernel_table(int dim, int n,
                              const std::function<double(const Pt&, const Pt&)>& rule) {
  check_dim(dim);
  if (n < 1) throw ConfigError("kernel table resolution must be >= 1");
  KernelTable t;
  t.dim = dim;
  t.n = n;
  const int sz = t.size();
  t.v.resize(static_cast<size_t>(sz) * sz);
  for (int i = 0; i < sz; ++i) {
    for (int j = 0; j < sz; ++j) {
      double val = rule(t.cell_center(i), t.cell_center(j));
      if (!std::isfinite(val)) {
        throw NumericError("non-finite kernel value at cell pair (" + std::to_string(i) +
                           "," + std::to_string(j) + ")");
      }
      t.v[static_cast<size_t>(i) * sz + j] = val;
    }
  }
  return t;
}

KernelTable make_kernel_table(int dim, int n, std::vector<double> entries) {
  check_dim(dim);
  if (n < 1) throw ConfigError("kernel table resolution must be >= 1");
  KernelTable t;
  t.dim = dim;
  t.n = n;
  const size_t want = static_cast<size_t>(t.size()) * t.size();
  if (entries.size() != want) {
    throw ConfigError("kernel table has " + std::to_string(entries.size()) +
                      " entries, expected " + std::to_string(want));
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i])) {
      throw NumericError("non-finite kernel table entry at index " + std::to_string(i));
    }
  }
  t.v = std::move(entries);
  return t;
}

KernelTable load_kernel_table(const std::string& path, int dim) {
  Matrix m = read_matrix(path);
  if (m.rows != m.cols) throw IoError(path + ": kernel table must be square");
  int n = m.rows;
  if (dim == 2) {
    n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.rows))));
    if (n * n != m.rows) {
      throw IoError(path + ": 2-d kernel table side must be a perfect square");
    }
  }
  return make_kernel_table(dim, n, std::move(m.v));
}

void save_kernel_table(const std::string& path, const KernelTable& t) {
  Matrix m;
  m.rows = t.size();
  m.cols = t.size();
  m.v = t.v;
  write_matrix(path, m);
}

double table_lipschitz_modulus(const KernelTable& t) {
  const int sz = t.size();
  const double step = 1.0 / t.n;
  double mod = 0.0;
  // Neighbors along each torus axis, in both the first and second argument.
  auto neighbor = [&](int flat, int axis) {
    if (t.dim == 1) return (flat + 1) % t.n;
    int i = flat / t.n, j = flat % t.n;
    if (axis == 0) i = (i + 1) % t.n;
    else j = (j + 1) % t.n;
    return i * t.n + j;
  };
  for (int ci = 0; ci < sz; ++ci) {
    for (int cj = 0; cj < sz; ++cj) {
      for (int axis = 0; axis < t.dim; ++axis) {
        mod = std::max(mod, std::abs(t.at(neighbor(ci, axis), cj) - t.at(ci, cj)) / step);
        mod = std::max(mod, std::abs(t.at(ci, neighbor(cj, axis)) - t.at(ci, cj)) / step);
      }
    }
  }
  return mod;
}

double MacroRule::eval(int dim, const Pt& x, const Pt& y) const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Constant: return base;
    case Kind::ExpDist: return base + amplitude * std::exp(-dist(dim, x, y));
  }
  return 1.0;
}

double MacroRule::lo() const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Constant: return base;
    case Kind::ExpDist: return amplitude >= 0.0 ? base : base + amplitude;
  }
  return 1.0;
}

double MacroRule::hi() const {
  switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Constant: return base;
    case Kind::ExpDist: return amplitude >= 0.0 ? base + amplitude : base;
  }
  return 1.0;
}

double OmegaRule::eval(int, const Pt&, const Pt&, double w1, double w2) const {
  switch (kind) {
    case Kind::Constant:
      return base;
    case Kind::ProductCos:
      return (base + amplitude * std::cos(2.0 * kPi * w1)) *
             (base + amplitude * std::cos(2.0 * kPi * w2));
    case Kind::SinCross:
      return base + amplitude * std::sin(2.0 * kPi * w1) * std::sin(2.0 * kPi * w2);
  }
  return base;
}

double OmegaRule::lo() const {
  switch (kind) {
    case Kind::Constant: return base;
    case Kind::ProductCos: {
      double a = base - std::abs(amplitude), b = base + std::abs(amplitude);
      return std::min({a * a, a * b, b * b});
    }
    case Kind::SinCross: return base - std::abs(amplitude);
  }
  return base;
}

double OmegaRule::hi() const {
  switch (kind) {
    case Kind::Constant: return base;
    case Kind::ProductCos: {
      double a = base - std::abs(amplitude), b = base + std::abs(amplitude);
      return std::max({a * a, a * b, b * b});
    }
    case Kind::SinCross: return base + std::abs(amplitude);
  }
  return base;
}

bool KernelModel::is_symmetric() const {
  return std::holds_alternative<P2Kernel>(k) || std::holds_alternative<Q2Kernel>(k);
}

bool KernelModel::has_weight() const {
  return !std::holds_alternative<NonSymKernel>(k);
}

bool KernelModel::is_random() const {
  return std::holds_alternative<Q1Kernel>(k) || std::holds_alternative<Q2Kernel>(k);
}

const char* KernelModel::case_name() const {
  if (std::holds_alternative<P1Kernel>(k)) return "p1";
  if (std::holds_alternative<P2Kernel>(k)) return "p2";
  if (std::holds_alternative<Q1Kernel>(k)) return "q1";
  if (std::holds_alternative<Q2Kernel>(k)) return "q2";
  return "nonsym";
}

KernelModel make_p1_model(int dim, double alpha, double gamma, TorusField lambda,
                          TorusField mu) {
  check_dim(dim);
  check_alpha_gamma(alpha, gamma);
  if (lambda.dim != dim || mu.dim != dim) {
    throw ConfigError("field dimension does not match the model dimension");
  }
  KernelModel m;
  m.dim = dim;
  m.alpha = alpha;
  m.gamma = gamma;
  m.k = P1Kernel{std::move(lambda), std::move(mu)};
  return m;
}

KernelModel make_p2_model(int dim, double alpha, double gamma, MacroRule a,
                          KernelTable lper) {
  check_dim(dim);
  check_alpha_gamma(alpha, gamma);
  if (lper.dim != dim) throw ConfigError("kernel table dimension mismatch");
  KernelModel m;
  m.dim = dim;
  m.alpha = alpha;
  m.gamma = gamma;
  m.k = P2Kernel{a, std::move(lper)};
  return m;
}

KernelModel make_q1_model(int dim, double alpha, double gamma, RandomFieldSpec lambda_spec,
                          RandomFieldSpec mu_spec) {
  check_dim(dim);
  check_alpha_gamma(alpha, gamma);
  validate_field_spec(lambda_spec, dim);
  validate_field_spec(mu_spec, dim);
  KernelModel m;
  m.dim = dim;
  m.alpha = alpha;
  m.gamma = gamma;
  m.k = Q1Kernel{std::move(lambda_spec), std::move(mu_spec)};
  return m;
}

KernelModel make_q2_model(int dim, double alpha, double gamma, OmegaRule rule,
                          std::vector<double> direction) {
  check_dim(dim);
  check_alpha_gamma(alpha, gamma);
  if (!direction.empty() && static_cast<int>(direction.size()) != dim) {
    throw ConfigError("rotation direction has wrong dimension");
  }
  KernelModel m;
  m.dim = dim;
  m.alpha = alpha;
  m.gamma = gamma;
  m.k = Q2Kernel{rule, std::move(direction)};
  return m;
}

KernelModel make_nonsym_model(int dim, double alpha, double gamma, KernelTable lper,
                              double lipschitz_bound) {
  check_dim(dim);
  check_alpha_gamma(alpha, gamma);
  if (!(alpha < 1.0)) {
    throw ConfigError("the non-symmetric case requires alpha < 1");
  }
  if (lper.dim != dim) throw ConfigError("kernel table dimension mismatch");
  NonSymKernel ns;
  ns.lipschitz_modulus = table_lipschitz_modulus(lper);
  ns.lipschitz_bound = lipschitz_bound > 0.0 ? lipschitz_bound : ns.lipschitz_modulus;
  if (ns.lipschitz_modulus > ns.lipschitz_bound * (1.0 + 1e-12)) {
    throw ConfigError("kernel table violates the declared Lipschitz bound: modulus " +
                      format_double(ns.lipschitz_modulus) + " > " +
                      format_double(ns.lipschitz_bound));
  }
  ns.lper = std::move(lper);
  KernelModel m;
  m.dim = dim;
  m.alpha = alpha;
  m.gamma = gamma;
  m.k = std::move(ns);
  return m;
}

double omega_coordinate_impl(int dim, const std::vector<double>& direction,
                             uint64_t seed, const Pt& xi) {
  // One uniform starting point per realization; the orbit is deterministic.
  double omega0 = u01(hash_words(seed, {0x6f6d6567610000ull}));
  double t = omega0;
  for (int k = 0; k < dim; ++k) t += direction[static_cast<size_t>(k)] * xi[k];
  return frac01(t);
}

double omega_coordinate(const KernelModel& model, const Realization& realization,
                        const Pt& xi) {
  const auto* q2 = std::get_if<Q2Kernel>(&model.k);
  if (!q2) throw NumericError("omega coordinates are defined for the q2 case only");
  std::vector<double> dir = q2->direction;
  if (dir.empty()) dir = (model.dim == 1) ? std::vector<double>{std::sqrt(2.0)}
                                          : std::vector<double>{1.0, std::sqrt(2.0)};
  return omega_coordinate_impl(model.dim, dir, realization.seed, xi);
}

double eval_kernel(const KernelModel& model, double eps, const Pt& x, const Pt& y,
                   const Realization* realization) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (model.is_random() && realization == nullptr) {
    throw ConfigError("random kernel evaluation needs a realization");
  }
  const int dim = model.dim;
  const Pt xs = scaled(dim, x, eps);
  const Pt ys = scaled(dim, y, eps);
  if (const auto* p1 = std::get_if<P1Kernel>(&model.k)) {
    return p1->lambda.value_at(xs) * p1->mu.value_at(ys);
  }
  if (const auto* p2 = std::get_if<P2Kernel>(&model.k)) {
    return p2->a.eval(dim, x, y) * p2->lper.value_at(xs, ys);
  }
  if (const auto* q1 = std::get_if<Q1Kernel>(&model.k)) {
    return field_value(q1->lambda_spec, realization->seed, dim, xs) *
           field_value(q1->mu_spec, realization->seed, dim, ys);
  }
  if (const auto* q2 = std::get_if<Q2Kernel>(&model.k)) {
    double w1 = omega_coordinate(model, *realization, xs);
    double w2 = omega_coordinate(model, *realization, ys);
    return q2->rule.eval(dim, x, y, w1, w2);
  }
  const auto& ns = std::get<NonSymKernel>(model.k);
  return ns.lper.value_at(xs, ys);
}

namespace {

void scan_value(EllipticityReport& rep, const KernelModel& model, double v,
                const std::string& where) {
  rep.min_value = std::min(rep.min_value, v);
  rep.max_value = std::max(rep.max_value, v);
  const double lo = 1.0 / model.gamma, hi = model.gamma;
  const double slack = 1e-12 * model.gamma;
  if (v < lo - slack || v > hi + slack) {
    rep.pass = false;
    if (rep.violations.size() < 16) {
      rep.violations.push_back(where + ": value " + format_double(v) +
                               " outside [" + format_double(lo) + ", " +
                               format_double(hi) + "]");
    }
  }
}

}  // namespace

EllipticityReport check_ellipticity(const KernelModel& model, int budget) {
  EllipticityReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.max_value = -std::numeric_limits<double>::infinity();
  const int dim = model.dim;
  if (const auto* p1 = std::get_if<P1Kernel>(&model.k)) {
    // All kernel values are products of one lambda and one mu sample.
    for (int i = 0; i < p1->lambda.cell_count(); ++i) {
      for (int j = 0; j < p1->mu.cell_count(); ++j) {
        scan_value(rep, model, p1->lambda.samples[i] * p1->mu.samples[j],
                   "cells (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  } else if (const auto* p2 = std::get_if<P2Kernel>(&model.k)) {
    // Table entries exactly, times sampled macro factors.
    const int sz = p2->lper.size();
    const double alo = p2->a.lo(), ahi = p2->a.hi();
    if (alo <= 0.0) {
      rep.pass = false;
      rep.violations.push_back("macro factor is not positive");
    }
    for (int i = 0; i < sz; ++i) {
      for (int j = 0; j < sz; ++j) {
        double t = p2->lper.at(i, j);
        scan_value(rep, model, t * alo, "table cell (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") x macro min");
        scan_value(rep, model, t * ahi, "table cell (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") x macro max");
      }
    }
  } else if (const auto* q1 = std::get_if<Q1Kernel>(&model.k)) {
    for (size_t i = 0; i < q1->lambda_spec.states.size(); ++i) {
      for (size_t j = 0; j < q1->mu_spec.states.size(); ++j) {
        scan_value(rep, model, q1->lambda_spec.states[i] * q1->mu_spec.states[j],
                   "states (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  } else if (const auto* q2 = std::get_if<Q2Kernel>(&model.k)) {
    scan_value(rep, model, q2->rule.lo(), "rule range min");
    scan_value(rep, model, q2->rule.hi(), "rule range max");
    SeqRng rng(0x5eedull);
    for (int s = 0; s < budget; ++s) {
      Pt x{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      Pt y{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      scan_value(rep, model, q2->rule.eval(dim, x, y, rng.next(), rng.next()),
                 "sampled tuple " + std::to_string(s));
    }
  } else {
    const auto& ns = std::get<NonSymKernel>(model.k);
    const int sz = ns.lper.size();
    for (int i = 0; i < sz; ++i) {
      for (int j = 0; j < sz; ++j) {
        scan_value(rep, model, ns.lper.at(i, j),
                   "table cell (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  return rep;
}

SymmetryReport check_symmetry(const KernelModel& model, int budget) {
  SymmetryReport rep;
  const int dim = model.dim;
  if (const auto* p2 = std::get_if<P2Kernel>(&model.k)) {
    const int sz = p2->lper.size();
    for (int i = 0; i < sz; ++i) {
      for (int j = 0; j < sz; ++j) {
        double d = std::abs(p2->lper.at(i, j) - p2->lper.at(j, i));
        if (d > rep.max_asymmetry) {
          rep.max_asymmetry = d;
          rep.witness = "table cells (" + std::to_string(i) + "," + std::to_string(j) + ")";
        }
      }
    }
    SeqRng rng(0x5eedull);
    for (int s = 0; s < budget; ++s) {
      Pt x{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      Pt y{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      double d = std::abs(p2->a.eval(dim, x, y) - p2->a.eval(dim, y, x));
      if (d > rep.max_asymmetry) {
        rep.max_asymmetry = d;
        rep.witness = "macro factor at sampled pair " + std::to_string(s);
      }
    }
  } else if (const auto* q2 = std::get_if<Q2Kernel>(&model.k)) {
    SeqRng rng(0x5eedull);
    for (int s = 0; s < budget; ++s) {
      Pt x{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      Pt y{rng.next_in(-2, 2), dim == 2 ? rng.next_in(-2, 2) : 0.0};
      double w1 = rng.next(), w2 = rng.next();
      double d = std::abs(q2->rule.eval(dim, x, y, w1, w2) - q2->rule.eval(dim, y, x, w2, w1));
      if (d > rep.max_asymmetry) {
        rep.max_asymmetry = d;
        rep.witness = "sampled tuple " + std::to_string(s);
      }
    }
  } else {
    throw NumericError("swap symmetry is defined for the p2/q2 cases only");
  }
  rep.pass = (rep.max_asymmetry == 0.0);
  return rep;
}

double symmetrizing_weight(const KernelModel& model, double eps, const Pt& x,
                           const Realization* realization) {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  const Pt xs = scaled(model.dim, x, eps);
  if (const auto* p1 = std::get_if<P1Kernel>(&model.k)) {
    return p1->mu.value_at(xs) / p1->lambda.value_at(xs);
  }
  if (std::holds_alternative<P2Kernel>(model.k)) return 1.0;
  if (const auto* q1 = std::get_if<Q1Kernel>(&model.k)) {
    if (!realization) throw ConfigError("random weight evaluation needs a realization");
    return field_value(q1->mu_spec, realization->seed, model.dim, xs) /
           field_value(q1->lambda_spec, realization->seed, model.dim, xs);
  }
  if (std::holds_alternative<Q2Kernel>(model.k)) return 1.0;
  throw NumericError("no symmetrizing weight is defined for the non-symmetric case");
}

}  // namespace levyhom
