#include "levyhom/fields.hpp"

#include <algorithm>
#include <cmath>

#include "levyhom/errors.hpp"
#include "levyhom/matrix_io.hpp"
#include "levyhom/rng.hpp"

namespace levyhom {

namespace {

void check_dim(int dim) {
  if (dim != 1 && dim != 2) {
    throw ConfigError("dimension must be 1 or 2, got " + std::to_string(dim));
  }
}

// Word tags keeping the different random draws of one spec independent.
constexpr uint64_t kTagShift = 0x73686966740000ull;
constexpr uint64_t kTagCell = 0x63656c6c0000ull;
constexpr uint64_t kTagOmega = 0x6f6d6567610000ull;

}  // namespace

int TorusField::cell_count() const {
  int c = n;
  for (int k = 1; k < dim; ++k) c *= n;
  return c;
}

Pt TorusField::cell_center(int flat) const {
  Pt p{0.0, 0.0};
  if (dim == 1) {
    p[0] = (flat + 0.5) / n;
  } else {
    p[0] = (flat / n + 0.5) / n;
    p[1] = (flat % n + 0.5) / n;
  }
  return p;
}

int TorusField::cell_index(const Pt& xi) const {
  int idx = 0;
  for (int k = 0; k < dim; ++k) {
    int c = static_cast<int>(frac01(xi[k]) * n);
    if (c >= n) c = n - 1;
    idx = idx * n + c;
  }
  return idx;
}

double TorusField::value_at(const Pt& xi) const { return samples[cell_index(xi)]; }

double TorusField::min_value() const {
  return *std::min_element(samples.begin(), samples.end());
}

double TorusField::max_value() const {
  return *std::max_element(samples.begin(), samples.end());
}

TorusField make_torus_field(int dim, int n, const std::function<double(const Pt&)>& rule) {
  check_dim(dim);
  if (n < 1) throw ConfigError("field resolution must be >= 1");
  TorusField f;
  f.dim = dim;
  f.n = n;
  f.samples.resize(static_cast<size_t>(f.cell_count()));
  for (int i = 0; i < f.cell_count(); ++i) {
    double v = rule(f.cell_center(i));
    if (!std::isfinite(v)) {
      throw NumericError("non-finite field sample at cell " + std::to_string(i));
    }
    f.samples[static_cast<size_t>(i)] = v;
  }
  return f;
}

TorusField make_torus_field(int dim, int n, std::vector<double> samples) {
  check_dim(dim);
  if (n < 1) throw ConfigError("field resolution must be >= 1");
  TorusField f;
  f.dim = dim;
  f.n = n;
  if (static_cast<int>(samples.size()) != f.cell_count()) {
    throw ConfigError("field table has " + std::to_string(samples.size()) +
                      " entries, expected " + std::to_string(f.cell_count()));
  }
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw NumericError("non-finite field sample at cell " + std::to_string(i));
    }
  }
  f.samples = std::move(samples);
  return f;
}

double cell_average(const TorusField& f) {
  double s = 0.0;
  for (double v : f.samples) s += v;
  return s / f.cell_count();
}

double cell_average_ratio(const TorusField& mu, const TorusField& lambda) {
  if (mu.dim != lambda.dim || mu.n != lambda.n) {
    throw ConfigError("ratio average needs fields on the same torus grid");
  }
  double s = 0.0;
  for (int i = 0; i < mu.cell_count(); ++i) {
    double den = lambda.samples[static_cast<size_t>(i)];
    if (den == 0.0) throw NumericError("zero denominator in ratio at cell " + std::to_string(i));
    s += mu.samples[static_cast<size_t>(i)] / den;
  }
  return s / mu.cell_count();
}

TorusField load_torus_field(const std::string& path, int dim) {
  check_dim(dim);
  Matrix m = read_matrix(path);
  if (dim == 1) {
    if (m.rows != 1) throw IoError(path + ": expected a single row for a 1-d field");
    return make_torus_field(1, m.cols, std::move(m.v));
  }
  if (m.rows != m.cols) {
    throw IoError(path + ": expected a square matrix for a 2-d field");
  }
  return make_torus_field(2, m.rows, std::move(m.v));
}

void save_torus_field(const std::string& path, const TorusField& f) {
  Matrix m;
  if (f.dim == 1) {
    m.rows = 1;
    m.cols = f.n;
  } else {
    m.rows = f.n;
    m.cols = f.n;
  }
  m.v = f.samples;
  write_matrix(path, m);
}

// ---------------------------------------------------------------------------

bool operator==(const RandomFieldSpec& a, const RandomFieldSpec& b) {
  return a.kind == b.kind && a.states == b.states && a.cell_size == b.cell_size &&
         a.stream == b.stream && a.direction == b.direction;
}

std::vector<double> rotation_direction(const RandomFieldSpec& spec, int dim) {
  if (!spec.direction.empty()) {
    if (static_cast<int>(spec.direction.size()) != dim) {
      throw ConfigError("rotation direction has wrong dimension");
    }
    return spec.direction;
  }
  if (dim == 1) return {std::sqrt(2.0)};
  return {1.0, std::sqrt(2.0)};
}

void validate_field_spec(const RandomFieldSpec& spec, int dim) {
  check_dim(dim);
  if (spec.states.empty()) throw ConfigError("field spec needs a non-empty state list");
  for (double s : spec.states) {
    if (!std::isfinite(s)) throw NumericError("non-finite state value in field spec");
  }
  if (spec.kind == FieldKind::Checkerboard && spec.cell_size <= 0.0) {
    throw ConfigError("checkerboard cell size must be positive");
  }
  if (spec.kind == FieldKind::Rotation) rotation_direction(spec, dim);  // dimension check
}

double field_value(const RandomFieldSpec& spec, uint64_t seed, int dim, const Pt& xi) {
  const auto nstates = static_cast<uint64_t>(spec.states.size());
  if (spec.kind == FieldKind::Checkerboard) {
    uint64_t cell[2] = {0, 0};
    for (int k = 0; k < dim; ++k) {
      double shift = u01(hash_words(seed, {spec.stream, kTagShift, static_cast<uint64_t>(k)}));
      auto c = static_cast<int64_t>(std::floor(xi[k] / spec.cell_size - shift));
      cell[k] = static_cast<uint64_t>(c);
    }
    uint64_t h = hash_words(seed, {spec.stream, kTagCell, cell[0], cell[1]});
    return spec.states[static_cast<size_t>(h % nstates)];
  }
  // Rotation: profile lookup along the orbit of the shift dynamical system.
  double omega0 = u01(hash_words(seed, {spec.stream, kTagOmega}));
  auto dir = rotation_direction(spec, dim);
  double t = omega0;
  for (int k = 0; k < dim; ++k) t += dir[static_cast<size_t>(k)] * xi[k];
  auto idx = static_cast<size_t>(frac01(t) * nstates);
  if (idx >= nstates) idx = nstates - 1;
  return spec.states[idx];
}

double field_expectation(const RandomFieldSpec& spec,
                         const std::function<double(double)>& g) {
  if (spec.states.empty()) throw ConfigError("field spec needs a non-empty state list");
  double s = 0.0;
  for (double v : spec.states) s += g(v);
  return s / static_cast<double>(spec.states.size());
}

double field_expectation(const RandomFieldSpec& spec) {
  return field_expectation(spec, [](double v) { return v; });
}

FieldRealization sample_realization(const RandomFieldSpec& spec, uint64_t seed,
                                    const Box& window, double dx) {
  validate_field_spec(spec, window.dim);
  if (dx <= 0.0) throw ConfigError("realization sampling step must be positive");
  FieldRealization r;
  r.spec = spec;
  r.seed = seed;
  r.window = window;
  r.dx = dx;
  size_t total = 1;
  for (int k = 0; k < window.dim; ++k) {
    double len = window.hi[k] - window.lo[k];
    if (len <= 0.0) throw ConfigError("realization window is empty");
    int cells = static_cast<int>(std::ceil(len / dx - 1e-12));
    r.shape.push_back(cells);
    total *= static_cast<size_t>(cells);
  }
  r.values.resize(total);
  if (window.dim == 1) {
    for (int i = 0; i < r.shape[0]; ++i) {
      Pt p{window.lo[0] + (i + 0.5) * dx, 0.0};
      r.values[static_cast<size_t>(i)] = field_value(spec, seed, 1, p);
    }
  } else {
    for (int i = 0; i < r.shape[0]; ++i) {
      for (int j = 0; j < r.shape[1]; ++j) {
        Pt p{window.lo[0] + (i + 0.5) * dx, window.lo[1] + (j + 0.5) * dx};
        r.values[static_cast<size_t>(i) * r.shape[1] + j] = field_value(spec, seed, 2, p);
      }
    }
  }
  return r;
}

void save_realization(const std::string& path, const FieldRealization& r) {
  Matrix m;
  if (r.window.dim == 1) {
    m.rows = 1;
    m.cols = r.shape[0];
  } else {
    m.rows = r.shape[0];
    m.cols = r.shape[1];
  }
  m.v = r.values;
  write_matrix(path, m);
}

double birkhoff_average(const RandomFieldSpec& spec, int dim, double box_side,
                        uint64_t seed) {
  validate_field_spec(spec, dim);
  if (box_side <= 0.0) throw ConfigError("averaging box side must be positive");
  // 16 midpoint samples per unit per axis resolve the checkerboard cells up
  // to boundary slivers and the rotation profiles smoothly.
  const int per_unit = 16;
  const int npts = std::max(1, static_cast<int>(std::ceil(box_side * per_unit)));
  const double step = box_side / npts;
  double s = 0.0;
  if (dim == 1) {
    for (int i = 0; i < npts; ++i) {
      s += field_value(spec, seed, 1, Pt{(i + 0.5) * step, 0.0});
    }
    return s / npts;
  }
  for (int i = 0; i < npts; ++i) {
    for (int j = 0; j < npts; ++j) {
      s += field_value(spec, seed, 2, Pt{(i + 0.5) * step, (j + 0.5) * step});
    }
  }
  return s / (static_cast<double>(npts) * npts);
}

}  // namespace levyhom
