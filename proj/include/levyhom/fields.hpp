#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "levyhom/geometry.hpp"

namespace levyhom {

// Piecewise-constant 1-periodic field on [0,1)^d, sampled on uniform cells.
// Immutable after construction.
struct TorusField {
  int dim = 1;
  int n = 1;
  std::vector<double> samples;  // n^dim values, row-major in d=2

  int cell_count() const;
  Pt cell_center(int flat) const;
  int cell_index(const Pt& xi) const;  // periodic wrap
  double value_at(const Pt& xi) const;
  double min_value() const;
  double max_value() const;
};

// Evaluates the rule at cell centers; rejects non-finite samples by cell.
TorusField make_torus_field(int dim, int n, const std::function<double(const Pt&)>& rule);
TorusField make_torus_field(int dim, int n, std::vector<double> samples);

// Mean over cells; exact for the piecewise-constant representation.
double cell_average(const TorusField& f);
// Mean of the pointwise ratio mu/lambda over cells of a shared grid.
double cell_average_ratio(const TorusField& mu, const TorusField& lambda);

TorusField load_torus_field(const std::string& path, int dim);
void save_torus_field(const std::string& path, const TorusField& f);

// ---------------------------------------------------------------------------
// Stationary ergodic field descriptions.
//
// Checkerboard: iid draws from the state list on unit cells, with one uniform
// global shift per realization so the law is translation invariant.
// Rotation: the state list is read as a piecewise-constant profile on the
// probability space [0,1); the field at xi evaluates the profile at
// omega0 + direction . xi (mod 1).
enum class FieldKind { Checkerboard, Rotation };

struct RandomFieldSpec {
  FieldKind kind = FieldKind::Checkerboard;
  std::vector<double> states;          // checkerboard: values; rotation: profile
  double cell_size = 1.0;              // checkerboard cell edge
  uint64_t stream = 0;                 // sub-seed; equal streams => same draws
  std::vector<double> direction;       // rotation; empty selects the default
};

bool operator==(const RandomFieldSpec& a, const RandomFieldSpec& b);

// Default rotation direction: (sqrt 2) in d=1, (1, sqrt 2) in d=2.
std::vector<double> rotation_direction(const RandomFieldSpec& spec, int dim);

void validate_field_spec(const RandomFieldSpec& spec, int dim);

// Point evaluation of the realization identified by (spec, seed).
double field_value(const RandomFieldSpec& spec, uint64_t seed, int dim, const Pt& xi);

// Expectation of g under the single-site law (checkerboard: uniform over
// states; rotation: Haar measure, exact for the piecewise-constant profile).
double field_expectation(const RandomFieldSpec& spec,
                         const std::function<double(double)>& g);
double field_expectation(const RandomFieldSpec& spec);

// Sampled window of one realization, exportable as a matrix file.  dx is the
// sampling step; values are taken at sample-cell centers.
struct FieldRealization {
  RandomFieldSpec spec;
  uint64_t seed = 0;
  Box window;
  double dx = 1.0;
  std::vector<int> shape;  // cells per axis
  std::vector<double> values;
};

FieldRealization sample_realization(const RandomFieldSpec& spec, uint64_t seed,
                                    const Box& window, double dx);
void save_realization(const std::string& path, const FieldRealization& r);

// Spatial average of one realization over [0, box_side)^d (midpoint rule on
// a fine subgrid; exact up to cell-boundary splitting for checkerboards).
double birkhoff_average(const RandomFieldSpec& spec, int dim, double box_side,
                        uint64_t seed);

}  // namespace levyhom
