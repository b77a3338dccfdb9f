#pragma once

#include <string>
#include <vector>

namespace levyhom {

// Plain-text matrix file: one row per line, whitespace-separated decimals.
// Values are written with enough digits that a round trip is bit-exact.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
};

Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& m);

std::string format_double(double x);

}  // namespace levyhom
