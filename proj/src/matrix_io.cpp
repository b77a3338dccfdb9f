#include "levyhom/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "levyhom/errors.hpp"

namespace levyhom {

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  Matrix m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream strm(line);
    std::vector<double> row;
    double x;
    while (strm >> x) row.push_back(x);
    if (!strm.eof()) {
      throw IoError(path + ":" + std::to_string(lineno) + ": non-numeric token");
    }
    if (row.empty()) continue;  // skip blank lines
    if (m.cols == 0) {
      m.cols = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != m.cols) {
      throw IoError(path + ":" + std::to_string(lineno) + ": ragged row (expected " +
                    std::to_string(m.cols) + " values, got " + std::to_string(row.size()) + ")");
    }
    m.v.insert(m.v.end(), row.begin(), row.end());
    ++m.rows;
  }
  if (m.rows == 0) throw IoError("empty matrix file: " + path);
  return m;
}

std::string format_double(double x) {
  // Shortest decimal form that parses back to the same double.
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matrix file: " + path);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (c) out << ' ';
      out << format_double(m.at(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace levyhom
