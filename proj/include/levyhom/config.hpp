#pragma once

#include <cstdint>
#include <string>

#include "levyhom/experiments.hpp"
#include "levyhom/geometry.hpp"

namespace levyhom {

// One experiment description parsed from a JSON config file.  Keys are
// schema-checked up front: unknown keys are rejected by dotted path, file
// paths are resolved relative to the config file, and defaults are
// materialized so the echoed document describes the run completely.
struct RunConfig {
  std::string case_tag;  // p1 | p2 | q1 | q2 | nonsym
  SweepConfig sweep;     // model plus source, grid and solver settings
  uint64_t seed = 0;     // single-run seed for cell/solve
  bool has_box = false;
  Box box;                    // ergodic quadrature window
  int table_n = 0;            // cell-problem resolution; 0 derives from fields
  int r_img = 8;              // cell-problem image truncation radius
  double lambda_shift = 0.0;  // cell-problem shift; 0 selects the default
  std::string out = ".";      // output directory
  std::string echo;           // resolved config document, serialized JSON
};

RunConfig parse_run_config(const std::string& text, const std::string& dir);
RunConfig load_run_config(const std::string& path);

}  // namespace levyhom
