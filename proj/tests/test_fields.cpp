#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "levyhom/errors.hpp"
#include "levyhom/fields.hpp"
#include "levyhom/rng.hpp"

using namespace levyhom;

namespace {
const double kTwoPi = 2.0 * std::acos(-1.0);
}

TEST_SUITE("fields") {

TEST_CASE("sampled cosine field has the analytic mean and range") {
  TorusField f = make_torus_field(
      1, 256, [](const Pt& p) { return 2.0 + std::cos(kTwoPi * p[0]); });
  CHECK(cell_average(f) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.min_value() >= 1.0);
  CHECK(f.min_value() < 1.001);
  CHECK(f.max_value() <= 3.0);
  CHECK(f.max_value() > 2.999);
}

TEST_CASE("two state field evaluates by periodic cell lookup") {
  TorusField f = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  CHECK(f.value_at(Pt{0.25, 0.0}) == 1.0);
  CHECK(f.value_at(Pt{0.75, 0.0}) == 3.0);
  CHECK(f.value_at(Pt{1.25, 0.0}) == 1.0);
  CHECK(f.value_at(Pt{-0.25, 0.0}) == 3.0);
}

TEST_CASE("ratio averages are exact on shared grids") {
  TorusField mu = make_torus_field(1, 2, std::vector<double>{1.0, 3.0});
  TorusField lam = make_torus_field(1, 2, std::vector<double>{3.0, 1.0});
  CHECK(cell_average_ratio(mu, lam) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  TorusField other = make_torus_field(1, 4, std::vector<double>{1, 1, 1, 1});
  CHECK_THROWS_AS(cell_average_ratio(mu, other), ConfigError);
  TorusField zero = make_torus_field(1, 2, std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(cell_average_ratio(mu, zero), NumericError);
}

TEST_CASE("field construction rejects bad data") {
  CHECK_THROWS_AS(make_torus_field(3, 4, std::vector<double>(64, 1.0)), ConfigError);
  CHECK_THROWS_AS(make_torus_field(1, 4, std::vector<double>(3, 1.0)), ConfigError);
  CHECK_THROWS_AS(
      make_torus_field(1, 4, [](const Pt& p) { return 1.0 / (p[0] - p[0]); }),
      NumericError);
}

TEST_CASE("field files round trip") {
  TorusField f = make_torus_field(
      2, 8, [](const Pt& p) { return 2.0 + std::sin(kTwoPi * (p[0] - p[1])); });
  const char* path = "tmp_field_roundtrip.txt";
  save_torus_field(path, f);
  TorusField g = load_torus_field(path, 2);
  REQUIRE(g.n == f.n);
  CHECK(g.samples == f.samples);
  std::remove(path);
  CHECK_THROWS_AS(load_torus_field("no_such_field_file.txt", 1), IoError);
}

TEST_CASE("checkerboard draws are deterministic and take listed values") {
  RandomFieldSpec spec;
  spec.states = {1.0, 3.0};
  validate_field_spec(spec, 1);
  SeqRng rng(7);
  int seen_one = 0, seen_three = 0;
  for (int i = 0; i < 200; ++i) {
    Pt p{rng.next_in(-20.0, 20.0), 0.0};
    const double v = field_value(spec, 42, 1, p);
    CHECK(field_value(spec, 42, 1, p) == v);
    if (v == 1.0) ++seen_one;
    if (v == 3.0) ++seen_three;
  }
  CHECK(seen_one + seen_three == 200);
  CHECK(seen_one > 20);
  CHECK(seen_three > 20);
}

TEST_CASE("seeds and streams change the realization") {
  RandomFieldSpec a;
  a.states = {1.0, 3.0};
  RandomFieldSpec b = a;
  b.stream = 1;
  int differ_seed = 0, differ_stream = 0;
  for (int i = 0; i < 64; ++i) {
    Pt p{0.5 + i, 0.0};
    if (field_value(a, 1, 1, p) != field_value(a, 2, 1, p)) ++differ_seed;
    if (field_value(a, 1, 1, p) != field_value(b, 1, 1, p)) ++differ_stream;
  }
  CHECK(differ_seed > 8);
  CHECK(differ_stream > 8);
}

TEST_CASE("equal streams couple two state lists comonotonically") {
  RandomFieldSpec lam;
  lam.states = {1.0, 2.0};
  RandomFieldSpec mu;
  mu.states = {1.0, 3.0};
  // Same stream: both fields read the same site index draw, so the small
  // and large states appear together.
  for (int i = 0; i < 128; ++i) {
    Pt p{0.37 * i - 11.0, 0.0};
    const bool lam_low = field_value(lam, 9, 1, p) == 1.0;
    const bool mu_low = field_value(mu, 9, 1, p) == 1.0;
    CHECK(lam_low == mu_low);
  }
}

TEST_CASE("single site expectations") {
  RandomFieldSpec cb;
  cb.states = {1.0, 3.0};
  CHECK(field_expectation(cb) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(field_expectation(cb, [](double v) { return v * v; }) ==
        doctest::Approx(5.0).epsilon(1e-15));
  RandomFieldSpec rot;
  rot.kind = FieldKind::Rotation;
  rot.states = {1.0, 2.0, 4.0};
  CHECK(field_expectation(rot) == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("spec validation rejects malformed inputs") {
  RandomFieldSpec empty;
  empty.states = {};
  CHECK_THROWS_AS(validate_field_spec(empty, 1), ConfigError);
  RandomFieldSpec bad_cell;
  bad_cell.states = {1.0};
  bad_cell.cell_size = 0.0;
  CHECK_THROWS_AS(validate_field_spec(bad_cell, 1), ConfigError);
  RandomFieldSpec bad_dir;
  bad_dir.kind = FieldKind::Rotation;
  bad_dir.states = {1.0, 2.0};
  bad_dir.direction = {1.0, 2.0};
  CHECK_THROWS_AS(validate_field_spec(bad_dir, 1), ConfigError);
}

TEST_CASE("spatial averages approach the expectation as the window grows") {
  // Mean absolute deviation over 30 seeds, decreasing with the window side.
  for (FieldKind kind : {FieldKind::Checkerboard, FieldKind::Rotation}) {
    RandomFieldSpec spec;
    spec.kind = kind;
    spec.states = {1.0, 3.0};
    const double target = field_expectation(spec);
    double prev = 1e100;
    for (double side : {8.0, 32.0, 128.0}) {
      double dev = 0.0;
      for (uint64_t seed = 1; seed <= 30; ++seed) {
        dev += std::abs(birkhoff_average(spec, 1, side, seed) - target);
      }
      dev /= 30.0;
      CAPTURE(side);
      CHECK(dev < prev);
      prev = dev;
    }
    CHECK(prev < 0.1);
  }
}

TEST_CASE("two dimensional realizations sample a window") {
  RandomFieldSpec spec;
  spec.states = {1.0, 3.0};
  Box win;
  win.dim = 2;
  win.lo = {-2.0, -2.0};
  win.hi = {2.0, 2.0};
  FieldRealization r = sample_realization(spec, 5, win, 0.5);
  REQUIRE(r.shape == std::vector<int>{8, 8});
  REQUIRE(r.values.size() == 64);
  for (double v : r.values) CHECK((v == 1.0 || v == 3.0));
  const char* path = "tmp_realization.txt";
  save_realization(path, r);
  std::remove(path);
}

}  // TEST_SUITE
