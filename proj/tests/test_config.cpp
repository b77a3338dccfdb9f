#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>

#include "doctest.h"
#include "levyhom/config.hpp"
#include "levyhom/errors.hpp"
#include "levyhom/fields.hpp"
#include "levyhom/kernels.hpp"

using namespace levyhom;

namespace {

std::string p1_text() {
  return R"({
    "case": "p1",
    "alpha": 0.5,
    "gamma": 3.0,
    "lambda": {"values": [1.0, 0.3333333333333333]},
    "mu": {"values": [1.0, 3.0]},
    "eps": [0.25, 0.125],
    "r_dom": 1.0
  })";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("a product case config parses with defaults materialized") {
  const RunConfig rc = parse_run_config(p1_text(), "");
  CHECK(rc.case_tag == "p1");
  CHECK(std::string(rc.sweep.model.case_name()) == "p1");
  CHECK(rc.sweep.model.alpha == 0.5);
  CHECK(rc.sweep.model.gamma == 3.0);
  CHECK(rc.sweep.m == 1.0);
  CHECK(rc.sweep.p == 2.0);
  CHECK(rc.sweep.refine == 8);
  CHECK(rc.sweep.r_dom == 1.0);
  CHECK(rc.sweep.eps_list == std::vector<double>{0.25, 0.125});
  CHECK(rc.sweep.f);
  CHECK(rc.out == ".");
  CHECK(rc.seed == 0);

  // The echoed document is a valid config in its own right.
  const RunConfig back = parse_run_config(rc.echo, "");
  CHECK(back.case_tag == rc.case_tag);
  CHECK(back.sweep.eps_list == rc.sweep.eps_list);
  CHECK(back.echo == rc.echo);
}

TEST_CASE("unknown keys are rejected by dotted path") {
  std::string text = p1_text();
  text.insert(text.rfind('}'), R"(, "epz": 1)");
  CHECK_THROWS_WITH_AS(parse_run_config(text, ""),
                       doctest::Contains("unknown config key epz"), ConfigError);

  std::string nested = p1_text();
  const auto pos = nested.find("\"values\"");
  nested.replace(pos, 8, "\"valuez\"");
  CHECK_THROWS_WITH_AS(parse_run_config(nested, ""),
                       doctest::Contains("lambda.valuez"), ConfigError);
}

TEST_CASE("missing and mistyped keys name themselves") {
  CHECK_THROWS_WITH_AS(parse_run_config(R"({"case": "p1", "gamma": 2.0})", ""),
                       doctest::Contains("missing required config key alpha"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config(R"({"case": "p1", "alpha": "half", "gamma": 2.0})", ""),
      doctest::Contains("alpha must be a number"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("not json", ""),
                       doctest::Contains("not valid JSON"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_run_config(R"({"case": "p9", "alpha": 0.5, "gamma": 2.0})", ""),
      doctest::Contains("case must be one of"), ConfigError);
}

TEST_CASE("eps accepts a single number and seeds must be nonnegative integers") {
  std::string text = p1_text();
  const auto pos = text.find("[0.25, 0.125]");
  text.replace(pos, 13, "0.5");
  const RunConfig rc = parse_run_config(text, "");
  CHECK(rc.sweep.eps_list == std::vector<double>{0.5});

  std::string bad = p1_text();
  bad.insert(bad.rfind('}'), R"(, "seeds": [1, -2])");
  CHECK_THROWS_WITH_AS(parse_run_config(bad, ""),
                       doctest::Contains("nonnegative"), ConfigError);
}

TEST_CASE("random case configs choose independent default streams") {
  const std::string text = R"({
    "case": "q1",
    "alpha": 0.5,
    "gamma": 3.0,
    "lambda": {"states": [1.0, 0.3333333333333333]},
    "mu": {"states": [1.0, 3.0]},
    "eps": [0.25],
    "seeds": [1, 2, 3]
  })";
  const RunConfig rc = parse_run_config(text, "");
  const auto& k = std::get<Q1Kernel>(rc.sweep.model.k);
  CHECK(k.lambda_spec.stream == 0);
  CHECK(k.mu_spec.stream == 1);
  CHECK(k.lambda_spec.kind == FieldKind::Checkerboard);
  CHECK(rc.sweep.seeds == std::vector<uint64_t>{1, 2, 3});
}

TEST_CASE("generated kernel tables cover the sin pair and constant rules") {
  const std::string text = R"({
    "case": "nonsym",
    "alpha": 0.5,
    "gamma": 4.0,
    "table": {"n": 16, "rule": "sin_pair", "base": 2.0, "amp_zeta": 0.5, "amp_eta": 0.25}
  })";
  const RunConfig rc = parse_run_config(text, "");
  const auto& k = std::get<NonSymKernel>(rc.sweep.model.k);
  CHECK(k.lper.n == 16);
  CHECK(k.lper.at(0, 0) > 1.0);

  const std::string flat = R"({
    "case": "nonsym",
    "dim": 2,
    "alpha": 0.5,
    "gamma": 4.0,
    "table": {"n": 4, "rule": "sin_pair", "base": 2.0}
  })";
  CHECK_THROWS_WITH_AS(parse_run_config(flat, ""),
                       doctest::Contains("one-dimensional"), ConfigError);
}

TEST_CASE("locally periodic and environment cases parse their rules") {
  const std::string p2 = R"({
    "case": "p2",
    "alpha": 0.5,
    "gamma": 3.0,
    "macro": {"rule": "expdist", "base": 1.0, "amplitude": 0.5},
    "table": {"n": 4, "rule": "constant", "base": 2.0}
  })";
  CHECK(parse_run_config(p2, "").case_tag == "p2");

  const std::string q2 = R"({
    "case": "q2",
    "alpha": 0.5,
    "gamma": 3.0,
    "omega": {"rule": "product_cos", "base": 2.0, "amplitude": 0.5},
    "box": {"lo": [0.0], "hi": [1.0]}
  })";
  const RunConfig rc = parse_run_config(q2, "");
  CHECK(rc.has_box);
  CHECK(rc.box.lo[0] == 0.0);
  CHECK(rc.box.hi[0] == 1.0);

  const std::string bad_box = R"({
    "case": "q2",
    "alpha": 0.5,
    "gamma": 3.0,
    "omega": {"rule": "constant", "base": 1.0},
    "box": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]}
  })";
  CHECK_THROWS_WITH_AS(parse_run_config(bad_box, ""),
                       doctest::Contains("one entry per axis"), ConfigError);
}

TEST_CASE("file references resolve relative to the config directory") {
  std::filesystem::create_directories("cfgdir");
  {
    std::ofstream out("cfgdir/lam.txt");
    out << "1 0.5\n";
  }
  {
    std::ofstream out("cfgdir/mu.txt");
    out << "1 2\n";
  }
  const std::string text = R"({
    "case": "p1",
    "alpha": 0.5,
    "gamma": 3.0,
    "lambda": {"file": "lam.txt"},
    "mu": {"file": "mu.txt"},
    "eps": [0.25]
  })";
  const RunConfig rc = parse_run_config(text, "cfgdir");
  const auto& k = std::get<P1Kernel>(rc.sweep.model.k);
  CHECK(k.lambda.samples == std::vector<double>{1.0, 0.5});
  CHECK(rc.echo.find("cfgdir/lam.txt") != std::string::npos);

  CHECK_THROWS_AS(parse_run_config(text, "missing_dir"), IoError);
  std::filesystem::remove_all("cfgdir");
}

TEST_CASE("load_run_config reads from disk and reports unreadable paths") {
  const char* path = "tmp_cfg_load.json";
  {
    std::ofstream out(path);
    out << p1_text();
  }
  const RunConfig rc = load_run_config(path);
  CHECK(rc.case_tag == "p1");
  std::remove(path);
  CHECK_THROWS_WITH_AS(load_run_config("tmp_cfg_absent.json"),
                       doctest::Contains("cannot read"), IoError);
}

TEST_CASE("source specs accept bump parameters and reject bad radii") {
  std::string text = p1_text();
  text.insert(text.rfind('}'), R"(, "f": {"bump": {"radius": 0.5, "height": 2.0}})");
  const RunConfig rc = parse_run_config(text, "");
  CHECK(rc.sweep.f(Pt{0.0, 0.0}) == 2.0);
  CHECK(rc.sweep.f(Pt{0.6, 0.0}) == 0.0);

  std::string bad = p1_text();
  bad.insert(bad.rfind('}'), R"(, "f": {"bump": {"radius": 0.0}})");
  CHECK_THROWS_WITH_AS(parse_run_config(bad, ""),
                       doctest::Contains("f.bump.radius"), ConfigError);
}

}  // TEST_SUITE
