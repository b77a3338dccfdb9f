#include <cmath>

#include "doctest.h"
#include "levyhom/errors.hpp"
#include "levyhom/operator.hpp"
#include "levyhom/quadrature.hpp"
#include "support/oracles.hpp"

using namespace levyhom;

TEST_SUITE("quadrature") {

TEST_CASE("adjacent cell integral in one dimension has the closed form value") {
  // alpha = 1/2, unit cells: h^{1-a} (2 - 2^{1-a}) / (a (1-a)) = 4 (2 - sqrt 2)
  const double expected = 4.0 * (2.0 - std::sqrt(2.0));
  CHECK(near_diagonal_weight(1, 0.5, {1, 0}, 1.0) ==
        doctest::Approx(expected).epsilon(1e-13));
  // h-scaling: the integral is homogeneous of degree d - alpha.
  CHECK(near_diagonal_weight(1, 0.5, {1, 0}, 0.25) ==
        doctest::Approx(std::pow(0.25, 0.5) * expected).epsilon(1e-13));
  CHECK(near_diagonal_weight(1, 0.75, {3, 0}, 0.5) ==
        doctest::Approx(std::pow(0.5, 0.25) * near_diagonal_weight(1, 0.75, {3, 0}, 1.0))
            .epsilon(1e-13));
}

TEST_CASE("one dimensional integral at alpha = 1 uses the log form") {
  // Second difference of -log: log(b^2 / (a c)) with a=1, b=2, c=3.
  CHECK(near_diagonal_weight(1, 1.0, {2, 0}, 1.0) ==
        doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("divergent touching pairs are rejected") {
  CHECK_THROWS_AS(near_diagonal_weight(1, 1.0, {1, 0}, 1.0), NumericError);
  CHECK_THROWS_AS(near_diagonal_weight(1, 1.5, {1, 0}, 0.5), NumericError);
  CHECK_THROWS_AS(near_diagonal_weight(2, 1.0, {1, 0}, 1.0), NumericError);
  CHECK_THROWS_AS(near_diagonal_weight(2, 1.5, {0, 1}, 1.0), NumericError);
  CHECK_THROWS_AS(near_diagonal_weight(1, 0.5, {0, 0}, 1.0), ConfigError);
  CHECK_THROWS_AS(near_diagonal_weight(2, 0.5, {0, 0}, 1.0), ConfigError);
}

TEST_CASE("corner touching pairs converge for every alpha below two") {
  const double v = near_diagonal_weight(2, 1.9, {1, 1}, 1.0);
  CHECK(v > 0.0);
  CHECK(std::isfinite(v));
}

TEST_CASE("two dimensional integrals match the polar reference") {
  struct Case {
    int k1, k2;
    double alpha;
  };
  const Case cases[] = {{1, 0, 0.5}, {0, 1, 0.5},  {1, 1, 0.5}, {1, 1, 1.5},
                        {2, 1, 0.5}, {2, 1, 1.5},  {0, 3, 1.2}, {3, 2, 0.8},
                        {1, 0, 0.9}, {4, 4, 0.5}};
  for (const Case& c : cases) {
    const double got = near_diagonal_weight(2, c.alpha, {c.k1, c.k2}, 1.0);
    const double ref = testsupport::polar_pair_integral(c.alpha, c.k1, c.k2, 1.0);
    CAPTURE(c.k1);
    CAPTURE(c.k2);
    CAPTURE(c.alpha);
    CHECK(got == doctest::Approx(ref).epsilon(1e-8));
  }
  // h-scaling in d=2: degree 2 - alpha.
  CHECK(near_diagonal_weight(2, 0.5, {2, 1}, 0.125) ==
        doctest::Approx(std::pow(0.125, 1.5) * near_diagonal_weight(2, 0.5, {2, 1}, 1.0))
            .epsilon(1e-10));
}

TEST_CASE("tail mass closed forms") {
  CHECK(tail_mass(1, 0.5, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(tail_mass(1, 1.5, 2.0) ==
        doctest::Approx(2.0 * std::pow(2.0, -1.5) / 1.5).epsilon(1e-14));
  const double pi = std::acos(-1.0);
  CHECK(tail_mass(2, 0.5, 4.0) == doctest::Approx(2.0 * pi * 0.5 / 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(tail_mass(1, 0.5, 0.0), NumericError);
}

TEST_CASE("pair weights split into exact near field and midpoint far field") {
  const double h = 0.125, alpha = 0.5;
  // Far side of the split: plain midpoint value.
  CHECK(base_pair_weight(1, alpha, {10, 0}, h, 8.0 * h) ==
        doctest::Approx(h * std::pow(10.0 * h, -1.0 - alpha)).epsilon(1e-14));
  CHECK(base_pair_weight(2, alpha, {10, 3}, h, 8.0 * h) ==
        doctest::Approx(h * h * std::pow(h * std::sqrt(109.0), -2.0 - alpha))
            .epsilon(1e-14));
  // At the split radius the two quadratures agree within one percent.
  for (int dim : {1, 2}) {
    const double exact = base_pair_weight(dim, alpha, {8, 0}, h, 8.0 * h);
    const double mid = h * std::pow(h, dim - 1) * std::pow(8.0 * h, -dim - alpha);
    CAPTURE(dim);
    CHECK(std::abs(exact - mid) / mid < 0.01);
  }
}

TEST_CASE("touching pairs with divergent integrals fall back to midpoint weights") {
  const double h = 0.25;
  CHECK(base_pair_weight(1, 1.5, {1, 0}, h, 4.0 * h) ==
        doctest::Approx(h * std::pow(h, -2.5)).epsilon(1e-14));
  CHECK(base_pair_weight(2, 1.2, {0, 1}, h, 4.0 * h) ==
        doctest::Approx(h * h * std::pow(h, -3.2)).epsilon(1e-14));
  // Sub-unit alpha keeps the exact value, which exceeds the midpoint one.
  CHECK(base_pair_weight(1, 0.5, {1, 0}, h, 4.0 * h) > h * std::pow(h, -1.5));
}

TEST_CASE("adaptive line integration is exact on smooth data") {
  const double pi = std::acos(-1.0);
  CHECK(integrate_1d([](double x) { return std::sin(x); }, 0.0, pi, 1e-13) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate_1d([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-13) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

}  // TEST_SUITE
