#include <cmath>

#include "doctest.h"
#include "magspec/errors.hpp"
#include "magspec/expression.hpp"
#include "oracles.hpp"

using namespace magspec;

TEST_CASE("arithmetic, precedence and functions") {
  const Point x{2, 3, 0.5};
  CHECK(Expression::parse("1 + 2 * 3", 2).evaluate(x) == 7);
  CHECK(Expression::parse("-x1^2", 2).evaluate(x) == -4);
  CHECK(Expression::parse("2^3^2", 2).evaluate(x) == 512);
  CHECK(Expression::parse("x1 / x2 - 1", 2).evaluate(x) == doctest::Approx(-1.0 / 3));
  CHECK(Expression::parse("sin(pi/2) + cos(0) + exp(0) + log(1)", 2).evaluate(x) == doctest::Approx(3));
  CHECK(Expression::parse("sqrt(x1*8) + abs(-x2)", 2).evaluate(x) == doctest::Approx(7));
  CHECK(Expression::parse("min(x1, x2) + max(x1, x2)", 2).evaluate(x) == 5);
  CHECK(Expression::parse("x3 * 4", 3).evaluate(x) == 2);
  CHECK(Expression::parse("1e-1 * 10", 1).evaluate(x) == doctest::Approx(1));
}

TEST_CASE("malformed expressions raise config errors") {
  CHECK_THROWS_AS(Expression::parse("1 +", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(x1", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(x1)", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x3", 2), ConfigError);
  CHECK_THROWS_AS(Expression::parse("", 2), ConfigError);
}

TEST_CASE("symbolic derivatives agree with central differences") {
  const char* texts[] = {"x1^2*x2 - 3*x2", "sin(x1*x2) + exp(-x1^2)", "log(1 + x1^2 + x2^2)",
                         "sqrt(1 + x1^2) / (2 + cos(x2))", "x1^3 - x2^2 * x1"};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  for (const char* t : texts) {
    const auto e = Expression::parse(t, 2);
    for (int trial = 0; trial < 10; ++trial) {
      const Point x{U(rng), U(rng), 0};
      for (int ax = 0; ax < 2; ++ax) {
        const double fd = oracle::partial([&](const oracle::Vec3& y) { return e.evaluate(y); }, x, ax);
        CHECK(e.derivative(ax).evaluate(x) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("constants fold and print") {
  CHECK(Expression::parse("2*3", 2).is_constant());
  CHECK_FALSE(Expression::parse("2*x1", 2).is_constant());
  CHECK(Expression::parse("x1^2", 2).derivative(1).is_constant());
  const auto e = Expression::parse("x1*x2 + 1", 2);
  const auto back = Expression::parse(e.to_string(), 2);
  CHECK(back.evaluate(Point{0.3, -2, 0}) == doctest::Approx(e.evaluate(Point{0.3, -2, 0})));
}
