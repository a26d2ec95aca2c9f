#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "magspec/capacity.hpp"
#include "magspec/errors.hpp"
#include "oracles.hpp"

using namespace magspec;

namespace {

Grid centered_grid(int dim, double h, double half) {
  const int n = static_cast<int>(std::round(2 * half / h)) + 1;
  return Grid(dim, Point{-half, -half, dim == 3 ? -half : 0.0}, h, MultiIndex{n, n, dim == 3 ? n : 1});
}

NodeSet offsets_to_set(const Grid& g, const std::vector<std::array<int, 3>>& off) {
  std::vector<std::size_t> idx;
  for (const auto& o : off) {
    Point x{};
    for (int i = 0; i < g.dim(); ++i) x[i] = o[i] * g.spacing();
    idx.push_back(g.locate(x));
  }
  std::sort(idx.begin(), idx.end());
  return NodeSet(g, idx);
}

}  // namespace

TEST_CASE("capacity equals a dense direct solve") {
  for (int dim : {2, 3}) {
    const double h = 0.25, R = 1.6;
    const Grid g = centered_grid(dim, h, 2.5);
    const std::vector<std::array<int, 3>> F{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 1, 0}};
    const auto res = wiener_capacity(g, offsets_to_set(g, F), BallRegion(Point{}, R));
    const double ref = oracle::dense_capacity(dim, h, R, F);
    CHECK(res.value == doctest::Approx(ref).epsilon(1e-8));
    CHECK(res.flux == doctest::Approx(ref).epsilon(1e-6));
    CHECK(res.solver_residual <= 1e-10);
  }
}

TEST_CASE("capacity is monotone and vanishes on the empty set") {
  const Grid g = centered_grid(2, 0.1, 3);
  const BallRegion outer(Point{}, 2.0);
  CHECK(wiener_capacity(g, NodeSet(g), outer).value == 0);
  const double a = wiener_capacity(g, nodes_in_ball(g, BallRegion(Point{}, 0.3)), outer).value;
  const double b = wiener_capacity(g, nodes_in_ball(g, BallRegion(Point{}, 0.6)), outer).value;
  CHECK(0 < a);
  CHECK(a < b);
}

TEST_CASE("two-dimensional ball capacity approaches the logarithmic law") {
  const Grid g = centered_grid(2, 0.02, 2.1);
  const double c = ball_capacity(g, BallRegion(Point{}, 0.5), 4.0);
  CHECK(c == doctest::Approx(oracle::continuum_ball_capacity(2, 0.5, 2.0)).epsilon(0.1));
}

TEST_CASE("set too close to the outer sphere is rejected") {
  const Grid g = centered_grid(2, 0.1, 3);
  CHECK_THROWS_AS(wiener_capacity(g, nodes_in_ball(g, BallRegion(Point{}, 1.0)), BallRegion(Point{}, 1.05)),
                  GeometryError);
}

TEST_CASE("Schur evaluator reproduces direct capacities") {
  const Grid g = centered_grid(2, 0.25, 3);
  const BallRegion ball(Point{}, 0.6);
  const NodeSet S = nodes_in_ball(g, ball);
  const BallRegion outer(Point{}, 2.0);
  CapacityEvaluator ev(g, S, outer);
  REQUIRE(ev.size() == S.size());
  CHECK((ev.schur() - ev.schur().transpose()).norm() < 1e-10);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    std::vector<int> pos;
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < S.size(); ++i)
      if (rng() % 2) {
        pos.push_back(static_cast<int>(i));
        nodes.push_back(S.members()[i]);
      }
    const double direct = wiener_capacity(g, NodeSet(g, nodes), outer).value;
    CHECK(ev.capacity(pos) == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("Molchanov exhaustive search equals brute force over subsets") {
  const Grid g = centered_grid(2, 0.25, 3);
  const BallRegion ball(Point{}, 0.45);
  const NodeSet S = nodes_in_ball(g, ball);
  REQUIRE(S.size() <= 12);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0, 5);
  std::map<std::size_t, double> values;
  for (auto m : S.members()) values[m] = U(rng);
  const ScalarFn V = [&](const Point& x) {
    const auto i = g.locate(x);
    return values.count(i) ? values[i] : 0.0;
  };
  const BallRegion outer(Point{}, 4 * ball.radius);
  const double total_cap = wiener_capacity(g, S, outer).value;
  const double c = 0.3;
  double best = 1e300;
  const std::size_t n = S.size();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::size_t> F;
    double rest = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) F.push_back(S.members()[i]);
      else rest += values[S.members()[i]];
    }
    if (!F.empty() && wiener_capacity(g, NodeSet(g, F), outer).value > c * total_cap + 1e-12) continue;
    best = std::min(best, rest * g.cell_volume());
  }
  MolchanovOptions opts;
  opts.strategy = MolchanovStrategy::Exhaustive;
  const auto ex = molchanov_functional(g, V, ball, c, opts);
  CHECK(ex.value == doctest::Approx(best).epsilon(1e-10));
  CHECK(ex.cap_used <= ex.cap_budget * (1 + 1e-12));
  opts.strategy = MolchanovStrategy::LevelSet;
  const auto ls = molchanov_functional(g, V, ball, c, opts);
  CHECK(ls.value >= ex.value - 1e-12);
}

TEST_CASE("Molchanov functional basics") {
  const Grid g = centered_grid(2, 0.1, 3);
  const BallRegion ball(Point{0.5, 0, 0}, 0.5);
  const ScalarFn V = [](const Point& x) { return x[0] * x[0]; };
  const auto r0 = molchanov_functional(g, V, ball, 1e-9);
  CHECK(r0.value == doctest::Approx(r0.full_integral));
  CHECK(r0.removed_set.empty());
  double prev = r0.value;
  for (double c : {0.01, 0.05, 0.2}) {
    const auto r = molchanov_functional(g, V, ball, c);
    CHECK(r.value <= prev + 1e-12);
    prev = r.value;
  }
  CHECK(molchanov_reference_c(2) == doctest::Approx(std::pow(2.0, -10)));
  CHECK(molchanov_strategy_from_string("sublevel") == MolchanovStrategy::LevelSet);
  CHECK(molchanov_strategy_from_string("exhaustive") == MolchanovStrategy::Exhaustive);
  CHECK_THROWS(molchanov_strategy_from_string("magic"));
  MolchanovOptions ex;
  ex.strategy = MolchanovStrategy::Exhaustive;
  CHECK_THROWS_AS(molchanov_functional(g, V, ball, 0.1, ex), ParameterError);
}

TEST_CASE("measure variants with constant potential") {
  const Grid g = centered_grid(2, 0.1, 3);
  const BallRegion ball(Point{}, 1.0);
  const double K = 3.0;
  const ScalarFn V = [&](const Point&) { return K; };
  const double vol = nodes_in_ball(g, ball).size() * g.cell_volume();
  for (double c : {0.1, 0.5, 1.0}) {
    const auto m = measure_variant(g, V, ball, c, 2, MeasureVariant::MTildeC);
    CHECK(std::abs(m.value - K * (vol - c)) <= K * g.cell_volume() + 1e-12);
    const auto mn = measure_variant(g, V, ball, c, 3, MeasureVariant::MTildeCN);
    CHECK(std::abs(mn.value - K * (vol - c)) <= K * g.cell_volume() + 1e-12);
  }
  const auto big = measure_variant(g, V, BallRegion(Point{}, 2.0), 0.1, 3, MeasureVariant::MTildeCN);
  const auto bigc = measure_variant(g, V, BallRegion(Point{}, 2.0), 0.1, 3, MeasureVariant::MTildeC);
  CHECK(big.value < bigc.value);
}

TEST_CASE("sublevel measure") {
  const Grid g = centered_grid(2, 0.1, 3);
  const BallRegion ball(Point{}, 1.0);
  const ScalarFn V = [](const Point& x) { return x[0]; };
  const double all = nodes_in_ball(g, ball).size() * g.cell_volume();
  CHECK(sublevel_measure(g, V, ball, 10) == doctest::Approx(all));
  CHECK(sublevel_measure(g, V, ball, -10) == 0);
  CHECK(sublevel_measure(g, V, ball, 0) == doctest::Approx(0.5 * all).epsilon(0.1));
}
