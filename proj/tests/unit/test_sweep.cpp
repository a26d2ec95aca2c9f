#include <cmath>
#include <random>

#include "doctest.h"
#include "magspec/errors.hpp"
#include "magspec/fields.hpp"
#include "magspec/sweep.hpp"

using namespace magspec;

namespace {

Grid square(double half, double h) {
  const int n = static_cast<int>(std::round(2 * half / h)) + 1;
  return Grid(2, Point{-half, -half, 0}, h, MultiIndex{n, n, 1});
}

SweepRow row(double d, std::vector<std::optional<double>> v) {
  SweepRow r;
  r.center = Point{d, 0, 0};
  r.distance = d;
  r.values = std::move(v);
  return r;
}

}  // namespace

TEST_CASE("quintic smoothstep") {
  CHECK(quintic_smoothstep(0) == 0);
  CHECK(quintic_smoothstep(1) == 1);
  CHECK(quintic_smoothstep(0.5) == doctest::Approx(0.5));
  CHECK(quintic_smoothstep(-1) == 0);
  CHECK(quintic_smoothstep(2) == 1);
  for (double t = 0; t < 1; t += 0.05) CHECK(quintic_smoothstep(t + 0.05) >= quintic_smoothstep(t));
}

TEST_CASE("partition of unity squares sum to one") {
  const Grid g = square(2, 0.1);
  const auto pu = build_partition(g, 0.8);
  std::vector<double> sum(g.node_count(), 0.0);
  for (std::size_t k = 0; k < pu.balls.size(); ++k) {
    const auto e = pu.dense(k);
    for (std::size_t i = 0; i < e.size(); ++i) sum[i] += e[i] * e[i];
  }
  for (double s : sum) CHECK(s == doctest::Approx(1).epsilon(1e-12));
  CHECK(pu.gradient_bound > 0);
  const auto gs = pu.grad_sq(0);
  CHECK(gs.size() == g.node_count());
  CHECK(*std::min_element(gs.begin(), gs.end()) >= 0);
}

TEST_CASE("a partition with a gap is rejected") {
  const Grid g = square(2, 0.1);
  CHECK_THROWS_AS(build_partition(g, std::vector<BallRegion>{BallRegion(Point{}, 1.0)}), GeometryError);
}

TEST_CASE("localization identity holds to discretization accuracy") {
  const Grid g = square(2, 0.05);
  const FieldSpec f = constant_field_2d(1.0, Gauge2D::Symmetric);
  const auto op = assemble(g, f, all_nodes(g), Boundary::Dirichlet);
  const auto pu = build_partition(g, 0.9);
  CVector u(static_cast<Eigen::Index>(op.size()));
  for (std::size_t i = 0; i < op.size(); ++i) {
    const Point x = g.coordinate(op.region().members()[i]);
    u(static_cast<Eigen::Index>(i)) = std::exp(-(x[0] * x[0] + x[1] * x[1])) * cplx(1, x[0]);
  }
  const auto res = ims_check(op, pu, {u});
  CHECK(res.worst_relative_error < 0.01);
}

TEST_CASE("minorant from constant ball values") {
  const Grid g = square(2, 0.1);
  const auto pu = build_partition(g, 0.8);
  const std::vector<double> lam(pu.balls.size(), 3.0);
  const Minorant m = minorant_from_sweep(lam, pu);
  const auto sq = [&](std::size_t i) {
    double s = 0;
    for (std::size_t k = 0; k < pu.balls.size(); ++k) s += pu.grad_sq(k)[i];
    return s;
  };
  const std::size_t mid = g.locate(Point{0, 0, 0});
  CHECK(m.values[mid] == doctest::Approx(3.0 - sq(mid)).epsilon(1e-10));
  CHECK(m(Point{0.01, -0.02, 0}) == doctest::Approx(m.values[mid]));
}

TEST_CASE("quantity strings round trip") {
  for (const char* s : {"lambda", "mu", "molchanov:c=0.01", "sublevel:A=2", "veff:twod:delta=1.5:probe"}) {
    const Quantity q = parse_quantity(s);
    CHECK(parse_quantity(q.name()).name() == q.name());
  }
  CHECK(parse_quantity("veff:dufresnoy:delta=0.5:eps=2:mode=direct").veff.mode == MajorantMode::Direct);
  CHECK(parse_quantity("veff:iwatsuka:delta=0.5:r=2").veff.r == 2);
  CHECK(parse_quantity("sublevel:A=1:veff=twod;delta=1").use_veff);
  CHECK_THROWS_AS(parse_quantity("veff:twod:delta=1.5"), ParameterError);
  CHECK_THROWS(parse_quantity("energy"));
  CHECK_THROWS(parse_quantity("molchanov:c=abc"));
}

TEST_CASE("verdict rule on synthetic rows") {
  const std::vector<std::string> names{"a", "b"};
  std::vector<SweepRow> rows;
  for (int i = 0; i <= 9; ++i) rows.push_back(row(i, {1.0 + i * i, 2.0}));
  const Verdict v = make_verdict(names, rows, 2.0);
  REQUIRE(v.evidence.size() == 2);
  CHECK(v.evidence[0].grows);
  CHECK_FALSE(v.evidence[1].grows);
  CHECK(v.conclusion == Conclusion::Inconclusive);
  CHECK(v.conflict);
  CHECK(v.caveat == kFiniteDomainCaveat);

  const Verdict one = make_verdict({"a"}, {row(0, {1.0}), row(5, {1.5}), row(10, {3.0})}, 2.0);
  CHECK(one.conclusion == Conclusion::SuggestsDiscrete);
  CHECK_FALSE(one.conflict);

  const Verdict none = make_verdict({"a"}, {row(0, {1.0}), row(5, {1.5}), row(10, {1.9})}, 2.0);
  CHECK(none.conclusion == Conclusion::SuggestsNonDiscrete);

  const Verdict neg = make_verdict({"a"}, {row(0, {-1.0}), row(5, {0.0}), row(10, {0.5})}, 2.0);
  CHECK(neg.evidence[0].grows);

  const Verdict empty = make_verdict({"a"}, {row(0, {std::nullopt}), row(10, {std::nullopt})}, 2.0);
  CHECK(empty.conclusion == Conclusion::Inconclusive);
  CHECK_FALSE(empty.evidence[0].has_data);
  CHECK(std::string(to_string(Conclusion::SuggestsNonDiscrete)) == "suggests-non-discrete");
}

TEST_CASE("default centers fit inside the box") {
  const Grid g = square(3, 0.1);
  const auto cs = default_centers(g, 1.0);
  CHECK(cs.size() > 8);
  for (const auto& c : cs) {
    CHECK(std::abs(c[0]) <= 2.0 + 1e-9);
    CHECK(std::abs(c[1]) <= 2.0 + 1e-9);
  }
  CHECK(default_centers(g, 1.0, 0.25).size() > cs.size());
}

TEST_CASE("sweep results do not depend on the thread count") {
  SweepPlan plan;
  plan.grid = square(3, 0.1);
  plan.spec = harmonic_field(2);
  plan.r = 0.8;
  plan.quantities = {parse_quantity("lambda"), parse_quantity("mu"), parse_quantity("veff:twod:delta=0")};
  plan.centers = default_centers(plan.grid, plan.r, 0.8);
  const auto a = run_sweep(plan);
  plan.jobs = 3;
  const auto b = run_sweep(plan);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].distance == b.rows[i].distance);
    for (std::size_t q = 0; q < 3; ++q) CHECK(*a.rows[i].values[q] == *b.rows[i].values[q]);
    CHECK(*a.rows[i].values[1] <= *a.rows[i].values[0] + 1e-9);
  }
  CHECK(a.mu_lambda_violations == 0);
  for (std::size_t i = 1; i < a.rows.size(); ++i) CHECK(a.rows[i].distance >= a.rows[i - 1].distance);
}

TEST_CASE("one failing row does not abort the sweep") {
  SweepPlan plan;
  plan.grid = square(3, 0.1);
  plan.spec = free_field(2);
  plan.spec.V = [](const Point& x) { return x[0] > 1.5 ? std::nan("") : 0.0; };
  plan.r = 0.8;
  plan.quantities = {parse_quantity("lambda")};
  plan.centers = {Point{0, 0, 0}, Point{1.8, 0, 0}};
  const auto rep = run_sweep(plan);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].error.empty());
  CHECK_FALSE(rep.rows[1].error.empty());
  CHECK_FALSE(rep.rows[1].values[0].has_value());
}

TEST_CASE("sweep plan validation") {
  SweepPlan plan;
  plan.grid = square(2, 0.1);
  plan.spec = free_field(2);
  plan.r = 1.0;
  plan.quantities = {parse_quantity("lambda")};
  plan.centers = {Point{1.5, 0, 0}};
  CHECK_THROWS_AS(plan.validate_and_sort(), GeometryError);
}
