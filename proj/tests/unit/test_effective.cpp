#include <cmath>

#include "doctest.h"
#include "magspec/counterexample.hpp"
#include "magspec/effective.hpp"
#include "magspec/errors.hpp"
#include "magspec/fields.hpp"

using namespace magspec;

namespace {

// B_12 = x1
FieldSpec ramp_field() {
  ExpressionFieldConfig cfg;
  cfg.dim = 2;
  cfg.V = "0";
  cfg.a = {"0", "x1^2/2"};
  return expression_field(cfg);
}

}  // namespace

TEST_CASE("two-dimensional effective potential") {
  const auto fam = layout_patches(CounterexampleKind::IvriiTwoD, {1, 4}, {2, 1.5});
  const FieldSpec f = build_counterexample(fam);
  for (const Point& x : {fam.centers[0], fam.centers[1], Point{7.3, 0.4, 0}}) {
    CHECK(veff_2d(f, 1.0, x) == doctest::Approx(0).epsilon(1e-12));
    CHECK(veff_2d(f, -1.0, x) == doctest::Approx(-2 * counterexample_B(fam, x)));
  }
  CHECK_THROWS_AS(veff_2d(f, 1.5, fam.centers[0]), ParameterError);
  CHECK_THROWS_AS(veff_2d(constant_field_3d({1, 0, 0}), 0.5, Point{}), ParameterError);
}

TEST_CASE("smoothed field direction") {
  Form2 B{};
  auto set = [&](double b) {
    B = Form2{};
    B[0][1] = b;
    B[1][0] = -b;
  };
  set(0.4);
  CHECK(smoothed_direction(B, 2)[0][1] == 0);
  set(0.75);
  CHECK(smoothed_direction(B, 2)[0][1] == doctest::Approx(0.5));
  set(-3);
  CHECK(smoothed_direction(B, 2)[0][1] == doctest::Approx(-1));
  CHECK(smoothed_direction(B, 2)[1][0] == doctest::Approx(1));
}

TEST_CASE("majorants vanish for a constant field") {
  const FieldSpec f = constant_field_2d(2.0, Gauge2D::Symmetric);
  for (auto m : {MajorantMode::Direct, MajorantMode::MB, MajorantMode::Combined})
    CHECK(majorant_X(f, Point{0.3, -0.2, 0}, m) == doctest::Approx(0).epsilon(1e-6));
  CHECK(veff_dufresnoy(f, 0.5, 1.0, MajorantMode::Combined, Point{}) == doctest::Approx(0.5 * 2 / 2));
  CHECK(veff_dufresnoy(f, 0.0, 1.0, MajorantMode::Combined, Point{}) == doctest::Approx(0));
}

TEST_CASE("majorants on a linear field") {
  const FieldSpec f = ramp_field();
  const Point x{3, 0, 0};
  CHECK(majorant_X(f, x, MajorantMode::Combined) == doctest::Approx(12.0 / 4.0).epsilon(1e-6));
  CHECK(majorant_X(f, x, MajorantMode::Direct) == doctest::Approx(0).epsilon(1e-6));
  const double mb = majorant_X(f, x, MajorantMode::MB);
  CHECK(std::isfinite(mb));
  CHECK(mb >= 0);
  CHECK(veff_dufresnoy(f, 0.5, 1.0, MajorantMode::Combined, x) == doctest::Approx(0.75 - 1.125).epsilon(1e-6));
  CHECK_THROWS_AS(veff_dufresnoy(f, 1.0, 1.0, MajorantMode::Combined, x), ParameterError);
  CHECK_THROWS_AS(veff_dufresnoy(f, 0.5, 0.0, MajorantMode::Combined, x), ParameterError);
}

TEST_CASE("mode names round trip") {
  for (auto m : {MajorantMode::Direct, MajorantMode::MB, MajorantMode::Combined})
    CHECK(majorant_mode_from_string(to_string(m)) == m);
  for (auto v : {EffectiveVariant::TwoD, EffectiveVariant::Dufresnoy, EffectiveVariant::Iwatsuka, EffectiveVariant::AHS})
    CHECK(effective_variant_from_string(to_string(v)) == v);
  CHECK(effective_variant_from_string("2d") == EffectiveVariant::TwoD);
  CHECK_THROWS(effective_variant_from_string("nope"));
}

TEST_CASE("Iwatsuka sampling for constant and linear fields") {
  const FieldSpec c = constant_field_2d(3.0, Gauge2D::Landau);
  const auto e = iwatsuka_eps(c, Point{}, 1.0);
  CHECK(e.value == doctest::Approx(1.0 / 10.0));
  CHECK(e.stable);
  const double v = veff_iwatsuka(c, 0.5, 1.0, Point{});
  CHECK(v == doctest::Approx(0.5 * std::sqrt(10.0) * 0.9));
  CHECK(veff_iwatsuka_from_eps(1.0, 0.5, 2, 0.25) == doctest::Approx(1.0 + 0.5 * 2 * 0.75));

  const FieldSpec r = ramp_field();
  const auto er = iwatsuka_eps(r, Point{3, 0, 0}, 1.0);
  // sup of 2 / (1 + x1^2) over the disk is at x1 = 2
  CHECK(er.value == doctest::Approx(2.0 / 5.0).epsilon(0.01));
  CHECK(er.value <= 2.0 / 5.0 + 1e-12);
}

TEST_CASE("AHS r_gamma for a constant field") {
  const FieldSpec c = constant_field_3d({0, 3, 4});
  const Form2 dual = auto_dual(c, Point{});
  CHECK(dual[0][2] == doctest::Approx(0.6));
  CHECK(dual[1][2] == doctest::Approx(0.8));
  CHECK(ahs_rgamma(c, Point{}, 0.5, dual).value == doctest::Approx(5.0));
  Form2 bad{};
  bad[0][1] = 2;
  bad[1][0] = -2;
  CHECK_THROWS_AS(ahs_rgamma(c, Point{}, 0.5, bad), ParameterError);
  const std::vector<BallRegion> cover{BallRegion(Point{}, 1.0)};
  CHECK(veff_ahs(c, 0.5, 1.0, cover, Point{0.2, 0, 0}) == doctest::Approx(0.5 / 2 * 5));
  CHECK_THROWS_AS(veff_ahs(c, 0.5, 1.0, cover, Point{3, 0, 0}), GeometryError);
}

TEST_CASE("AHS evaluator takes the worst covering ball") {
  const FieldSpec r = ramp_field();
  std::vector<BallRegion> cover{BallRegion(Point{2, 0, 0}, 1.0), BallRegion(Point{3, 0, 0}, 1.0)};
  AhsEvaluator ev(r, 1.0, cover);
  REQUIRE(ev.r_gamma().size() == 2);
  CHECK(ev.r_gamma()[0] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ev.r_gamma()[1] == doctest::Approx(2.0).epsilon(0.02));
  CHECK(ev.r_of(Point{2.5, 0, 0}) == doctest::Approx(ev.r_gamma()[0]));
  CHECK(ev.r_of(Point{3.5, 0, 0}) == doctest::Approx(ev.r_gamma()[1]));
}

TEST_CASE("effective potential specification") {
  EffectivePotentialSpec s;
  s.variant = EffectiveVariant::TwoD;
  s.delta = 1.5;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s.probe = true;
  s.validate();
  const FieldSpec f = constant_field_2d(2.0, Gauge2D::Symmetric, [](const Point&) { return -1.0; });
  EffectivePotential V(f, s);
  CHECK(V(Point{0.5, 0.5, 0}) == doctest::Approx(-1 + 3.0));
  s.variant = EffectiveVariant::Dufresnoy;
  s.probe = false;
  s.delta = 0.5;
  s.eps = 0.5;
  EffectivePotential D(f, s);
  CHECK(D(Point{}) == doctest::Approx(-1 + 0.5 * 2 / 1.5));
  CHECK(s.params_string().find("delta=0.5") != std::string::npos);
}

TEST_CASE("lower bound harness accepts true bounds and rejects false ones") {
  const FieldSpec f = constant_field_2d(1.0, Gauge2D::Symmetric);
  Grid g(2, Point{-3, -3, 0}, 0.1, MultiIndex{61, 61, 1});
  const std::vector<BallRegion> balls{BallRegion(Point{}, 2.0), BallRegion(Point{1, 0.5, 0}, 1.5)};
  const auto yes = certify_lower_bound(g, f, [](const Point&) { return 0.9; }, balls, 1e-9);
  CHECK(yes.holds_on_sample);
  CHECK(yes.worst_margin > 0);
  REQUIRE(yes.lambda.size() == 2);
  const auto no = certify_lower_bound(g, f, [](const Point&) { return 2.0; }, balls, 1e-9);
  CHECK_FALSE(no.holds_on_sample);
  CHECK(no.worst_margin < 0);
}
