#include <cmath>

#include "doctest.h"
#include "magspec/config.hpp"
#include "magspec/errors.hpp"
#include "magspec/report.hpp"

using namespace magspec;

TEST_CASE("expression field document") {
  const auto doc = parse_field_document(R"({"dim": 2, "V": "x1^2", "a": ["-x2/2", "x1/2"],
      "grid": {"origin": [-1, -1], "spacing": 0.5, "shape": [5, 5]}, "sweep": {"r": 0.5}})");
  CHECK(doc.spec.dim == 2);
  CHECK(eval_field(doc.spec, Point{2, 0, 0}).V == doctest::Approx(4));
  CHECK(eval_B(doc.spec, Point{})[0][1] == doctest::Approx(1));
  REQUIRE(doc.grid.has_value());
  CHECK(doc.grid->node_count() == 25);
  CHECK_FALSE(doc.family.has_value());
  CHECK(doc.sweep_json.find("0.5") != std::string::npos);
  CHECK(doc.canonical_json.find("grid") == std::string::npos);
}

TEST_CASE("field documents with mistakes") {
  CHECK_THROWS_AS(parse_field_document("{bad"), ConfigError);
  CHECK_THROWS_AS(parse_field_document("[]"), ConfigError);
  CHECK_THROWS_AS(parse_field_document(R"({"dim": 2, "V": "0", "a": ["0","0"], "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_field_document(R"({"dim": 4, "V": "0"})"), ConfigError);
  CHECK_THROWS_AS(parse_field_document(R"({"dim": 2, "V": "x1 +", "a": ["0","0"]})"), ConfigError);
  CHECK_THROWS_AS(parse_field_document(R"({"dim": 2, "a": ["0"]})"), ConfigError);
  CHECK_THROWS_AS(load_field_document("/nonexistent/field.json"), ConfigError);
}

TEST_CASE("counterexample document round trip") {
  const auto fam = layout_patches(CounterexampleKind::IvriiTwoD, {1, 4}, {2, 1.5});
  const std::string text = counterexample_json(fam, 0.1);
  const auto doc = parse_field_document(text);
  REQUIRE(doc.family.has_value());
  CHECK(doc.family->B_values == fam.B_values);
  REQUIRE(doc.grid.has_value());
  for (const auto& c : fam.centers) CHECK(doc.grid->locate(c) != Grid::npos);
  CHECK(eval_field(doc.spec, fam.centers[1]).V == doctest::Approx(-4));
  CHECK_FALSE(doc.sweep_json.empty());
}

TEST_CASE("grid, ball and list parsing") {
  const Grid g = parse_grid_json(R"({"origin": [0, 1, 2], "spacing": 0.25, "shape": [3, 3, 4]})");
  CHECK(g.dim() == 3);
  CHECK(parse_grid_json(grid_to_json(g)).same_lattice(g));
  const BallRegion b = parse_ball("1.5,-2:0.75", 2);
  CHECK(b.center[0] == 1.5);
  CHECK(b.center[1] == -2);
  CHECK(b.radius == 0.75);
  CHECK(ball_dim("0,0,0:1") == 3);
  CHECK_THROWS_AS(parse_ball("1,2", 2), ConfigError);
  CHECK_THROWS_AS(parse_ball("1,2:-1", 2), ConfigError);
  CHECK_THROWS_AS(parse_ball("1,2,3:1", 2), ConfigError);
  CHECK(parse_number_list("1, 4,9") == std::vector<double>{1, 4, 9});
  CHECK_THROWS_AS(parse_number_list("1,x"), ConfigError);
  CHECK(parse_point("3,4", 2)[1] == 4);
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(hash_hex(0xabcull) == "0000000000000abc");
}

TEST_CASE("number formatting round trips") {
  CHECK(format_double(10) == "10");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5e-12) == "-2.5e-12");
  CHECK(format_double(std::nan("")) == "nan");
  for (double v : {1.0 / 3, 12345.678901234567, 6.02e23, -1e-300})
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("CSV quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_line({"x", "y,z"}) == "x,\"y,z\"\r\n");
}

TEST_CASE("artifacts carry provenance") {
  SpectralResult r;
  r.eigenvalues = {1.0, 3.0};
  r.residuals = {1e-9, 2e-9};
  r.method = "dense";
  const ArtifactMeta meta{"eigs", 42, "00000000deadbeef"};
  const auto j = spectral_json(r, meta);
  CHECK(j["meta"]["seed"] == 42);
  CHECK(j["meta"]["config_hash"] == "00000000deadbeef");
  CHECK(j["meta"]["version"] == tool_version());
  const std::string csv = spectral_csv(r, meta);
  CHECK(csv.find("00000000deadbeef") != std::string::npos);
  CHECK(csv.find(",42,") != std::string::npos);
  CHECK(spectral_json(r, meta).dump() == j.dump());
}

TEST_CASE("sweep artifacts include the caveat") {
  SweepReport rep;
  rep.quantity_names = {"lambda"};
  rep.dim = 2;
  rep.r = 1;
  SweepRow row;
  row.distance = 1;
  row.values = {2.0};
  rep.rows = {row};
  rep.verdict = make_verdict(rep.quantity_names, rep.rows, 2.0);
  const ArtifactMeta meta{"sweep", 1, "0000000000000001"};
  CHECK(sweep_json(rep, meta)["caveat"] == kFiniteDomainCaveat);
  const std::string svg = sweep_svg(rep, meta);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("finite-domain") != std::string::npos);
  CHECK(sweep_csv(rep, meta).find("lambda") != std::string::npos);
}
