#include "magspec/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "magspec/errors.hpp"

#ifndef MAGSPEC_VERSION
#define MAGSPEC_VERSION "0.0.0"
#endif

namespace magspec {

using json = nlohmann::ordered_json;

namespace {

std::string expr_string(const json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return os.str();
  }
  throw ConfigError(where + ": expected an expression string or a number");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

Point point_from(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw ConfigError(where + ": expected an array of " + std::to_string(dim) + " numbers");
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = number(j[i], where);
  return p;
}

Grid grid_from(const json& g) {
  if (!g.is_object()) throw ConfigError("grid: expected an object {origin, spacing, shape}");
  for (const auto& [k, _] : g.items())
    if (k != "origin" && k != "spacing" && k != "shape") throw ConfigError("grid: unknown key '" + k + "'");
  if (!g.contains("origin") || !g.contains("spacing") || !g.contains("shape"))
    throw ConfigError("grid: keys origin, spacing and shape are required");
  const json& o = g["origin"];
  if (!o.is_array() || o.size() < 2 || o.size() > 3) throw ConfigError("grid.origin: expected 2 or 3 numbers");
  const int dim = static_cast<int>(o.size());
  const Point origin = point_from(o, dim, "grid.origin");
  const json& s = g["shape"];
  if (!s.is_array() || static_cast<int>(s.size()) != dim) throw ConfigError("grid.shape: length must match origin");
  MultiIndex shape{1, 1, 1};
  for (int i = 0; i < dim; ++i) {
    if (!s[i].is_number_integer()) throw ConfigError("grid.shape: expected integers");
    shape[i] = s[i].get<int>();
  }
  try {
    return Grid(dim, origin, number(g["spacing"], "grid.spacing"), shape);
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

FieldDocument parse_field_document(const std::string& text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ConfigError("field config: expected a JSON object");
  FieldDocument out;
  json field = json::object();
  for (const auto& [k, v] : doc.items())
    if (k != "grid" && k != "sweep") field[k] = v;
  if (doc.contains("grid")) out.grid = grid_from(doc["grid"]);
  if (doc.contains("sweep")) {
    if (!doc["sweep"].is_object()) throw ConfigError("sweep: expected an object");
    out.sweep_json = doc["sweep"].dump();
  }
  out.canonical_json = field.dump();

  if (field.contains("kind")) {
    static const char* allowed[] = {"kind", "B_values", "radii", "centers", "transition_width", "quad_points"};
    for (const auto& [k, _] : field.items())
      if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return k == a; }) ==
          std::end(allowed))
        throw ConfigError("counterexample config: unknown key '" + k + "'");
    CounterexampleFamily fam;
    const std::string kind = field["kind"].is_string() ? field["kind"].get<std::string>() : "";
    if (kind == "ivrii") fam.kind = CounterexampleKind::IvriiTwoD;
    else if (kind == "iwatsuka") fam.kind = CounterexampleKind::IwatsukaPatches;
    else throw ConfigError("counterexample kind must be 'ivrii' or 'iwatsuka'");
    auto list = [&](const char* key) {
      if (!field.contains(key) || !field[key].is_array()) throw ConfigError(std::string(key) + ": expected an array");
      std::vector<double> v;
      for (const auto& x : field[key]) v.push_back(number(x, key));
      return v;
    };
    fam.B_values = list("B_values");
    fam.radii = list("radii");
    if (!field.contains("centers") || !field["centers"].is_array()) throw ConfigError("centers: expected an array");
    for (const auto& c : field["centers"]) fam.centers.push_back(point_from(c, 2, "centers"));
    if (field.contains("transition_width")) fam.transition_width = number(field["transition_width"], "transition_width");
    int quad = 16;
    if (field.contains("quad_points")) quad = static_cast<int>(number(field["quad_points"], "quad_points"));
    try {
      fam.validate();
      out.spec = build_counterexample(fam, quad);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("counterexample: ") + e.what());
    }
    out.family = fam;
  } else {
    static const char* allowed[] = {"dim", "V", "a", "B", "derivative_mode", "h_fd", "gauge_center", "quad_points",
                                    "description"};
    for (const auto& [k, _] : field.items())
      if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return k == a; }) ==
          std::end(allowed))
        throw ConfigError("field config: unknown key '" + k + "'");
    ExpressionFieldConfig cfg;
    if (!field.contains("dim") || !field["dim"].is_number_integer()) throw ConfigError("field config: integer 'dim' required");
    cfg.dim = field["dim"].get<int>();
    if (cfg.dim != 2 && cfg.dim != 3) throw ConfigError("field config: dim must be 2 or 3");
    if (field.contains("V")) cfg.V = expr_string(field["V"], "V");
    if (field.contains("a")) {
      if (!field["a"].is_array() || static_cast<int>(field["a"].size()) != cfg.dim)
        throw ConfigError("a: expected " + std::to_string(cfg.dim) + " expressions");
      for (const auto& e : field["a"]) cfg.a.push_back(expr_string(e, "a"));
    }
    if (field.contains("B") && !field["B"].is_null()) {
      const json& B = field["B"];
      if (!B.is_array() || static_cast<int>(B.size()) != cfg.dim)
        throw ConfigError("B: expected a " + std::to_string(cfg.dim) + "x" + std::to_string(cfg.dim) + " matrix");
      std::vector<std::vector<std::string>> m;
      for (const auto& row : B) {
        if (!row.is_array() || static_cast<int>(row.size()) != cfg.dim) throw ConfigError("B: ragged matrix");
        std::vector<std::string> r;
        for (const auto& e : row) r.push_back(expr_string(e, "B"));
        m.push_back(std::move(r));
      }
      cfg.B = std::move(m);
    }
    if (cfg.a.empty() && !cfg.B) cfg.a.assign(cfg.dim, "0");
    if (field.contains("derivative_mode")) {
      const std::string m = field["derivative_mode"].is_string() ? field["derivative_mode"].get<std::string>() : "";
      if (m == "analytic") cfg.derivative_mode = DerivativeMode::Analytic;
      else if (m == "central-difference" || m == "central_difference") cfg.derivative_mode = DerivativeMode::CentralDifference;
      else throw ConfigError("derivative_mode must be 'analytic' or 'central-difference'");
    }
    if (field.contains("h_fd")) cfg.h_fd = number(field["h_fd"], "h_fd");
    if (field.contains("gauge_center")) cfg.gauge_center = point_from(field["gauge_center"], cfg.dim, "gauge_center");
    if (field.contains("quad_points")) cfg.quad_points = static_cast<int>(number(field["quad_points"], "quad_points"));
    try {
      out.spec = expression_field(cfg);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("field config: ") + e.what());
    }
    if (field.contains("description") && field["description"].is_string())
      out.spec.description = field["description"].get<std::string>();
  }
  if (out.grid && out.grid->dim() != out.spec.dim) throw ConfigError("grid and field dimensions differ");
  return out;
}

FieldDocument load_field_document(const std::string& path) {
  try {
    return parse_field_document(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Grid parse_grid_json(const std::string& text) { return grid_from(parse_json(text)); }

std::string grid_to_json(const Grid& g) {
  json j = json::object();
  json o = json::array(), s = json::array();
  for (int i = 0; i < g.dim(); ++i) {
    o.push_back(g.origin()[i]);
    s.push_back(g.shape()[i]);
  }
  j["origin"] = o;
  j["spacing"] = g.spacing();
  j["shape"] = s;
  return j.dump();
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

Point parse_point(const std::string& text, int dim) {
  const auto v = parse_number_list(text);
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError("expected " + std::to_string(dim) + " coordinates in '" + text + "'");
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = v[i];
  return p;
}

int ball_dim(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("ball must look like 'c1,c2:r', got '" + text + "'");
  return static_cast<int>(parse_number_list(text.substr(0, colon)).size());
}

BallRegion parse_ball(const std::string& text, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("ball must look like 'c1,c2:r', got '" + text + "'");
  const Point c = parse_point(text.substr(0, colon), dim);
  const auto r = parse_number_list(text.substr(colon + 1));
  if (r.size() != 1 || !(r[0] > 0.0)) throw ConfigError("ball radius must be one positive number in '" + text + "'");
  return BallRegion(c, r[0]);
}

std::string counterexample_json(const CounterexampleFamily& fam, double spacing) {
  fam.validate();
  json j = json::object();
  j["kind"] = fam.kind == CounterexampleKind::IvriiTwoD ? "ivrii" : "iwatsuka";
  j["B_values"] = fam.B_values;
  j["radii"] = fam.radii;
  json cs = json::array();
  Point lo{1e300, 1e300, 0}, hi{-1e300, -1e300, 0};
  double rmin = 1e300;
  for (std::size_t i = 0; i < fam.centers.size(); ++i) {
    cs.push_back(json::array({fam.centers[i][0], fam.centers[i][1]}));
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], fam.centers[i][a] - fam.radii[i] - 1.0);
      hi[a] = std::max(hi[a], fam.centers[i][a] + fam.radii[i] + 1.0);
    }
    rmin = std::min(rmin, fam.radii[i]);
  }
  j["centers"] = cs;
  j["transition_width"] = fam.transition_width;
  const Grid g = Grid::enclosing(2, lo, hi, spacing);
  j["grid"] = json::parse(grid_to_json(g));
  json sweep = json::object();
  sweep["r"] = rmin;
  sweep["quantities"] = json::array({"lambda", "veff:twod:delta=1.5:probe"});
  sweep["centers"] = cs;
  j["sweep"] = sweep;
  return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* tool_version() { return MAGSPEC_VERSION; }

}  // namespace magspec
