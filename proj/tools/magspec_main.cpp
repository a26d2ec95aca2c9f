// magspec command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "magspec/capacity.hpp"
#include "magspec/config.hpp"
#include "magspec/counterexample.hpp"
#include "magspec/effective.hpp"
#include "magspec/eigensolve.hpp"
#include "magspec/errors.hpp"
#include "magspec/operator.hpp"
#include "magspec/report.hpp"
#include "magspec/sweep.hpp"

namespace fs = std::filesystem;
using namespace magspec;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

// Output files are collected and written only after every computation succeeded.
struct Outputs {
  std::vector<std::pair<std::string, std::string>> files;

  static void check_path(const std::string& path) {
    if (path.empty()) return;
    const fs::path p = fs::absolute(path);
    const fs::path dir = p.parent_path();
    if (!dir.empty() && !fs::is_directory(dir)) throw ConfigError("output directory does not exist: " + dir.string());
  }
  void add(const std::string& path, std::string content) {
    if (!path.empty()) files.emplace_back(path, std::move(content));
  }
  void flush() const {
    for (const auto& [path, content] : files) {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("cannot write '" + path + "'");
      out << content;
    }
  }
};

// Scalars of a --config run file; explicit flags win.
class RunConfig {
 public:
  void load(const std::string& path) {
    if (path.empty()) return;
    dir_ = fs::absolute(path).parent_path();
    try {
      doc_ = ojson::parse(read_text_file(path));
    } catch (const ojson::parse_error& e) {
      throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    if (!doc_.is_object()) throw ConfigError(path + ": expected a JSON object");
  }
  template <class T>
  void fill(CLI::Option* opt, const char* key, T& target) const {
    if (opt->count() > 0 || !doc_.is_object() || !doc_.contains(key)) return;
    try {
      target = doc_[key].get<T>();
    } catch (const std::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }
  /// Relative paths inside the run config resolve against its directory.
  void fill_path(CLI::Option* opt, const char* key, std::string& target) const {
    std::string before = target;
    fill(opt, key, target);
    if (target != before && !target.empty() && fs::path(target).is_relative()) target = (dir_ / target).string();
  }
  const ojson& doc() const { return doc_; }

 private:
  ojson doc_;
  fs::path dir_;
};

struct Common {
  std::string field, grid, config, json_out, csv_out, svg_out;
  std::uint64_t seed = kDefaultSeed;
  CLI::Option *o_field = nullptr, *o_grid = nullptr, *o_seed = nullptr, *o_json = nullptr, *o_csv = nullptr,
              *o_svg = nullptr;
  RunConfig run;

  void attach(CLI::App* app, bool with_field, bool with_svg) {
    if (with_field) o_field = app->add_option("--field", field, "field config (JSON)");
    o_grid = app->add_option("--grid", grid, "grid config (JSON {origin, spacing, shape})");
    app->add_option("--config", config, "run config (JSON); command-line flags override its scalars");
    o_seed = app->add_option("--seed", seed, "random seed recorded in every artifact");
    o_json = app->add_option("--json", json_out, "write JSON report");
    o_csv = app->add_option("--csv", csv_out, "write CSV table");
    if (with_svg) o_svg = app->add_option("--svg", svg_out, "write SVG chart");
  }
  void resolve() {
    run.load(config);
    if (o_field) run.fill_path(o_field, "field", field);
    run.fill_path(o_grid, "grid", grid);
    run.fill(o_seed, "seed", seed);
    run.fill_path(o_json, "json", json_out);
    run.fill_path(o_csv, "csv", csv_out);
    if (o_svg) run.fill_path(o_svg, "svg", svg_out);
    for (const auto* p : {&json_out, &csv_out, &svg_out}) Outputs::check_path(*p);
  }
  FieldDocument load_field() const {
    if (field.empty()) throw ConfigError("--field is required");
    return load_field_document(field);
  }
  std::optional<Grid> load_grid(const FieldDocument* doc) const {
    if (!grid.empty()) return parse_grid_json(read_text_file(grid));
    if (doc && doc->grid) return doc->grid;
    return std::nullopt;
  }
};

std::string hash_of(const std::string& command, const ojson& resolved) {
  return hash_hex(fnv1a64(command + "\n" + resolved.dump()));
}

ojson field_canonical(const FieldDocument& doc) { return ojson::parse(doc.canonical_json); }

Grid grid_for_ball(const std::optional<Grid>& g, const BallRegion& ball, int dim, double h) {
  if (g) return *g;
  Point lo{}, hi{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = ball.center[i] - ball.radius - h;
    hi[i] = ball.center[i] + ball.radius + h;
  }
  return Grid::enclosing(dim, lo, hi, h);
}

std::string point_string(const Point& p, int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) s += (i ? "," : "") + format_double(p[i]);
  return s;
}

// eigs -----------------------------------------------------------------------

struct EigsArgs {
  Common c;
  std::string ball, bc = "dirichlet", dump;
  int k = 1, max_iter = 3000;
  double h = 0.1, tol = 1e-8;
  CLI::Option *o_ball, *o_bc, *o_k, *o_h, *o_tol, *o_iter, *o_dump;
};

int run_eigs(EigsArgs& a) {
  a.c.resolve();
  a.c.run.fill(a.o_ball, "ball", a.ball);
  a.c.run.fill(a.o_bc, "bc", a.bc);
  a.c.run.fill(a.o_k, "k", a.k);
  a.c.run.fill(a.o_h, "spacing", a.h);
  a.c.run.fill(a.o_tol, "tol", a.tol);
  a.c.run.fill(a.o_iter, "max_iter", a.max_iter);
  a.c.run.fill_path(a.o_dump, "dump_matrix", a.dump);
  Outputs::check_path(a.dump);
  const FieldDocument doc = a.c.load_field();
  if (a.ball.empty()) throw ConfigError("--ball is required");
  const int dim = doc.spec.dim;
  const BallRegion ball = parse_ball(a.ball, dim);
  const Boundary bc = boundary_from_string(a.bc);
  if (!(a.h > 0.0)) throw ConfigError("--spacing must be positive");
  const Grid grid = grid_for_ball(a.c.load_grid(&doc), ball, dim, a.h);

  ojson resolved = {{"field", field_canonical(doc)}, {"grid", ojson::parse(grid_to_json(grid))}, {"ball", a.ball},
                    {"bc", to_string(bc)}, {"k", a.k}, {"tol", a.tol}, {"max_iter", a.max_iter}, {"seed", a.c.seed}};
  const ArtifactMeta meta{"eigs", a.c.seed, hash_of("eigs", resolved)};

  const DiscreteOperator op = assemble(grid, doc.spec, ball, bc);
  SolverOptions so;
  so.k = a.k;
  so.tol = a.tol;
  so.max_iter = a.max_iter;
  so.seed = a.c.seed;
  const SpectralResult r = smallest_eigs(op, so);

  Outputs out;
  ojson j = spectral_json(r, meta);
  j["unknowns"] = op.size();
  j["bc"] = to_string(bc);
  j["ball"] = a.ball;
  out.add(a.c.json_out, j.dump(2) + "\n");
  out.add(a.c.csv_out, spectral_csv(r, meta));
  if (!a.dump.empty()) {
    std::ostringstream os;
    write_matrix(op, os);
    out.add(a.dump, os.str());
  }
  out.flush();
  std::cout << "unknowns " << op.size() << " method " << r.method << " iterations " << r.iterations << "\n";
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    std::cout << "lambda[" << i << "] = " << format_double(r.eigenvalues[i]) << "  residual "
              << format_double(r.residuals[i]) << "\n";
  return 0;
}

// sweep ----------------------------------------------------------------------

struct SweepArgs {
  Common c;
  double r = 0.0, growth = 2.0, step = 0.0;
  int jobs = 1;
  std::vector<std::string> quantities, centers;
  double tol = 1e-8;
  CLI::Option *o_r, *o_growth, *o_step, *o_jobs, *o_q, *o_centers, *o_tol;
};

int run_sweep_cmd(SweepArgs& a) {
  a.c.resolve();
  const FieldDocument doc = a.c.load_field();
  ojson sec = doc.sweep_json.empty() ? ojson::object() : ojson::parse(doc.sweep_json);
  // precedence: flag > run config > field document "sweep" section
  auto pick_d = [&](CLI::Option* o, const char* key, double& v) {
    if (sec.contains(key) && o->count() == 0) {
      if (!sec[key].is_number()) throw ConfigError(std::string("sweep.") + key + ": expected a number");
      v = sec[key].get<double>();
    }
    a.c.run.fill(o, key, v);
  };
  pick_d(a.o_r, "r", a.r);
  pick_d(a.o_growth, "growth_factor", a.growth);
  pick_d(a.o_step, "step", a.step);
  pick_d(a.o_tol, "tol", a.tol);
  if (sec.contains("jobs") && a.o_jobs->count() == 0) a.jobs = sec["jobs"].get<int>();
  a.c.run.fill(a.o_jobs, "jobs", a.jobs);
  const int dim = doc.spec.dim;
  std::vector<Point> centers;
  if (a.o_centers->count() > 0) {
    for (const auto& s : a.centers) centers.push_back(parse_point(s, dim));
  } else {
    const ojson* src = nullptr;
    if (a.c.run.doc().is_object() && a.c.run.doc().contains("centers")) src = &a.c.run.doc()["centers"];
    else if (sec.contains("centers")) src = &sec["centers"];
    if (src) {
      if (!src->is_array()) throw ConfigError("centers: expected an array of points");
      for (const auto& p : *src) {
        if (!p.is_array() || static_cast<int>(p.size()) != dim) throw ConfigError("centers: wrong point dimension");
        Point q{};
        for (int i = 0; i < dim; ++i) q[i] = p[i].get<double>();
        centers.push_back(q);
      }
    }
  }
  if (a.o_q->count() == 0) {
    const ojson* src = nullptr;
    if (a.c.run.doc().is_object() && a.c.run.doc().contains("quantities")) src = &a.c.run.doc()["quantities"];
    else if (sec.contains("quantities")) src = &sec["quantities"];
    if (src) {
      if (!src->is_array()) throw ConfigError("quantities: expected an array of strings");
      for (const auto& q : *src) a.quantities.push_back(q.get<std::string>());
    }
  }
  if (a.quantities.empty()) a.quantities.push_back("lambda");
  if (!(a.r > 0.0)) throw ConfigError("sweep radius --r must be positive");
  const auto grid = a.c.load_grid(&doc);
  if (!grid) throw ConfigError("sweep needs a grid (--grid or a \"grid\" section in the field config)");

  SweepPlan plan;
  plan.grid = *grid;
  plan.spec = doc.spec;
  plan.r = a.r;
  for (const auto& q : a.quantities) plan.quantities.push_back(parse_quantity(q));
  plan.centers = centers.empty() ? default_centers(*grid, a.r, a.step > 0.0 ? std::optional<double>(a.step)
                                                                               : std::nullopt)
                                 : centers;
  plan.growth_factor = a.growth;
  plan.jobs = a.jobs;
  plan.solver.seed = a.c.seed;
  plan.solver.tol = a.tol;
  plan.validate_and_sort();

  ojson qn = ojson::array();
  for (const auto& q : plan.quantities) qn.push_back(q.name());
  ojson cs = ojson::array();
  for (const auto& p : plan.centers) cs.push_back(point_string(p, dim));
  ojson resolved = {{"field", field_canonical(doc)}, {"grid", ojson::parse(grid_to_json(*grid))}, {"r", a.r},
                    {"quantities", qn}, {"centers", cs}, {"growth_factor", a.growth}, {"tol", a.tol},
                    {"seed", a.c.seed}};
  const ArtifactMeta meta{"sweep", a.c.seed, hash_of("sweep", resolved)};

  const SweepReport rep = run_sweep(plan);
  Outputs out;
  out.add(a.c.json_out, sweep_json(rep, meta).dump(2) + "\n");
  out.add(a.c.csv_out, sweep_csv(rep, meta));
  out.add(a.c.svg_out, sweep_svg(rep, meta));
  out.flush();
  std::cout << "centers " << rep.rows.size() << "\n";
  for (const auto& e : rep.verdict.evidence)
    std::cout << e.quantity << ": inner_min " << format_double(e.inner_min) << " outer_min "
              << format_double(e.outer_min) << (e.grows ? " grows" : " flat") << "\n";
  std::cout << "verdict " << to_string(rep.verdict.conclusion) << (rep.verdict.conflict ? " conflict" : "") << "\n";
  std::cout << "caveat: " << rep.verdict.caveat << "\n";
  return 0;
}

// effpot ---------------------------------------------------------------------

struct EffpotArgs {
  Common c;
  std::string variant = "twod", mode = "combined";
  double delta = 1.0, eps = 1.0, r = 1.0;
  bool probe = false;
  std::vector<std::string> points;
  CLI::Option *o_variant, *o_mode, *o_delta, *o_eps, *o_r;
};

int run_effpot(EffpotArgs& a) {
  a.c.resolve();
  a.c.run.fill(a.o_variant, "variant", a.variant);
  a.c.run.fill(a.o_mode, "mode", a.mode);
  a.c.run.fill(a.o_delta, "delta", a.delta);
  a.c.run.fill(a.o_eps, "eps", a.eps);
  a.c.run.fill(a.o_r, "r", a.r);
  const FieldDocument doc = a.c.load_field();
  const int dim = doc.spec.dim;
  EffectivePotentialSpec es;
  es.variant = effective_variant_from_string(a.variant);
  es.delta = a.delta;
  es.eps = a.eps;
  es.mode = majorant_mode_from_string(a.mode);
  es.r = a.r;
  es.probe = a.probe;
  es.validate();
  const auto grid = a.c.load_grid(&doc);
  std::vector<Point> pts;
  for (const auto& s : a.points) pts.push_back(parse_point(s, dim));
  if (pts.empty()) {
    if (!grid) throw ConfigError("effpot needs --point values or a grid");
    for (std::size_t p = 0; p < grid->node_count(); ++p) pts.push_back(grid->coordinate(p));
  }
  ojson resolved = {{"field", field_canonical(doc)},
                    {"grid", grid ? ojson::parse(grid_to_json(*grid)) : ojson(nullptr)},
                    {"variant", to_string(es.variant)},
                    {"params", es.params_string()},
                    {"points", a.points},
                    {"seed", a.c.seed}};
  const ArtifactMeta meta{"effpot", a.c.seed, hash_of("effpot", resolved)};
  const EffectivePotential V(doc.spec, es, grid);
  std::vector<std::string> head;
  for (int i = 0; i < dim; ++i) head.push_back("x" + std::to_string(i + 1));
  for (const char* h : {"variant", "params", "value", "seed", "config_hash", "version"}) head.push_back(h);
  std::string csv = csv_line(head);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& x : pts) {
    const double v = V(x);
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
    std::vector<std::string> f;
    for (int i = 0; i < dim; ++i) f.push_back(format_double(x[i]));
    f.push_back(to_string(es.variant));
    f.push_back(es.params_string() + (es.probe ? ";probe" : ""));
    f.push_back(format_double(v));
    f.push_back(std::to_string(meta.seed));
    f.push_back(meta.config_hash);
    f.push_back(tool_version());
    csv += csv_line(f);
  }
  Outputs out;
  if (a.c.csv_out.empty() && a.c.json_out.empty()) {
    std::cout << csv;
    return 0;
  }
  out.add(a.c.csv_out, csv);
  ojson j = {{"meta", meta_json(meta)}, {"variant", to_string(es.variant)}, {"params", es.params_string()},
             {"points", pts.size()}, {"min", vmin}, {"max", vmax}};
  out.add(a.c.json_out, j.dump(2) + "\n");
  out.flush();
  std::cout << "points " << pts.size() << " min " << format_double(vmin) << " max " << format_double(vmax) << "\n";
  return 0;
}

// capacity -------------------------------------------------------------------

struct CapacityArgs {
  Common c;
  std::string ball, outer, set;
  double h = 0.0;
  CLI::Option *o_ball, *o_outer, *o_set, *o_h;
};

int run_capacity(CapacityArgs& a) {
  a.c.resolve();
  a.c.run.fill(a.o_ball, "ball", a.ball);
  a.c.run.fill(a.o_outer, "outer", a.outer);
  a.c.run.fill(a.o_set, "set", a.set);
  a.c.run.fill(a.o_h, "spacing", a.h);
  if (a.ball.empty()) throw ConfigError("--ball is required");
  const int dim = ball_dim(a.ball);
  if (dim != 2 && dim != 3) throw ConfigError("ball center must have 2 or 3 coordinates");
  const BallRegion ball = parse_ball(a.ball, dim);
  const BallRegion outer = a.outer.empty() ? BallRegion(ball.center, 4.0 * ball.radius) : parse_ball(a.outer, dim);
  const double h = a.h > 0.0 ? a.h : ball.radius / 16.0;
  const std::optional<Grid> g0 = a.c.grid.empty() ? std::nullopt : a.c.load_grid(nullptr);
  const Grid grid = grid_for_ball(g0, ball, dim, h);
  BallRegion setball = ball;
  if (!a.set.empty()) {
    if (a.set.rfind("ball:", 0) != 0) throw ConfigError("--set must look like 'ball:c1,c2:r'");
    setball = parse_ball(a.set.substr(5), dim);
  }
  ojson resolved = {{"grid", ojson::parse(grid_to_json(grid))}, {"ball", a.ball}, {"outer", a.outer},
                    {"set", a.set}, {"seed", a.c.seed}};
  const ArtifactMeta meta{"capacity", a.c.seed, hash_of("capacity", resolved)};
  const NodeSet F = nodes_in_ball_clipped(grid, setball);
  const CapacityResult cr = wiener_capacity(grid, F, outer);
  const CapacityResult cb = wiener_capacity(grid, nodes_in_ball_clipped(grid, ball), outer);
  ojson j = {{"meta", meta_json(meta)},         {"value", cr.value},
             {"ball_capacity", cb.value},       {"ratio", cb.value > 0 ? cr.value / cb.value : 0.0},
             {"set_nodes", F.size()},           {"outer_radius", outer.radius},
             {"spacing", h},                    {"solver_residual", cr.solver_residual},
             {"iterations", cr.iterations}};
  Outputs out;
  out.add(a.c.json_out, j.dump(2) + "\n");
  out.add(a.c.csv_out, csv_line({"value", "ball_capacity", "outer_radius", "spacing", "seed", "config_hash", "version"}) +
                           csv_line({format_double(cr.value), format_double(cb.value), format_double(outer.radius),
                                     format_double(h), std::to_string(meta.seed), meta.config_hash, tool_version()}));
  out.flush();
  std::cout << "capacity " << format_double(cr.value) << " (ball " << format_double(cb.value) << ", outer radius "
            << format_double(outer.radius) << ", h " << format_double(h) << ")\n";
  return 0;
}

// molchanov ------------------------------------------------------------------

struct MolchanovArgs {
  Common c;
  std::string ball, cs = "0.0009765625", strategy = "levelset", variant = "capacity";
  double outer_factor = 4.0, h = 0.1, N = 0.0;
  CLI::Option *o_ball, *o_c, *o_strategy, *o_variant, *o_outer, *o_h, *o_N;
};

int run_molchanov(MolchanovArgs& a) {
  a.c.resolve();
  a.c.run.fill(a.o_ball, "ball", a.ball);
  a.c.run.fill(a.o_c, "c", a.cs);
  a.c.run.fill(a.o_strategy, "strategy", a.strategy);
  a.c.run.fill(a.o_variant, "variant", a.variant);
  a.c.run.fill(a.o_outer, "outer_factor", a.outer_factor);
  a.c.run.fill(a.o_h, "spacing", a.h);
  a.c.run.fill(a.o_N, "N", a.N);
  const FieldDocument doc = a.c.load_field();
  const int dim = doc.spec.dim;
  if (a.ball.empty()) throw ConfigError("--ball is required");
  const BallRegion ball = parse_ball(a.ball, dim);
  const auto cvals = parse_number_list(a.cs);
  const MolchanovStrategy strat = molchanov_strategy_from_string(a.strategy);
  if (a.variant != "capacity" && a.variant != "mtilde_cN" && a.variant != "mtilde_c")
    throw ConfigError("--variant must be capacity, mtilde_cN or mtilde_c");
  if (!(a.outer_factor > 1.0)) throw ConfigError("--outer-factor must exceed 1");
  const Grid grid = grid_for_ball(a.c.load_grid(&doc), ball, dim, a.h);
  ojson resolved = {{"field", field_canonical(doc)}, {"grid", ojson::parse(grid_to_json(grid))}, {"ball", a.ball},
                    {"c", a.cs}, {"strategy", to_string(strat)}, {"variant", a.variant},
                    {"outer_factor", a.outer_factor}, {"N", a.N}, {"seed", a.c.seed}};
  const ArtifactMeta meta{"molchanov", a.c.seed, hash_of("molchanov", resolved)};

  std::vector<std::string> head;
  for (int i = 0; i < dim; ++i) head.push_back("x" + std::to_string(i + 1));
  for (const char* s : {"r", "c", "value", "cap_used", "cap_budget", "strategy", "outer_radius", "seed", "config_hash",
                        "version"})
    head.push_back(s);
  std::string csv = csv_line(head);
  ojson rows = ojson::array();
  for (double c : cvals) {
    std::optional<MolchanovResult> res;
    std::string label;
    if (a.variant == "capacity") {
      MolchanovOptions mo;
      mo.strategy = strat;
      mo.outer_radius = a.outer_factor * ball.radius;
      res.emplace(molchanov_functional(grid, doc.spec.V, ball, c, mo));
      label = to_string(strat);
    } else {
      const MeasureVariant mv = a.variant == "mtilde_c" ? MeasureVariant::MTildeC : MeasureVariant::MTildeCN;
      const double N = a.N > 0.0 ? a.N : dim;
      res.emplace(measure_variant(grid, doc.spec.V, ball, c, N, mv));
      label = a.variant;
    }
    std::vector<std::string> f;
    for (int i = 0; i < dim; ++i) f.push_back(format_double(ball.center[i]));
    for (const auto& s : {format_double(ball.radius), format_double(c), format_double(res->value),
                          format_double(res->cap_used), format_double(res->cap_budget), label,
                          format_double(res->outer_radius), std::to_string(meta.seed), meta.config_hash,
                          std::string(tool_version())})
      f.push_back(s);
    csv += csv_line(f);
    rows.push_back({{"c", c}, {"value", res->value}, {"full_integral", res->full_integral},
                    {"removed_nodes", res->removed_set.size()}, {"cap_used", res->cap_used},
                    {"cap_budget", res->cap_budget}, {"strategy", label}, {"outer_radius", res->outer_radius}});
    std::cout << "c " << format_double(c) << " value " << format_double(res->value) << " removed "
              << res->removed_set.size() << " (budget " << format_double(res->cap_budget) << ", used "
              << format_double(res->cap_used) << ")\n";
  }
  Outputs out;
  out.add(a.c.csv_out, csv);
  out.add(a.c.json_out, (ojson{{"meta", meta_json(meta)}, {"ball", a.ball}, {"rows", rows}}).dump(2) + "\n");
  out.flush();
  return 0;
}

// counterexample -------------------------------------------------------------

struct CounterexampleArgs {
  Common c;
  std::string kind = "ivrii", patches, radii, out;
  double width = 0.5, gap = 0.5, h = 0.1, threshold = 1.0;
};

int run_counterexample(CounterexampleArgs& a) {
  a.c.resolve();
  Outputs::check_path(a.out);
  CounterexampleKind kind;
  if (a.kind == "ivrii") kind = CounterexampleKind::IvriiTwoD;
  else if (a.kind == "iwatsuka") kind = CounterexampleKind::IwatsukaPatches;
  else throw ConfigError("--kind must be ivrii or iwatsuka");
  if (a.patches.empty()) throw ConfigError("--patches is required");
  const auto B = parse_number_list(a.patches);
  std::vector<double> R;
  std::vector<double> lam;
  ojson search = ojson::array();
  if (!a.radii.empty()) {
    R = parse_number_list(a.radii);
    if (R.size() != B.size()) throw ConfigError("--radii needs one value per patch");
  } else {
    for (double b : B) {
      const PatchRadius pr = find_patch_radius(b, kind, a.threshold, a.h);
      if (!pr.found) throw NumericalError("no patch radius up to 10 brings lambda below the threshold for B = " +
                                          format_double(b));
      R.push_back(pr.radius);
      search.push_back({{"B", b}, {"radius", pr.radius}, {"lambda", pr.lambda}});
    }
  }
  const CounterexampleFamily fam = layout_patches(kind, B, R, a.width, a.gap);
  const std::string text = counterexample_json(fam, a.h);
  ojson resolved = ojson::parse(text);
  resolved["seed"] = a.c.seed;
  const ArtifactMeta meta{"counterexample", a.c.seed, hash_of("counterexample", resolved)};
  Outputs out;
  if (a.out.empty()) std::cout << text;
  else out.add(a.out, text);
  ojson j = {{"meta", meta_json(meta)}, {"patches", B}, {"radii", R}, {"radius_search", search}};
  out.add(a.c.json_out, j.dump(2) + "\n");
  out.flush();
  if (!a.out.empty())
    for (std::size_t i = 0; i < B.size(); ++i)
      std::cout << "patch " << i << " B " << format_double(B[i]) << " R " << format_double(R[i]) << " center "
                << point_string(fam.centers[i], 2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magspec: discrete magnetic Schrodinger operators, effective potentials and capacities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("magspec ") + tool_version());

  EigsArgs eg;
  auto* s_eigs = app.add_subcommand("eigs", "lowest eigenvalues on a ball");
  eg.c.attach(s_eigs, true, false);
  eg.o_ball = s_eigs->add_option("--ball", eg.ball, "ball 'c1,c2[,c3]:r'");
  eg.o_bc = s_eigs->add_option("--bc", eg.bc, "dirichlet or neumann");
  eg.o_k = s_eigs->add_option("-k,--k", eg.k, "number of eigenvalues");
  eg.o_h = s_eigs->add_option("--spacing", eg.h, "grid spacing when no grid is given");
  eg.o_tol = s_eigs->add_option("--tol", eg.tol, "residual tolerance");
  eg.o_iter = s_eigs->add_option("--max-iter", eg.max_iter, "iteration cap");
  eg.o_dump = s_eigs->add_option("--dump-matrix", eg.dump, "write the sparse matrix (row col re im)");

  SweepArgs sw;
  auto* s_sweep = app.add_subcommand("sweep", "center sweep with a discreteness verdict");
  sw.c.attach(s_sweep, true, true);
  sw.o_r = s_sweep->add_option("--r", sw.r, "ball radius");
  sw.o_q = s_sweep->add_option("--quantity", sw.quantities, "quantity (repeatable): lambda, mu, veff:..., molchanov:c=..., sublevel:A=...");
  sw.o_centers = s_sweep->add_option("--center", sw.centers, "center 'x1,x2[,x3]' (repeatable)");
  sw.o_step = s_sweep->add_option("--step", sw.step, "spacing of default ray centers (default r/2)");
  sw.o_growth = s_sweep->add_option("--growth", sw.growth, "growth factor of the verdict");
  sw.o_jobs = s_sweep->add_option("--jobs", sw.jobs, "worker threads");
  sw.o_tol = s_sweep->add_option("--tol", sw.tol, "eigen residual tolerance");

  EffpotArgs ep;
  auto* s_eff = app.add_subcommand("effpot", "evaluate an effective potential");
  ep.c.attach(s_eff, true, false);
  ep.o_variant = s_eff->add_option("--variant", ep.variant, "twod, dufresnoy, iwatsuka, ahs");
  ep.o_delta = s_eff->add_option("--delta", ep.delta, "delta");
  ep.o_eps = s_eff->add_option("--eps", ep.eps, "epsilon (dufresnoy)");
  ep.o_mode = s_eff->add_option("--mode", ep.mode, "majorant: direct, mb, combined");
  ep.o_r = s_eff->add_option("--r", ep.r, "ball radius (iwatsuka, ahs)");
  s_eff->add_flag("--probe", ep.probe, "twod only: allow delta outside [-1, 1]");
  s_eff->add_option("--point", ep.points, "evaluation point (repeatable); default all grid nodes");

  CapacityArgs ca;
  auto* s_cap = app.add_subcommand("capacity", "discrete Wiener capacity");
  ca.c.attach(s_cap, false, false);
  ca.o_ball = s_cap->add_option("--ball", ca.ball, "reference ball 'c:r'");
  ca.o_outer = s_cap->add_option("--outer", ca.outer, "outer ball (default radius 4r)");
  ca.o_set = s_cap->add_option("--set", ca.set, "set F as 'ball:c:r' (default the reference ball)");
  ca.o_h = s_cap->add_option("--spacing", ca.h, "grid spacing (default r/16)");

  MolchanovArgs mo;
  auto* s_mol = app.add_subcommand("molchanov", "Molchanov functional and measure variants");
  mo.c.attach(s_mol, true, false);
  mo.o_ball = s_mol->add_option("--ball", mo.ball, "ball 'c:r'");
  mo.o_c = s_mol->add_option("--c", mo.cs, "constant(s) c, comma separated");
  mo.o_strategy = s_mol->add_option("--strategy", mo.strategy, "levelset (alias sublevel) or exhaustive");
  mo.o_variant = s_mol->add_option("--variant", mo.variant, "capacity, mtilde_cN, mtilde_c");
  mo.o_outer = s_mol->add_option("--outer-factor", mo.outer_factor, "outer capacity radius / r");
  mo.o_h = s_mol->add_option("--spacing", mo.h, "grid spacing when no grid is given");
  mo.o_N = s_mol->add_option("--N", mo.N, "exponent N of the mtilde_cN budget");

  CounterexampleArgs ce;
  auto* s_ce = app.add_subcommand("counterexample", "write a patch-field config");
  ce.c.attach(s_ce, false, false);
  s_ce->add_option("--kind", ce.kind, "ivrii or iwatsuka");
  s_ce->add_option("--patches", ce.patches, "patch field values B_j, comma separated");
  s_ce->add_option("--radii", ce.radii, "patch radii (default: searched so lambda < threshold)");
  s_ce->add_option("--width", ce.width, "transition width");
  s_ce->add_option("--gap", ce.gap, "extra gap between patch balls");
  s_ce->add_option("--spacing", ce.h, "spacing of the radius search and the written grid");
  s_ce->add_option("--threshold", ce.threshold, "radius search target for lambda");
  s_ce->add_option("--out", ce.out, "output field config (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    if (*s_eigs) return run_eigs(eg);
    if (*s_sweep) return run_sweep_cmd(sw);
    if (*s_eff) return run_effpot(ep);
    if (*s_cap) return run_capacity(ca);
    if (*s_mol) return run_molchanov(mo);
    if (*s_ce) return run_counterexample(ce);
  } catch (const NumericalError& e) {
    std::cerr << "magspec: numerical error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "magspec: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "magspec: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
