#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "magspec/capacity.hpp"
#include "magspec/config.hpp"
#include "magspec/counterexample.hpp"
#include "magspec/effective.hpp"
#include "magspec/eigensolve.hpp"
#include "magspec/errors.hpp"
#include "magspec/fields.hpp"
#include "magspec/report.hpp"
#include "magspec/sweep.hpp"

namespace py = pybind11;
using namespace magspec;

namespace {

Point to_point(const std::vector<double>& v) {
  if (v.empty() || v.size() > 3) throw ParameterError("points have 1 to 3 coordinates");
  Point p{};
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i];
  return p;
}

std::vector<double> from_point(const Point& p, int dim) { return std::vector<double>(p.begin(), p.begin() + dim); }

Grid make_grid(const std::vector<double>& origin, double spacing, const std::vector<int>& shape) {
  if (origin.size() != shape.size()) throw ParameterError("origin and shape lengths differ");
  MultiIndex s{1, 1, 1};
  for (std::size_t i = 0; i < shape.size(); ++i) s[i] = shape[i];
  return Grid(static_cast<int>(shape.size()), to_point(origin), spacing, s);
}

Grid grid_for_ball(const FieldSpec& f, const std::optional<Grid>& grid, const BallRegion& ball, double spacing) {
  if (grid) return *grid;
  Point lo{}, hi{};
  for (int i = 0; i < f.dim; ++i) {
    lo[i] = ball.center[i] - ball.radius - spacing;
    hi[i] = ball.center[i] + ball.radius + spacing;
  }
  return Grid::enclosing(f.dim, lo, hi, spacing);
}

py::dict spectral_dict(const SpectralResult& r) {
  py::dict d;
  d["eigenvalues"] = r.eigenvalues;
  d["residuals"] = r.residuals;
  d["iterations"] = r.iterations;
  d["method"] = r.method;
  return d;
}

}  // namespace

PYBIND11_MODULE(_magspec, m) {
  m.doc() = "discrete magnetic Schrodinger operators";
  m.attr("__version__") = tool_version();

  // translators run newest first, so the base class goes in first
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Grid>(m, "Grid")
      .def(py::init(&make_grid), py::arg("origin"), py::arg("spacing"), py::arg("shape"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("node_count", &Grid::node_count)
      .def_property_readonly("origin", [](const Grid& g) { return from_point(g.origin(), g.dim()); })
      .def_property_readonly("shape", [](const Grid& g) {
        return std::vector<int>(g.shape().begin(), g.shape().begin() + g.dim());
      })
      .def("coordinate", [](const Grid& g, std::size_t i) { return from_point(g.coordinate(i), g.dim()); })
      .def_static("enclosing", [](const std::vector<double>& lo, const std::vector<double>& hi, double h) {
        return Grid::enclosing(static_cast<int>(lo.size()), to_point(lo), to_point(hi), h);
      });

  py::class_<FieldSpec>(m, "Field")
      .def_readonly("dim", &FieldSpec::dim)
      .def_readonly("description", &FieldSpec::description)
      .def("V", [](const FieldSpec& f, const std::vector<double>& x) { return eval_field(f, to_point(x)).V; })
      .def("a", [](const FieldSpec& f, const std::vector<double>& x) { return from_point(eval_field(f, to_point(x)).a, f.dim); })
      .def("B", [](const FieldSpec& f, const std::vector<double>& x) {
        const Form2 B = eval_B(f, to_point(x));
        std::vector<std::vector<double>> out(f.dim, std::vector<double>(f.dim));
        for (int j = 0; j < f.dim; ++j)
          for (int k = 0; k < f.dim; ++k) out[j][k] = B[j][k];
        return out;
      })
      .def("abs_B", [](const FieldSpec& f, const std::vector<double>& x) { return abs_B(eval_B(f, to_point(x)), f.dim); });

  m.def(
      "constant_field_2d",
      [](double B0, const std::string& gauge, double V0) {
        Gauge2D g;
        if (gauge == "symmetric") g = Gauge2D::Symmetric;
        else if (gauge == "landau") g = Gauge2D::Landau;
        else throw ParameterError("gauge must be 'symmetric' or 'landau'");
        return constant_field_2d(B0, g, [V0](const Point&) { return V0; });
      },
      py::arg("B0"), py::arg("gauge") = "symmetric", py::arg("V0") = 0.0);
  m.def("constant_field_3d", [](const std::array<double, 3>& c) { return constant_field_3d(c); }, py::arg("components"));
  m.def("free_field", &free_field, py::arg("dim") = 2);
  m.def("harmonic_field", &harmonic_field, py::arg("dim") = 2, py::arg("omega2") = 1.0);
  m.def(
      "expression_field",
      [](int dim, const std::string& V, const std::vector<std::string>& a,
         const std::optional<std::vector<std::vector<std::string>>>& B) {
        ExpressionFieldConfig c;
        c.dim = dim;
        c.V = V;
        c.a = a;
        c.B = B;
        return expression_field(c);
      },
      py::arg("dim"), py::arg("V") = "0", py::arg("a") = std::vector<std::string>{}, py::arg("B") = py::none());
  m.def(
      "load_field",
      [](const std::string& path) {
        const auto doc = load_field_document(path);
        return py::make_tuple(doc.spec, doc.grid ? py::cast(*doc.grid) : py::none());
      },
      py::arg("path"), "(field, grid or None) from a field JSON file");
  m.def(
      "parse_field",
      [](const std::string& text) {
        const auto doc = parse_field_document(text);
        return py::make_tuple(doc.spec, doc.grid ? py::cast(*doc.grid) : py::none());
      },
      py::arg("text"));

  m.def(
      "eigs",
      [](const FieldSpec& f, const std::vector<double>& center, double radius, const std::string& bc, int k,
         double spacing, const std::optional<Grid>& grid, double tol, std::uint64_t seed) {
        const BallRegion ball(to_point(center), radius);
        const Grid g = grid_for_ball(f, grid, ball, spacing);
        SolverOptions o;
        o.k = k;
        o.tol = tol;
        o.seed = seed;
        py::gil_scoped_release nogil;
        const auto r = smallest_eigs(assemble(g, f, ball, boundary_from_string(bc)), o);
        py::gil_scoped_acquire gil;
        return spectral_dict(r);
      },
      py::arg("field"), py::arg("center"), py::arg("radius"), py::arg("bc") = "dirichlet", py::arg("k") = 1,
      py::arg("spacing") = 0.1, py::arg("grid") = py::none(), py::arg("tol") = 1e-8, py::arg("seed") = 20240601);

  m.def(
      "effective_potential",
      [](const FieldSpec& f, const std::vector<std::vector<double>>& points, const std::string& variant, double delta,
         double eps, const std::string& mode, double r, bool probe, const std::optional<Grid>& grid) {
        EffectivePotentialSpec s;
        s.variant = effective_variant_from_string(variant);
        s.delta = delta;
        s.eps = eps;
        s.mode = majorant_mode_from_string(mode);
        s.r = r;
        s.probe = probe;
        const EffectivePotential V(f, s, grid);
        std::vector<double> out;
        for (const auto& p : points) out.push_back(V(to_point(p)));
        return out;
      },
      py::arg("field"), py::arg("points"), py::arg("variant") = "twod", py::arg("delta") = 1.0, py::arg("eps") = 1.0,
      py::arg("mode") = "combined", py::arg("r") = 1.0, py::arg("probe") = false, py::arg("grid") = py::none());

  m.def(
      "ball_capacity",
      [](const std::vector<double>& center, double radius, double spacing, double outer_factor) {
        const Point c = to_point(center);
        const int dim = static_cast<int>(center.size());
        Point lo{}, hi{};
        for (int i = 0; i < dim; ++i) {
          lo[i] = c[i] - outer_factor * radius - spacing;
          hi[i] = c[i] + outer_factor * radius + spacing;
        }
        const Grid g = Grid::enclosing(dim, lo, hi, spacing);
        py::gil_scoped_release nogil;
        return ball_capacity(g, BallRegion(c, radius), outer_factor);
      },
      py::arg("center"), py::arg("radius"), py::arg("spacing"), py::arg("outer_factor") = 4.0);

  m.def(
      "molchanov",
      [](const FieldSpec& f, const std::vector<double>& center, double radius, double c, const std::string& strategy,
         double spacing, const std::optional<Grid>& grid) {
        const BallRegion ball(to_point(center), radius);
        MolchanovOptions o;
        o.strategy = molchanov_strategy_from_string(strategy);
        const Grid g = grid_for_ball(f, grid, ball, spacing);
        const auto r = molchanov_functional(g, f.V, ball, c, o);
        py::dict d;
        d["value"] = r.value;
        d["full_integral"] = r.full_integral;
        d["removed"] = r.removed_set.size();
        d["cap_budget"] = r.cap_budget;
        d["cap_used"] = r.cap_used;
        d["ball_capacity"] = r.ball_cap;
        return d;
      },
      py::arg("field"), py::arg("center"), py::arg("radius"), py::arg("c"), py::arg("strategy") = "levelset",
      py::arg("spacing") = 0.1, py::arg("grid") = py::none());

  m.def(
      "sweep_json",
      [](const FieldSpec& f, const Grid& grid, double r, const std::vector<std::string>& quantities,
         const std::optional<std::vector<std::vector<double>>>& centers, std::optional<double> step, int jobs,
         std::uint64_t seed) {
        SweepPlan plan;
        plan.grid = grid;
        plan.spec = f;
        plan.r = r;
        for (const auto& q : quantities) plan.quantities.push_back(parse_quantity(q));
        if (centers)
          for (const auto& c : *centers) plan.centers.push_back(to_point(c));
        else
          plan.centers = default_centers(grid, r, step);
        plan.jobs = jobs;
        plan.solver.seed = seed;
        SweepReport rep;
        {
          py::gil_scoped_release nogil;
          rep = run_sweep(plan);
        }
        return sweep_json(rep, ArtifactMeta{"python.sweep", seed, hash_hex(fnv1a64("python.sweep"))}).dump(2);
      },
      py::arg("field"), py::arg("grid"), py::arg("r"), py::arg("quantities") = std::vector<std::string>{"lambda"},
      py::arg("centers") = py::none(), py::arg("step") = py::none(), py::arg("jobs") = 1, py::arg("seed") = 20240601);

  m.def(
      "counterexample_json",
      [](const std::string& kind, const std::vector<double>& B_values, const std::vector<double>& radii,
         double width, double gap, double spacing) {
        CounterexampleKind k;
        if (kind == "ivrii") k = CounterexampleKind::IvriiTwoD;
        else if (kind == "iwatsuka") k = CounterexampleKind::IwatsukaPatches;
        else throw ParameterError("kind must be 'ivrii' or 'iwatsuka'");
        return counterexample_json(layout_patches(k, B_values, radii, width, gap), spacing);
      },
      py::arg("kind"), py::arg("B_values"), py::arg("radii"), py::arg("width") = 0.5, py::arg("gap") = 0.5,
      py::arg("spacing") = 0.1);
}
