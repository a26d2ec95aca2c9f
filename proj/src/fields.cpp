#include "magspec/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "magspec/errors.hpp"
#include "magspec/gauge.hpp"

namespace magspec {

namespace {

[[noreturn]] void throw_nonfinite(const char* what, const Point& x, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << "non-finite " << what << " at x = (";
  for (int i = 0; i < dim; ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  throw EvaluationError(os.str());
}

double fd_step(const FieldSpec& spec, const Point& x) { return spec.h_fd * (1.0 + norm(x, spec.dim)); }

}  // namespace

double abs_B(const Form2& B, int dim) {
  double s = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = j + 1; k < dim; ++k) s += B[j][k] * B[j][k];
  return std::sqrt(s);
}

double max_antisymmetry_defect(const Form2& B, int dim) {
  double m = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(B[j][k] + B[k][j]));
  return m;
}

Form2 curl_fd(const VectorFn& a, const Point& x, int dim, double step) {
  // d[l][k] = d a_k / d x^l
  double d[kMaxDim][kMaxDim] = {};
  for (int l = 0; l < dim; ++l) {
    Point xp = x, xm = x;
    xp[l] += step;
    xm[l] -= step;
    const Point ap = a(xp), am = a(xm);
    for (int k = 0; k < dim; ++k) d[l][k] = (ap[k] - am[k]) / (2.0 * step);
  }
  Form2 B{};
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) B[j][k] = j == k ? 0.0 : d[j][k] - d[k][j];
  return B;
}

Form2 eval_B(const FieldSpec& spec, const Point& x) {
  Form2 B = spec.B ? spec.B(x) : curl_fd(spec.a, x, spec.dim, fd_step(spec, x));
  for (int j = 0; j < spec.dim; ++j)
    for (int k = 0; k < spec.dim; ++k)
      if (!std::isfinite(B[j][k])) throw_nonfinite("magnetic field", x, spec.dim);
  return B;
}

FieldSample eval_field(const FieldSpec& spec, const Point& x) {
  FieldSample s;
  s.V = spec.V ? spec.V(x) : 0.0;
  if (!std::isfinite(s.V)) throw_nonfinite("potential V", x, spec.dim);
  s.a = spec.a ? spec.a(x) : Point{};
  for (int i = 0; i < spec.dim; ++i)
    if (!std::isfinite(s.a[i])) throw_nonfinite("magnetic potential", x, spec.dim);
  s.B = eval_B(spec, x);
  return s;
}

BGradient grad_B(const FieldSpec& spec, const Point& x) {
  BGradient g;
  const int n = spec.dim;
  if (spec.derivative_mode == DerivativeMode::Analytic && spec.grad_B) {
    g.components = spec.grad_B(x);
  } else {
    const double step = fd_step(spec, x);
    for (int l = 0; l < n; ++l) {
      Point xp = x, xm = x;
      xp[l] += step;
      xm[l] -= step;
      const Form2 bp = eval_B(spec, xp), bm = eval_B(spec, xm);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) g.components.d[l][j][k] = (bp[j][k] - bm[j][k]) / (2.0 * step);
    }
  }
  double s = 0.0;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) s += g.components.d[l][j][k] * g.components.d[l][j][k];
  g.norm = std::sqrt(s);
  if (!std::isfinite(g.norm)) throw_nonfinite("field gradient", x, n);
  return g;
}

FieldNorms field_norms(const FieldSpec& spec, const Point& x) {
  FieldNorms f;
  f.absB = abs_B(eval_B(spec, x), spec.dim);
  f.gradB = grad_B(spec, x).norm;
  f.angB = ang_B(f.absB);
  return f;
}

BAlphaCheck check_B_alpha(const FieldSpec& spec, double alpha, const std::vector<Point>& samples) {
  if (samples.empty()) throw ParameterError("check_B_alpha needs at least one sample point");
  BAlphaCheck out;
  out.ratio_trace.reserve(samples.size());
  for (const Point& x : samples) {
    const FieldNorms f = field_norms(spec, x);
    const double r = f.gradB / std::pow(1.0 + f.absB, alpha);
    out.ratio_trace.push_back(r);
    out.C_min = std::max(out.C_min, r);
  }
  return out;
}

FieldSpec constant_field_2d(double B0, Gauge2D gauge, ScalarFn V) {
  FieldSpec s;
  s.dim = 2;
  s.V = V ? std::move(V) : ScalarFn([](const Point&) { return 0.0; });
  if (gauge == Gauge2D::Symmetric)
    s.a = [B0](const Point& x) { return Point{-0.5 * B0 * x[1], 0.5 * B0 * x[0], 0.0}; };
  else
    s.a = [B0](const Point& x) { return Point{0.0, B0 * x[0], 0.0}; };
  s.B = [B0](const Point&) {
    Form2 B{};
    B[0][1] = B0;
    B[1][0] = -B0;
    return B;
  };
  s.grad_B = [](const Point&) { return FormGradient{}; };
  s.derivative_mode = DerivativeMode::Analytic;
  std::ostringstream os;
  os << "constant field B0=" << B0 << (gauge == Gauge2D::Symmetric ? " (symmetric gauge)" : " (Landau gauge)");
  s.description = os.str();
  return s;
}

FieldSpec constant_field_3d(const std::array<double, 3>& c, ScalarFn V) {
  Form2 B{};
  B[0][1] = c[0];
  B[0][2] = c[1];
  B[1][2] = c[2];
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < j; ++k) B[j][k] = -B[k][j];
  FieldSpec s;
  s.dim = 3;
  s.V = V ? std::move(V) : ScalarFn([](const Point&) { return 0.0; });
  s.a = [B](const Point& x) {
    Point a{};
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) a[j] += 0.5 * x[k] * B[k][j];
    return a;
  };
  s.B = [B](const Point&) { return B; };
  s.grad_B = [](const Point&) { return FormGradient{}; };
  s.derivative_mode = DerivativeMode::Analytic;
  s.description = "constant 3D field";
  return s;
}

FieldSpec free_field(int dim) {
  FieldSpec s;
  s.dim = dim;
  s.V = [](const Point&) { return 0.0; };
  s.a = [](const Point&) { return Point{}; };
  s.B = [](const Point&) { return Form2{}; };
  s.grad_B = [](const Point&) { return FormGradient{}; };
  s.derivative_mode = DerivativeMode::Analytic;
  s.description = "free";
  return s;
}

FieldSpec harmonic_field(int dim, double omega2) {
  FieldSpec s = free_field(dim);
  s.V = [dim, omega2](const Point& x) { return omega2 * dot(x, x, dim); };
  s.description = "harmonic";
  return s;
}

FieldSpec with_potential(FieldSpec spec, ScalarFn V) {
  spec.V = std::move(V);
  return spec;
}

FieldSpec with_gauge_shift(FieldSpec spec, ScalarFn, VectorFn grad_phi) {
  if (!spec.B) {
    // keep B defined by the original potential so the shift cannot perturb it
    const VectorFn a0 = spec.a;
    const int dim = spec.dim;
    const double h_fd = spec.h_fd;
    spec.B = [a0, dim, h_fd](const Point& x) { return curl_fd(a0, x, dim, h_fd * (1.0 + norm(x, dim))); };
  }
  const VectorFn a0 = spec.a;
  spec.a = [a0, grad_phi](const Point& x) {
    Point a = a0(x);
    const Point g = grad_phi(x);
    for (int i = 0; i < kMaxDim; ++i) a[i] += g[i];
    return a;
  };
  return spec;
}

FieldSpec expression_field(const ExpressionFieldConfig& cfg) {
  const int n = cfg.dim;
  if (n != 2 && n != 3) throw ConfigError("field dim must be 2 or 3");
  FieldSpec s;
  s.dim = n;
  s.derivative_mode = cfg.derivative_mode;
  s.h_fd = cfg.h_fd;

  const Expression V = Expression::parse(cfg.V, n);
  s.V = [V](const Point& x) { return V.evaluate(x); };

  std::vector<std::vector<Expression>> Bexpr;
  bool have_B = false;
  if (cfg.B) {
    const auto& rows = *cfg.B;
    if (static_cast<int>(rows.size()) != n) throw ConfigError("B must be a dim x dim matrix of expressions");
    Bexpr.assign(n, std::vector<Expression>(n));
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(rows[j].size()) != n) throw ConfigError("B must be a dim x dim matrix of expressions");
      for (int k = 0; k < n; ++k) Bexpr[j][k] = Expression::parse(rows[j][k], n);
    }
    // antisymmetry must hold symbolically up to sampling
    const Point probes[3] = {{0.3, -0.7, 0.2}, {1.1, 0.4, -0.9}, {-2.0, 1.5, 0.6}};
    for (const Point& p : probes)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double bjk = Bexpr[j][k].evaluate(p), bkj = Bexpr[k][j].evaluate(p);
          if (std::abs(bjk + bkj) > 1e-12 * (1.0 + std::abs(bjk)))
            throw ConfigError("B must be antisymmetric (B_kj = -B_jk)");
        }
    have_B = true;
  }

  std::vector<Expression> aexpr;
  if (!cfg.a.empty()) {
    if (static_cast<int>(cfg.a.size()) != n) throw ConfigError("a must have dim components");
    for (const auto& e : cfg.a) aexpr.push_back(Expression::parse(e, n));
    s.a = [aexpr](const Point& x) {
      Point a{};
      for (std::size_t i = 0; i < aexpr.size(); ++i) a[i] = aexpr[i].evaluate(x);
      return a;
    };
    if (!have_B && cfg.derivative_mode == DerivativeMode::Analytic) {
      Bexpr.assign(n, std::vector<Expression>(n));
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          Bexpr[j][k] = j == k ? Expression() : aexpr[k].derivative(j) - aexpr[j].derivative(k);
      have_B = true;
    }
  }

  if (have_B) {
    s.B = [Bexpr, n](const Point& x) {
      Form2 B{};
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) B[j][k] = Bexpr[j][k].evaluate(x);
      return B;
    };
    if (cfg.derivative_mode == DerivativeMode::Analytic) {
      std::vector<std::vector<std::vector<Expression>>> dB(
          n, std::vector<std::vector<Expression>>(n, std::vector<Expression>(n)));
      for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) dB[l][j][k] = Bexpr[j][k].derivative(l);
      s.grad_B = [dB, n](const Point& x) {
        FormGradient g;
        for (int l = 0; l < n; ++l)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) g.d[l][j][k] = dB[l][j][k].evaluate(x);
        return g;
      };
    }
  }

  if (aexpr.empty()) {
    if (!have_B) throw ConfigError("field config needs a magnetic potential 'a' or a field 'B'");
    s.a = poincare_potential(s.B, n, cfg.gauge_center, cfg.quad_points);
  }
  s.description = "expression field";
  return s;
}

}  // namespace magspec
