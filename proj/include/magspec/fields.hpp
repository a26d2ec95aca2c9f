#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "magspec/expression.hpp"
#include "magspec/grid.hpp"

namespace magspec {

/// Antisymmetric matrix B_jk of a magnetic 2-form. Entries beyond dim are zero.
using Form2 = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// d[l][j][k] = dB_jk / dx^l.
struct FormGradient {
  std::array<Form2, kMaxDim> d{};
};

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Point(const Point&)>;
using FormFn = std::function<Form2(const Point&)>;
using FormGradientFn = std::function<FormGradient(const Point&)>;

enum class DerivativeMode { Analytic, CentralDifference };

/// Physics input: electric potential V, magnetic potential a, field B = da.
/// Evaluation is pure, so a FieldSpec can be shared across threads.
struct FieldSpec {
  int dim = 2;
  ScalarFn V;
  VectorFn a;
  FormFn B;                // empty: central-difference curl of a
  FormGradientFn grad_B;   // consulted only in Analytic mode
  DerivativeMode derivative_mode = DerivativeMode::CentralDifference;
  double h_fd = 1e-3;      // relative step: actual step is h_fd * (1 + |x|)
  std::string description;
};

struct FieldSample {
  double V = 0.0;
  Point a{};
  Form2 B{};
};

struct BGradient {
  FormGradient components;
  double norm = 0.0;  // (sum_{j<k, l} (dB_jk/dx^l)^2)^{1/2}
};

struct FieldNorms {
  double absB = 0.0;
  double gradB = 0.0;
  double angB = 1.0;
};

struct BAlphaCheck {
  double C_min = 0.0;
  std::vector<double> ratio_trace;
};

double abs_B(const Form2& B, int dim);
inline double ang_B(double absB) { return std::sqrt(1.0 + absB * absB); }

/// Evaluates V, a and B at x; throws EvaluationError on non-finite output.
FieldSample eval_field(const FieldSpec& spec, const Point& x);
Form2 eval_B(const FieldSpec& spec, const Point& x);
BGradient grad_B(const FieldSpec& spec, const Point& x);
FieldNorms field_norms(const FieldSpec& spec, const Point& x);

/// C_min = max over samples of |grad B| / (1 + |B|)^alpha, plus the per-point ratios.
BAlphaCheck check_B_alpha(const FieldSpec& spec, double alpha, const std::vector<Point>& samples);

/// Central-difference curl (da)_jk = d_j a_k - d_k a_j with absolute step `step`.
Form2 curl_fd(const VectorFn& a, const Point& x, int dim, double step);

double max_antisymmetry_defect(const Form2& B, int dim);

// Field builders -------------------------------------------------------------

enum class Gauge2D { Symmetric, Landau };

/// Constant 2D field B_12 = B0. Symmetric gauge a = (-B0 x2/2, B0 x1/2),
/// Landau gauge a = (0, B0 x1).
FieldSpec constant_field_2d(double B0, Gauge2D gauge, ScalarFn V = {});

/// Constant 3D field given by (B_12, B_13, B_23) in the symmetric gauge a_j = x_k B_kj / 2.
FieldSpec constant_field_3d(const std::array<double, 3>& components, ScalarFn V = {});

FieldSpec free_field(int dim);

/// V = omega2 * |x|^2, a = 0.
FieldSpec harmonic_field(int dim, double omega2 = 1.0);

/// Field from expression strings. `B` (full dim x dim matrix) is optional:
/// when absent it is the symbolic curl of `a` (Analytic) or a central-difference
/// curl (CentralDifference). When `a` is empty, a is built from B by the
/// radial Poincare formula about `gauge_center`.
struct ExpressionFieldConfig {
  int dim = 2;
  std::string V = "0";
  std::vector<std::string> a;
  std::optional<std::vector<std::vector<std::string>>> B;
  DerivativeMode derivative_mode = DerivativeMode::Analytic;
  double h_fd = 1e-3;
  Point gauge_center{};
  int quad_points = 16;
};

FieldSpec expression_field(const ExpressionFieldConfig& config);

/// Replace V, keeping the magnetic part.
FieldSpec with_potential(FieldSpec spec, ScalarFn V);

/// Add a gradient to the magnetic potential: a -> a + grad(phi), B unchanged.
FieldSpec with_gauge_shift(FieldSpec spec, ScalarFn phi, VectorFn grad_phi);

}  // namespace magspec
