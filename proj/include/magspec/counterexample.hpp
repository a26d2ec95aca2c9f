#pragma once

#include <vector>

#include "magspec/fields.hpp"

namespace magspec {

enum class CounterexampleKind { IvriiTwoD, IwatsukaPatches };

/// 2D field that is exactly B_j on each disk B(x_j, R_j), interpolated by a
/// C^1 cubic smoothstep on R_j <= |x - x_j| <= R_j + w toward the background
/// max(B_1, log(1 + |x|)). IvriiTwoD sets V = -B; IwatsukaPatches sets V = 0.
struct CounterexampleFamily {
  CounterexampleKind kind = CounterexampleKind::IvriiTwoD;
  std::vector<double> B_values;
  std::vector<double> radii;
  std::vector<Point> centers;
  double transition_width = 0.5;

  /// Throws ParameterError / GeometryError when the construction rules are violated.
  void validate() const;
};

double counterexample_B(const CounterexampleFamily& family, const Point& x);
Point counterexample_grad_B(const CounterexampleFamily& family, const Point& x);

FieldSpec build_counterexample(const CounterexampleFamily& family, int quad_points = 16);

/// Patches laid out along the positive x^1 axis with balls B(x_j, R_j + 1)
/// separated by `gap`.
CounterexampleFamily layout_patches(CounterexampleKind kind, const std::vector<double>& B_values,
                                    const std::vector<double>& radii, double transition_width = 0.5,
                                    double gap = 0.5);

struct PatchRadius {
  double radius = 0.0;
  double lambda = 0.0;  // Dirichlet bottom of H on B(x_j, radius)
  bool found = false;
};

/// Smallest R in r_start, r_start + r_step, ... <= r_max with
/// lambda(B(x_j, R); H) < threshold, evaluated on the constant-field patch
/// (B = B_j and V = -B_j for IvriiTwoD, V = 0 otherwise) at spacing h.
PatchRadius find_patch_radius(double B_j, CounterexampleKind kind, double threshold, double h, double r_start = 1.0,
                              double r_step = 0.5, double r_max = 10.0);

}  // namespace magspec
