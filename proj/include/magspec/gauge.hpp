#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "magspec/fields.hpp"
#include "magspec/grid.hpp"

namespace magspec {

/// Gauss-Legendre rule mapped to [0, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int n);

/// Extra breakpoints in (0, 1) for the radial integral t -> B(center + t (x - center)),
/// placed where the integrand loses smoothness.
using BreakpointFn = std::function<void(const Point& center, const Point& x, std::vector<double>& t)>;

struct GaugeResult {
  VectorFn a;
  double sup_bound = 0.0;    // dim * max|B_jk| (sampled) * radius
  int quadrature_points = 0;
};

/// Radial-gauge potential about `center`, valid on any star-shaped domain around it.
VectorFn poincare_potential(const FormFn& B, int dim, const Point& center, int quad_points = 16,
                            BreakpointFn breakpoints = {});

/// a_j(x) = sum_k y_k int_0^1 t B_kj(x0 + t y) dt, y = x - x0, x0 the ball center.
/// Exact for constant B (a_j = 1/2 sum_k y_k B_kj). Composite rule when breakpoints are given.
GaugeResult poincare_gauge(const FormFn& B, int dim, const BallRegion& ball, int quad_points = 16,
                           BreakpointFn breakpoints = {});

struct GaugeDifference {
  bool is_closed = false;
  double max_curl = 0.0;
  std::optional<ScalarFn> phi;  // a2 - a1 = grad phi, phi(center) = 0
};

/// Checks curl(a2 - a1) ~ 0 at sample points of the ball (tolerance 1e-6) and,
/// if closed, returns phi by radial line integration from the center.
GaugeDifference gauge_difference(const VectorFn& a1, const VectorFn& a2, int dim, const BallRegion& ball,
                                 int samples = 64, std::uint64_t seed = 7, int quad_points = 16);

}  // namespace magspec
