#include "magspec/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "magspec/errors.hpp"

namespace magspec {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ParameterError("quadrature order must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]; x is the i-th largest root
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

VectorFn poincare_potential(const FormFn& B, int dim, const Point& center, int quad_points, BreakpointFn breakpoints) {
  if (quad_points < 8) throw ParameterError("Poincare gauge needs at least 8 quadrature points");
  auto rule = std::make_shared<const QuadratureRule>(gauss_legendre(quad_points));
  return [B, dim, center, rule, breakpoints](const Point& x) {
    Point y{};
    for (int i = 0; i < dim; ++i) y[i] = x[i] - center[i];
    std::vector<double> cuts{0.0, 1.0};
    if (breakpoints) {
      breakpoints(center, x, cuts);
      std::sort(cuts.begin(), cuts.end());
      cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [](double t) { return t < 0.0 || t > 1.0; }), cuts.end());
      cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double s, double t) { return t - s < 1e-14; }), cuts.end());
      if (cuts.front() != 0.0) cuts.insert(cuts.begin(), 0.0);
      if (cuts.back() != 1.0) cuts.push_back(1.0);
    }
    // m[k][j] = int_0^1 t B_kj(x0 + t y) dt
    double m[kMaxDim][kMaxDim] = {};
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double t0 = cuts[s], len = cuts[s + 1] - cuts[s];
      if (len <= 0.0) continue;
      for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
        const double t = t0 + len * rule->nodes[q];
        const double w = len * rule->weights[q] * t;
        Point p{};
        for (int i = 0; i < dim; ++i) p[i] = center[i] + t * y[i];
        const Form2 b = B(p);
        for (int k = 0; k < dim; ++k)
          for (int j = 0; j < dim; ++j) m[k][j] += w * b[k][j];
      }
    }
    Point a{};
    for (int j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += y[k] * m[k][j];
      a[j] = s;
      if (!std::isfinite(s)) throw EvaluationError("non-finite magnetic field sample in Poincare quadrature");
    }
    return a;
  };
}

GaugeResult poincare_gauge(const FormFn& B, int dim, const BallRegion& ball, int quad_points, BreakpointFn breakpoints) {
  GaugeResult g;
  g.a = poincare_potential(B, dim, ball.center, quad_points, std::move(breakpoints));
  g.quadrature_points = quad_points;
  // sup |B_jk| sampled on a lattice over the ball, 8 points per radius per axis
  const int m = 8;
  double C = 0.0;
  MultiIndex i{0, 0, 0};
  const int kz = dim == 3 ? m : 0;
  for (i[2] = -kz; i[2] <= kz; ++i[2])
    for (i[1] = -m; i[1] <= m; ++i[1])
      for (i[0] = -m; i[0] <= m; ++i[0]) {
        Point p = ball.center;
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          const double off = ball.radius * i[a] / m;
          p[a] += off;
          r2 += off * off;
        }
        if (r2 > ball.radius * ball.radius) continue;
        const Form2 b = B(p);
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k) C = std::max(C, std::abs(b[j][k]));
      }
  g.sup_bound = dim * C * ball.radius;
  return g;
}

GaugeDifference gauge_difference(const VectorFn& a1, const VectorFn& a2, int dim, const BallRegion& ball, int samples,
                                 std::uint64_t seed, int quad_points) {
  GaugeDifference out;
  const VectorFn diff = [a1, a2](const Point& x) {
    Point d = a2(x);
    const Point b = a1(x);
    for (int i = 0; i < kMaxDim; ++i) d[i] -= b[i];
    return d;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double step = 1e-4 * ball.radius;
  for (int s = 0; s < samples; ++s) {
    Point p{};
    double r2 = 0.0;
    do {
      r2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        p[i] = u(rng);
        r2 += p[i] * p[i];
      }
    } while (r2 > 0.81);
    for (int i = 0; i < dim; ++i) p[i] = ball.center[i] + ball.radius * p[i];
    const Form2 c = curl_fd(diff, p, dim, step);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) out.max_curl = std::max(out.max_curl, std::abs(c[j][k]));
  }
  out.is_closed = out.max_curl <= 1e-6;
  if (out.is_closed) {
    auto rule = std::make_shared<const QuadratureRule>(gauss_legendre(quad_points));
    const Point c = ball.center;
    out.phi = [diff, rule, c, dim](const Point& x) {
      Point y{};
      for (int i = 0; i < dim; ++i) y[i] = x[i] - c[i];
      double s = 0.0;
      for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
        Point p{};
        for (int i = 0; i < dim; ++i) p[i] = c[i] + rule->nodes[q] * y[i];
        s += rule->weights[q] * dot(diff(p), y, dim);
      }
      return s;
    };
  }
  return out;
}

}  // namespace magspec
