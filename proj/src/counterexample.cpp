#include "magspec/counterexample.hpp"

#include <cmath>
#include <sstream>

#include "magspec/errors.hpp"
#include "magspec/eigensolve.hpp"
#include "magspec/gauge.hpp"

namespace magspec {

namespace {

double smoothstep3(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep3_prime(double s) { return 6.0 * s * (1.0 - s); }

double background(const CounterexampleFamily& f, const Point& x) {
  return std::max(f.B_values.front(), std::log1p(norm(x, 2)));
}

}  // namespace

void CounterexampleFamily::validate() const {
  const std::size_t n = B_values.size();
  if (n == 0) throw ParameterError("counterexample needs at least one patch");
  if (radii.size() != n || centers.size() != n)
    throw ParameterError("B_values, radii and centers must have equal length");
  if (!(transition_width > 0.0 && transition_width <= 1.0))
    throw ParameterError("transition_width must lie in (0, 1]");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(B_values[j] > 0.0)) throw ParameterError("patch field values must be positive");
    if (j > 0 && !(B_values[j] > B_values[j - 1])) throw ParameterError("patch field values must be increasing");
    if (!(radii[j] > 0.0)) throw ParameterError("patch radii must be positive");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(centers[i], centers[j], 2);
      if (d < radii[i] + radii[j] + 2.0) {
        std::ostringstream os;
        os << "patches " << i << " and " << j << " overlap: balls B(x_j, R_j + 1) must be disjoint";
        throw GeometryError(os.str());
      }
    }
}

double counterexample_B(const CounterexampleFamily& f, const Point& x) {
  for (std::size_t j = 0; j < f.B_values.size(); ++j) {
    const double d = distance(x, f.centers[j], 2);
    if (d <= f.radii[j]) return f.B_values[j];
    if (d < f.radii[j] + f.transition_width) {
      const double s = smoothstep3((d - f.radii[j]) / f.transition_width);
      return (1.0 - s) * f.B_values[j] + s * background(f, x);
    }
  }
  return background(f, x);
}

Point counterexample_grad_B(const CounterexampleFamily& f, const Point& x) {
  const double r = norm(x, 2);
  Point gG{};
  if (std::log1p(r) > f.B_values.front() && r > 0.0) {
    gG[0] = x[0] / (r * (1.0 + r));
    gG[1] = x[1] / (r * (1.0 + r));
  }
  for (std::size_t j = 0; j < f.B_values.size(); ++j) {
    const double d = distance(x, f.centers[j], 2);
    if (d <= f.radii[j]) return Point{};
    if (d < f.radii[j] + f.transition_width) {
      const double t = (d - f.radii[j]) / f.transition_width;
      const double s = smoothstep3(t);
      const double ds = smoothstep3_prime(t) / f.transition_width;
      const double G = background(f, x);
      Point g{};
      for (int i = 0; i < 2; ++i) {
        const double dd = (x[i] - f.centers[j][i]) / d;
        g[i] = ds * dd * (G - f.B_values[j]) + s * gG[i];
      }
      return g;
    }
  }
  return gG;
}

FieldSpec build_counterexample(const CounterexampleFamily& family, int quad_points) {
  family.validate();
  auto f = std::make_shared<const CounterexampleFamily>(family);
  FieldSpec s;
  s.dim = 2;
  s.B = [f](const Point& x) {
    Form2 B{};
    B[0][1] = counterexample_B(*f, x);
    B[1][0] = -B[0][1];
    return B;
  };
  s.grad_B = [f](const Point& x) {
    const Point g = counterexample_grad_B(*f, x);
    FormGradient out;
    for (int l = 0; l < 2; ++l) {
      out.d[l][0][1] = g[l];
      out.d[l][1][0] = -g[l];
    }
    return out;
  };
  s.derivative_mode = DerivativeMode::Analytic;
  if (family.kind == CounterexampleKind::IvriiTwoD)
    s.V = [f](const Point& x) { return -counterexample_B(*f, x); };
  else
    s.V = [](const Point&) { return 0.0; };

  // Radial integrand loses smoothness where the ray crosses a patch circle,
  // an annulus circle, or the level |x| = e^{B_1} - 1 of the background.
  const BreakpointFn cuts = [f](const Point& c, const Point& x, std::vector<double>& t) {
    const double y0 = x[0] - c[0], y1 = x[1] - c[1];
    const double yy = y0 * y0 + y1 * y1;
    if (yy == 0.0) return;
    auto circle = [&](double q0, double q1, double rho) {
      // |c + t y - q|^2 = rho^2
      const double w0 = c[0] - q0, w1 = c[1] - q1;
      const double b = 2.0 * (w0 * y0 + w1 * y1);
      const double cc = w0 * w0 + w1 * w1 - rho * rho;
      const double disc = b * b - 4.0 * yy * cc;
      if (disc < 0.0) return;
      const double sq = std::sqrt(disc);
      t.push_back((-b - sq) / (2.0 * yy));
      t.push_back((-b + sq) / (2.0 * yy));
    };
    for (std::size_t j = 0; j < f->B_values.size(); ++j) {
      circle(f->centers[j][0], f->centers[j][1], f->radii[j]);
      circle(f->centers[j][0], f->centers[j][1], f->radii[j] + f->transition_width);
    }
    circle(0.0, 0.0, std::expm1(f->B_values.front()));
  };
  s.a = poincare_potential(s.B, 2, Point{}, quad_points, cuts);

  std::ostringstream os;
  os << (family.kind == CounterexampleKind::IvriiTwoD ? "Ivrii" : "Iwatsuka-patch") << " field, "
     << family.B_values.size() << " patches";
  s.description = os.str();
  return s;
}

CounterexampleFamily layout_patches(CounterexampleKind kind, const std::vector<double>& B_values,
                                    const std::vector<double>& radii, double transition_width, double gap) {
  CounterexampleFamily f;
  f.kind = kind;
  f.B_values = B_values;
  f.radii = radii;
  f.transition_width = transition_width;
  double x = 0.0;
  for (std::size_t j = 0; j < B_values.size(); ++j) {
    x += (j == 0 ? 1.0 : radii[j - 1] + 1.0 + gap) + radii[j] + 1.0;
    f.centers.push_back(Point{x, 0.0, 0.0});
  }
  f.validate();
  return f;
}

}  // namespace magspec

namespace magspec {

PatchRadius find_patch_radius(double B_j, CounterexampleKind kind, double threshold, double h, double r_start,
                              double r_step, double r_max) {
  if (!(B_j > 0.0) || !(h > 0.0) || !(r_start > 0.0) || !(r_step > 0.0))
    throw ParameterError("patch search needs positive B, spacing, start and step");
  const double Vc = kind == CounterexampleKind::IvriiTwoD ? -B_j : 0.0;
  const FieldSpec spec = constant_field_2d(B_j, Gauge2D::Symmetric, [Vc](const Point&) { return Vc; });
  PatchRadius out;
  for (double R = r_start; R <= r_max + 1e-12; R += r_step) {
    const Point lo{-R - h, -R - h, 0.0}, hi{R + h, R + h, 0.0};
    const Grid g = Grid::enclosing(2, lo, hi, h);
    const double lam = lambda_bottom(g, spec, BallRegion(Point{}, R), Boundary::Dirichlet);
    out.radius = R;
    out.lambda = lam;
    if (lam < threshold) {
      out.found = true;
      break;
    }
  }
  return out;
}

}  // namespace magspec
