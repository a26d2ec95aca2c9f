#include "magspec/effective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "magspec/errors.hpp"
#include "magspec/operator.hpp"

namespace magspec {

namespace {

double chi(double r) {
  if (r <= 0.5) return 0.0;
  if (r >= 1.0) return 1.0;
  return 2.0 * r - 1.0;
}

double form_norm(const Form2& A, int dim) { return abs_B(A, dim); }

// Extremum over ball samples, doubling the density until stable.
template <class F>
SampledExtremum refine_extremum(const Point& c, double r, int dim, const SampleOptions& o, bool take_max, F f) {
  SampledExtremum out;
  double prev = std::numeric_limits<double>::quiet_NaN();
  double density = o.density;
  for (int level = 0; level <= o.max_doublings; ++level) {
    const auto pts = ball_samples(c, r, dim, density);
    if (level > 0 && pts.size() > o.max_samples) break;
    double v = take_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (const Point& y : pts) {
      const double fy = f(y);
      v = take_max ? std::max(v, fy) : std::min(v, fy);
    }
    out.value = v;
    out.density = density;
    out.samples = pts.size();
    if (level > 0 && std::abs(v - prev) <= o.rel_tol * std::max(std::abs(v), 1e-300)) {
      out.stable = true;
      break;
    }
    if (level > 0 && v == prev) {
      out.stable = true;
      break;
    }
    prev = v;
    density *= 2.0;
  }
  return out;
}

void require_delta_01(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    std::ostringstream os;
    os << "delta must lie in [0, 1), got " << delta;
    throw ParameterError(os.str());
  }
}

}  // namespace

const char* to_string(MajorantMode mode) {
  switch (mode) {
    case MajorantMode::Direct: return "direct";
    case MajorantMode::MB: return "mb";
    case MajorantMode::Combined: return "combined";
  }
  return "?";
}

MajorantMode majorant_mode_from_string(const std::string& s) {
  if (s == "direct") return MajorantMode::Direct;
  if (s == "mb" || s == "M_B") return MajorantMode::MB;
  if (s == "combined") return MajorantMode::Combined;
  throw ConfigError("unknown majorant mode '" + s + "' (direct, mb, combined)");
}

std::vector<Point> ball_samples(const Point& center, double r, int dim, double density) {
  const double step = 1.0 / density;
  const int m = static_cast<int>(std::floor(r / step));
  std::vector<Point> pts;
  const int mz = dim == 3 ? m : 0;
  for (int i = -m; i <= m; ++i)
    for (int j = -m; j <= m; ++j)
      for (int l = -mz; l <= mz; ++l) {
        const double d2 = (double(i) * i + double(j) * j + double(l) * l) * step * step;
        if (d2 > r * r) continue;
        Point y = center;
        y[0] += i * step;
        y[1] += j * step;
        if (dim == 3) y[2] += l * step;
        pts.push_back(y);
      }
  return pts;
}

double veff_2d(const FieldSpec& spec, double delta, const Point& x) {
  if (spec.dim != 2) throw ParameterError("veff_2d requires a 2D field");
  if (!(delta >= -1.0 && delta <= 1.0)) {
    std::ostringstream os;
    os << "delta must lie in [-1, 1] for the 2D effective potential (sharp: larger |delta| fails for "
          "patch fields where V = -B), got "
       << delta;
    throw ParameterError(os.str());
  }
  const FieldSample s = eval_field(spec, x);
  return s.V + delta * s.B[0][1];
}

Form2 smoothed_direction(const Form2& B, int dim) {
  Form2 A{};
  const double nb = abs_B(B, dim);
  const double c = chi(nb);
  if (c == 0.0) return A;
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) A[j][k] = c * B[j][k] / nb;
  return A;
}

Form2 smoothed_direction(const FieldSpec& spec, const Point& x) { return smoothed_direction(eval_B(spec, x), spec.dim); }

double majorant_X(const FieldSpec& spec, const Point& x, MajorantMode mode) {
  const int n = spec.dim;
  switch (mode) {
    case MajorantMode::Direct: {
      const double step = spec.h_fd * (1.0 + norm(x, n));
      std::array<Form2, kMaxDim> dA{};  // dA[k] = d A / dx^k
      for (int k = 0; k < n; ++k) {
        Point xp = x, xm = x;
        xp[k] += step;
        xm[k] -= step;
        const Form2 Ap = smoothed_direction(spec, xp);
        const Form2 Am = smoothed_direction(spec, xm);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) dA[k][i][j] = (Ap[i][j] - Am[i][j]) / (2.0 * step);
      }
      double best = 0.0;
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += std::abs(dA[k][k][j]);
        best = std::max(best, s);
      }
      return best;
    }
    case MajorantMode::MB: {
      const Form2 B = eval_B(spec, x);
      const double nb = abs_B(B, n);
      const BGradient g = grad_B(spec, x);
      double MB;
      if (nb >= 1.0) {
        // grad beta_jk = grad B_jk / |B| - B_jk grad|B| / |B|^2
        Point grad_abs{};
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) s += B[j][k] * g.components.d[l][j][k];
          grad_abs[l] = s / nb;
        }
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
          for (int k = j + 1; k < n; ++k)
            for (int l = 0; l < n; ++l) {
              const double d = g.components.d[l][j][k] / nb - B[j][k] * grad_abs[l] / (nb * nb);
              sum += d * d;
            }
        MB = std::sqrt(sum);
      } else {
        MB = 6.0 * g.norm;
      }
      return std::sqrt(double(n - 1)) * MB;
    }
    case MajorantMode::Combined: {
      const FieldNorms fn = field_norms(spec, x);
      return 12.0 * std::sqrt(double(n - 1)) * fn.gradB / (1.0 + fn.absB);
    }
  }
  return 0.0;
}

double veff_dufresnoy(const FieldSpec& spec, double delta, double eps, MajorantMode mode, const Point& x) {
  require_delta_01(delta);
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  const int n = spec.dim;
  const FieldSample s = eval_field(spec, x);
  if (delta == 0.0) return s.V;
  const double nb = abs_B(s.B, n);
  const double X = majorant_X(spec, x, mode);
  const double d = n - 1 + eps;
  return s.V + delta * nb / d - n * delta * X * X / (4.0 * eps * d);
}

SampledExtremum iwatsuka_eps(const FieldSpec& spec, const Point& x, double r, const SampleOptions& opts) {
  if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
  return refine_extremum(x, r, spec.dim, opts, true, [&](const Point& y) {
    const FieldNorms fn = field_norms(spec, y);
    return (1.0 + fn.gradB) / (fn.angB * fn.angB);
  });
}

double veff_iwatsuka_from_eps(double V, double delta, int dim, double eps_x) {
  return V + delta / (dim - 1) * (1.0 - eps_x) / std::sqrt(eps_x);
}

double veff_iwatsuka(const FieldSpec& spec, double delta, double r, const Point& x, const SampleOptions& opts) {
  require_delta_01(delta);
  const double e = iwatsuka_eps(spec, x, r, opts).value;
  return veff_iwatsuka_from_eps(eval_field(spec, x).V, delta, spec.dim, e);
}

Form2 auto_dual(const FieldSpec& spec, const Point& gamma) {
  const Form2 B = eval_B(spec, gamma);
  const double nb = abs_B(B, spec.dim);
  Form2 A{};
  if (nb > 0.0) {
    for (int j = 0; j < spec.dim; ++j)
      for (int k = 0; k < spec.dim; ++k) A[j][k] = B[j][k] / nb;
  } else {
    A[0][1] = 1.0;
    A[1][0] = -1.0;
  }
  return A;
}

SampledExtremum ahs_rgamma(const FieldSpec& spec, const Point& gamma, double r, const Form2& dual,
                           const SampleOptions& opts) {
  if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
  if (std::abs(form_norm(dual, spec.dim) - 1.0) > 1e-12) throw ParameterError("dual field must have unit norm");
  const int n = spec.dim;
  return refine_extremum(gamma, r, n, opts, false, [&](const Point& y) {
    const Form2 B = eval_B(spec, y);
    double s = 0.0;
    for (int k = 0; k < n; ++k)
      for (int j = k + 1; j < n; ++j) s += dual[k][j] * B[k][j];
    return s;
  });
}

AhsEvaluator::AhsEvaluator(const FieldSpec& spec, double r, std::vector<BallRegion> covering,
                           std::vector<Form2> duals, const SampleOptions& opts)
    : spec_(&spec), r_(r), covering_(std::move(covering)) {
  if (!(r > 0.0)) throw ParameterError("ball radius must be positive");
  if (!duals.empty() && duals.size() != covering_.size())
    throw ParameterError("one dual field per covering ball is required");
  r_gamma_.reserve(covering_.size());
  for (std::size_t i = 0; i < covering_.size(); ++i) {
    const Point& g = covering_[i].center;
    const Form2 A = duals.empty() ? auto_dual(spec, g) : duals[i];
    r_gamma_.push_back(ahs_rgamma(spec, g, r_, A, opts).value);
  }
}

double AhsEvaluator::r_of(const Point& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < covering_.size(); ++i)
    if (distance(x, covering_[i].center, spec_->dim) <= r_) best = std::min(best, r_gamma_[i]);
  if (!std::isfinite(best)) throw GeometryError("point not covered by any AHS ball");
  return best;
}

double AhsEvaluator::veff(double delta, const Point& x) const {
  require_delta_01(delta);
  return eval_field(*spec_, x).V + delta / (spec_->dim - 1) * r_of(x);
}

double veff_ahs(const FieldSpec& spec, double delta, double r, const std::vector<BallRegion>& covering,
                const Point& x, const SampleOptions& opts) {
  require_delta_01(delta);
  std::vector<BallRegion> near;
  for (const auto& b : covering)
    if (distance(x, b.center, spec.dim) <= r) near.push_back(b);
  if (near.empty()) throw GeometryError("point not covered by any AHS ball");
  AhsEvaluator ev(spec, r, std::move(near), {}, opts);
  return ev.veff(delta, x);
}

const char* to_string(EffectiveVariant v) {
  switch (v) {
    case EffectiveVariant::TwoD: return "twod";
    case EffectiveVariant::Dufresnoy: return "dufresnoy";
    case EffectiveVariant::Iwatsuka: return "iwatsuka";
    case EffectiveVariant::AHS: return "ahs";
  }
  return "?";
}

EffectiveVariant effective_variant_from_string(const std::string& s) {
  if (s == "twod" || s == "2d") return EffectiveVariant::TwoD;
  if (s == "dufresnoy") return EffectiveVariant::Dufresnoy;
  if (s == "iwatsuka") return EffectiveVariant::Iwatsuka;
  if (s == "ahs") return EffectiveVariant::AHS;
  throw ConfigError("unknown effective-potential variant '" + s + "' (twod, dufresnoy, iwatsuka, ahs)");
}

void EffectivePotentialSpec::validate() const {
  if (variant == EffectiveVariant::TwoD) {
    if (probe) return;
    if (!(delta >= -1.0 && delta <= 1.0)) throw ParameterError("twod: delta must lie in [-1, 1]");
    return;
  }
  require_delta_01(delta);
  if (variant == EffectiveVariant::Dufresnoy && !(eps > 0.0)) throw ParameterError("dufresnoy: eps must be positive");
  if ((variant == EffectiveVariant::Iwatsuka || variant == EffectiveVariant::AHS) && !(r > 0.0))
    throw ParameterError("radius must be positive");
}

std::string EffectivePotentialSpec::params_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "delta=" << delta;
  switch (variant) {
    case EffectiveVariant::TwoD: break;
    case EffectiveVariant::Dufresnoy: os << ";eps=" << eps << ";mode=" << to_string(mode); break;
    case EffectiveVariant::Iwatsuka:
    case EffectiveVariant::AHS: os << ";r=" << r; break;
  }
  return os.str();
}

EffectivePotential::EffectivePotential(const FieldSpec& field, EffectivePotentialSpec spec,
                                       const std::optional<Grid>& grid, std::vector<BallRegion> covering)
    : field_(&field), spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.variant == EffectiveVariant::TwoD && field.dim != 2) throw ParameterError("twod variant requires dim 2");
  if (spec_.variant == EffectiveVariant::AHS) {
    if (covering.empty()) {
      if (!grid) throw ParameterError("ahs variant needs a grid or an explicit covering");
      covering = cover_with_balls(*grid, spec_.r);
    }
    ahs_ = std::make_shared<AhsEvaluator>(field, spec_.r, std::move(covering), spec_.duals, spec_.sampling);
  }
}

double EffectivePotential::operator()(const Point& x) const {
  switch (spec_.variant) {
    case EffectiveVariant::TwoD:
      if (spec_.probe) {
        const FieldSample s = eval_field(*field_, x);
        return s.V + spec_.delta * s.B[0][1];
      }
      return veff_2d(*field_, spec_.delta, x);
    case EffectiveVariant::Dufresnoy: return veff_dufresnoy(*field_, spec_.delta, spec_.eps, spec_.mode, x);
    case EffectiveVariant::Iwatsuka: return veff_iwatsuka(*field_, spec_.delta, spec_.r, x, spec_.sampling);
    case EffectiveVariant::AHS: return ahs_->veff(spec_.delta, x);
  }
  return 0.0;
}

LowerBoundCertificate certify_lower_bound(const Grid& grid, const FieldSpec& spec, const ScalarFn& Lambda,
                                          const std::vector<BallRegion>& balls, double tol,
                                          const SolverOptions& solver) {
  LowerBoundCertificate cert;
  cert.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& ball : balls) {
    const NodeSet nodes = nodes_in_ball_clipped(grid, ball);
    if (nodes.size() < 2) continue;
    double inf_L = std::numeric_limits<double>::infinity();
    for (std::size_t p : nodes.members()) inf_L = std::min(inf_L, Lambda(grid.coordinate(p)));
    const DiscreteOperator op = assemble(grid, spec, nodes, Boundary::Dirichlet);
    SolverOptions o = solver;
    o.k = 1;
    const double lam = smallest_eigs(op, o).eigenvalues.front();
    cert.balls.push_back(ball);
    cert.lambda.push_back(lam);
    cert.inf_Lambda.push_back(inf_L);
    const double margin = lam - inf_L;
    cert.worst_margin = std::min(cert.worst_margin, margin);
    if (margin < -tol) cert.holds_on_sample = false;
  }
  if (cert.balls.empty()) cert.worst_margin = 0.0;
  return cert;
}

LowerBoundCertificate certify_lower_bound(const Grid& grid, const FieldSpec& spec, const ScalarFn& Lambda, double r,
                                          double tol, const SolverOptions& solver) {
  return certify_lower_bound(grid, spec, Lambda, cover_with_balls(grid, r), tol, solver);
}

}  // namespace magspec
