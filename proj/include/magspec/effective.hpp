#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "magspec/eigensolve.hpp"
#include "magspec/fields.hpp"
#include "magspec/grid.hpp"

namespace magspec {

enum class MajorantMode { Direct, MB, Combined };

const char* to_string(MajorantMode mode);
MajorantMode majorant_mode_from_string(const std::string& s);

/// Dense lattice sampling of a ball: `density` points per unit length per
/// axis, doubled until two successive levels agree to `rel_tol`.
struct SampleOptions {
  double density = 8.0;
  double rel_tol = 0.01;
  int max_doublings = 3;
  std::size_t max_samples = 400000;
};

struct SampledExtremum {
  double value = 0.0;
  double density = 0.0;     // density of the last level evaluated
  std::size_t samples = 0;  // points in the last level
  bool stable = false;      // last two levels agreed within rel_tol
};

/// Lattice points of spacing 1/density inside the closed ball, center included.
std::vector<Point> ball_samples(const Point& center, double r, int dim, double density);

/// V(x) + delta B_12(x); 2D only, delta in [-1, 1].
double veff_2d(const FieldSpec& spec, double delta, const Point& x);

/// chi(|B|) B / |B| with chi = 0 on [0, 1/2], 2r - 1 on [1/2, 1], 1 beyond.
Form2 smoothed_direction(const Form2& B, int dim);
Form2 smoothed_direction(const FieldSpec& spec, const Point& x);

/// Direct: max_j sum_k |d A_kj / dx^k| by central differences of the smoothed direction.
/// MB: sqrt(n-1) M_B with M_B = |grad beta| on |B| >= 1 and 6 |grad B| below.
/// Combined: 12 sqrt(n-1) |grad B| / (1 + |B|).
double majorant_X(const FieldSpec& spec, const Point& x, MajorantMode mode);

/// V + delta |B| / (n-1+eps) - n delta X^2 / (4 eps (n-1+eps)); delta in [0,1), eps > 0.
double veff_dufresnoy(const FieldSpec& spec, double delta, double eps, MajorantMode mode, const Point& x);

/// sup over B(x, r) of (1 + |grad B|) / <B>^2 by refined sampling (an under-approximation).
SampledExtremum iwatsuka_eps(const FieldSpec& spec, const Point& x, double r, const SampleOptions& opts = {});

/// V + delta / (n-1) eps_x^{-1/2} (1 - eps_x).
double veff_iwatsuka_from_eps(double V, double delta, int dim, double eps_x);
double veff_iwatsuka(const FieldSpec& spec, double delta, double r, const Point& x, const SampleOptions& opts = {});

/// B(gamma)/|B(gamma)|, or the unit form in the (1,2) plane when B(gamma) = 0.
Form2 auto_dual(const FieldSpec& spec, const Point& gamma);

/// inf over B(gamma, r) of sum_{k<j} A_kj B_kj(y). Requires |dual| = 1 within 1e-12.
SampledExtremum ahs_rgamma(const FieldSpec& spec, const Point& gamma, double r, const Form2& dual,
                           const SampleOptions& opts = {});

/// Per-ball r_gamma on a fixed covering (auto duals unless given), and
/// r(x) = min{ r_gamma : |x - gamma| <= r }.
class AhsEvaluator {
 public:
  AhsEvaluator(const FieldSpec& spec, double r, std::vector<BallRegion> covering,
               std::vector<Form2> duals = {}, const SampleOptions& opts = {});

  double r_of(const Point& x) const;
  double veff(double delta, const Point& x) const;
  const std::vector<double>& r_gamma() const noexcept { return r_gamma_; }
  const std::vector<BallRegion>& covering() const noexcept { return covering_; }

 private:
  const FieldSpec* spec_;
  double r_;
  std::vector<BallRegion> covering_;
  std::vector<double> r_gamma_;
};

/// V(x) + delta / (n-1) r(x); GeometryError when no covering ball reaches x.
double veff_ahs(const FieldSpec& spec, double delta, double r, const std::vector<BallRegion>& covering,
                const Point& x, const SampleOptions& opts = {});

enum class EffectiveVariant { TwoD, Dufresnoy, Iwatsuka, AHS };

const char* to_string(EffectiveVariant v);
EffectiveVariant effective_variant_from_string(const std::string& s);

struct EffectivePotentialSpec {
  EffectiveVariant variant = EffectiveVariant::TwoD;
  double delta = 1.0;
  double eps = 1.0;                      // Dufresnoy
  MajorantMode mode = MajorantMode::Combined;  // Dufresnoy
  double r = 1.0;                        // Iwatsuka, AHS
  std::vector<Form2> duals;              // AHS, one per covering ball; empty = auto
  SampleOptions sampling;
  /// TwoD only: evaluate V + delta B_12 for any delta (no lower-bound meaning
  /// outside [-1, 1]; used to exhibit the sharpness of the range).
  bool probe = false;

  /// Throws ParameterError on out-of-range parameters.
  void validate() const;
  /// "delta=...;eps=...;mode=..." style parameter summary.
  std::string params_string() const;
};

/// A ready-to-evaluate V_eff. Keeps a reference to `field`. The AHS variant needs a covering, derived from
/// `grid` (cover_with_balls at radius r) unless supplied.
class EffectivePotential {
 public:
  EffectivePotential(const FieldSpec& field, EffectivePotentialSpec spec,
                     const std::optional<Grid>& grid = std::nullopt,
                     std::vector<BallRegion> covering = {});

  double operator()(const Point& x) const;
  const EffectivePotentialSpec& spec() const noexcept { return spec_; }

 private:
  const FieldSpec* field_;
  EffectivePotentialSpec spec_;
  std::shared_ptr<AhsEvaluator> ahs_;
};

struct LowerBoundCertificate {
  bool holds_on_sample = true;
  double worst_margin = 0.0;
  std::vector<BallRegion> balls;
  std::vector<double> lambda;    // Dirichlet bottom per ball
  std::vector<double> inf_Lambda;
};

/// Falsification harness for H >= Lambda: for every ball checks
/// lambda_bottom(ball) >= inf_ball Lambda - tol. Balls are clipped to the grid box.
LowerBoundCertificate certify_lower_bound(const Grid& grid, const FieldSpec& spec, const ScalarFn& Lambda,
                                          const std::vector<BallRegion>& balls, double tol,
                                          const SolverOptions& solver = {});
/// Same over cover_with_balls(grid, r).
LowerBoundCertificate certify_lower_bound(const Grid& grid, const FieldSpec& spec, const ScalarFn& Lambda,
                                          double r, double tol, const SolverOptions& solver = {});

}  // namespace magspec
