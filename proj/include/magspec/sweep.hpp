#pragma once

#include <optional>
#include <string>
#include <vector>

#include "magspec/capacity.hpp"
#include "magspec/effective.hpp"
#include "magspec/eigensolve.hpp"
#include "magspec/fields.hpp"
#include "magspec/grid.hpp"
#include "magspec/operator.hpp"

namespace magspec {

// Partition of unity ----------------------------------------------------------

/// Quadratic partition e_k = b_k / sqrt(sum_j b_j^2) with quintic smoothstep
/// bumps b_k = S(1 - |x - x_k| / r) supported in the open balls.
struct PartitionOfUnity {
  Grid grid;
  std::vector<BallRegion> balls;
  std::vector<std::vector<std::size_t>> support;  // grid nodes with e_k > 0, sorted
  std::vector<std::vector<double>> weights;       // e_k on support
  double gradient_bound = 0.0;                    // max_k,p |grad e_k|(p)

  /// e_k as a dense vector over grid nodes.
  std::vector<double> dense(std::size_t k) const;
  /// Symmetrized |grad e_k|^2(p) = 1/2 sum_{q ~ p} ((e_k(q) - e_k(p)) / h)^2, over grid nodes.
  std::vector<double> grad_sq(std::size_t k) const;
};

double quintic_smoothstep(double t);

PartitionOfUnity build_partition(const Grid& grid, double r);
/// Partition from an explicit set of balls; GeometryError if a node is left uncovered.
PartitionOfUnity build_partition(const Grid& grid, std::vector<BallRegion> balls);

struct ImsResult {
  double worst_relative_error = 0.0;
  std::vector<double> errors;  // |h(u) - rhs| / |h(u)| per vector
};

/// Compares h(u) with sum_k h(e_k u) - sum_k <|grad e_k|^2 u, u> on each u
/// (vectors indexed by the operator region).
ImsResult ims_check(const DiscreteOperator& op, const PartitionOfUnity& pu, const std::vector<CVector>& us);

/// Lambda(p) = sum_k lambda_k e_k(p)^2 - sum_k |grad e_k|^2(p) on grid nodes.
struct Minorant {
  Grid grid;
  std::vector<double> values;
  /// Value at the nearest grid node.
  double operator()(const Point& x) const;
};

Minorant minorant_from_sweep(const std::vector<double>& ball_lambda, const PartitionOfUnity& pu);

/// Dirichlet bottoms on the covering balls clipped to the grid box.
std::vector<double> covering_lambdas(const Grid& grid, const FieldSpec& spec, const PartitionOfUnity& pu,
                                     const SolverOptions& solver = {});

// Sweeps ----------------------------------------------------------------------

enum class QuantityKind { Lambda, Mu, Veff, Molchanov, Sublevel };

struct Quantity {
  QuantityKind kind = QuantityKind::Lambda;
  EffectivePotentialSpec veff;  // Veff; Sublevel evaluates V_eff when use_veff
  double c = 0.0;               // Molchanov
  double A = 0.0;               // Sublevel
  bool use_veff = false;        // Sublevel of V_eff instead of V

  std::string name() const;
};

/// "lambda", "mu", "veff:twod:delta=1", "veff:dufresnoy:delta=0.5:eps=1:mode=combined",
/// "veff:iwatsuka:delta=0.5:r=1", "veff:ahs:delta=0.5:r=1", "molchanov:c=0.01",
/// "sublevel:A=2" (append ":veff=..." spec pieces to measure a V_eff sublevel set).
/// A trailing ":probe" on a twod V_eff lifts the delta range check.
Quantity parse_quantity(const std::string& text);

struct SweepPlan {
  Grid grid = Grid(2, Point{}, 1.0, MultiIndex{3, 3, 3});
  FieldSpec spec;
  double r = 1.0;
  std::vector<Point> centers;
  std::vector<Quantity> quantities;
  SolverOptions solver;
  MolchanovOptions molchanov;
  double growth_factor = 2.0;
  int jobs = 1;

  /// Sorts centers by distance from the origin and checks that balls fit the box.
  void validate_and_sort();
};

/// Rays from the origin (or the box center when the origin is outside) along
/// the axes and the diagonals, spacing `step` (default r/2), while the ball fits.
std::vector<Point> default_centers(const Grid& grid, double r, std::optional<double> step = std::nullopt);

struct SweepRow {
  Point center{};
  double distance = 0.0;
  std::vector<std::optional<double>> values;
  std::string error;
};

enum class Conclusion { SuggestsDiscrete, SuggestsNonDiscrete, Inconclusive };

const char* to_string(Conclusion c);

struct QuantityEvidence {
  std::string quantity;
  std::size_t inner_count = 0;
  std::size_t outer_count = 0;
  double inner_min = 0.0;
  double outer_min = 0.0;
  bool grows = false;
  bool has_data = false;
};

extern const char* const kFiniteDomainCaveat;

struct Verdict {
  Conclusion conclusion = Conclusion::Inconclusive;
  std::vector<QuantityEvidence> evidence;
  bool conflict = false;
  double growth_factor = 2.0;
  std::string caveat = kFiniteDomainCaveat;
};

struct SweepReport {
  std::vector<std::string> quantity_names;
  std::vector<SweepRow> rows;
  Verdict verdict;
  double r = 0.0;
  int dim = 2;
  std::size_t mu_lambda_violations = 0;
};

/// Inner shell |x| <= d_max/3, outer shell |x| >= 2 d_max/3 (by count thirds
/// when a shell is empty). A quantity grows when outer_min > g inner_min for
/// inner_min > 0, else when outer_min - inner_min > (g - 1) max(|inner_min|, 1).
Verdict make_verdict(const std::vector<std::string>& names, const std::vector<SweepRow>& rows, double growth_factor);

SweepReport run_sweep(SweepPlan plan);

}  // namespace magspec
