#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "magspec/fields.hpp"
#include "magspec/grid.hpp"

namespace magspec {

/// Discrete capacity of a node set relative to an outer ball: graph Laplacian
/// with edge weight h^{n-2}, potential 1 on F and 0 on nodes outside the open
/// outer ball. Solved by conjugate gradients on a lattice-aligned local box.
struct CapacityResult {
  double value = 0.0;
  Grid local_grid = Grid(2, Point{}, 1.0, MultiIndex{3, 3, 3});  // lattice box around the outer ball
  std::vector<double> potential;     // equilibrium potential on local_grid nodes
  double solver_residual = 0.0;      // ||r|| / ||b|| at exit
  int iterations = 0;
  double outer_radius = 0.0;
  double flux = 0.0;                 // sum over F-boundary edges of w (1 - u_q), equal to value at the solution
};

struct CapacityOptions {
  double tol = 1e-10;
  int max_iter = 20000;
};

/// F empty gives 0. F must stay away from the outer boundary: every lattice
/// neighbour of F lies inside the outer ball (else GeometryError).
CapacityResult wiener_capacity(const Grid& grid, const NodeSet& F, const BallRegion& outer,
                               const CapacityOptions& opts = {});

/// Capacity of the ball's own node set relative to a concentric ball of radius outer_factor * r.
double ball_capacity(const Grid& grid, const BallRegion& ball, double outer_factor = 4.0);

/// Exact capacities of subsets of a small node set S: precomputes the Schur
/// complement K of the Laplacian onto S, so cap(F) = min_{u=1 on F} u^T K u.
class CapacityEvaluator {
 public:
  CapacityEvaluator(const Grid& grid, const NodeSet& S, const BallRegion& outer, const CapacityOptions& opts = {});

  /// Capacity of the subset given by positions into S.members().
  double capacity(const std::vector<int>& subset) const;
  const Eigen::MatrixXd& schur() const noexcept { return K_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(K_.rows()); }

 private:
  Eigen::MatrixXd K_;
};

/// Reference smallness constant 2^{-2n-6}.
double molchanov_reference_c(int dim);

enum class MolchanovStrategy { LevelSet, Exhaustive };

const char* to_string(MolchanovStrategy s);
/// "levelset" (alias "sublevel") or "exhaustive".
MolchanovStrategy molchanov_strategy_from_string(const std::string& s);

struct MolchanovResult {
  double value = 0.0;       // h^n sum over ball \ F of V
  double full_integral = 0.0;
  NodeSet removed_set;
  double cap_budget = 0.0;
  double cap_used = 0.0;
  double ball_cap = 0.0;
  double outer_radius = 0.0;
  MolchanovStrategy strategy = MolchanovStrategy::LevelSet;
  std::size_t candidates = 0;  // capacity evaluations performed

  explicit MolchanovResult(const Grid& g) : removed_set(g) {}
};

struct MolchanovOptions {
  MolchanovStrategy strategy = MolchanovStrategy::LevelSet;
  std::optional<double> outer_radius;  // default 4 r
  CapacityOptions capacity;
  std::size_t exhaustive_limit = 20;
};

/// inf { h^n sum_{ball \ F} V : cap(F) <= c cap(ball) }. LevelSet removes the
/// nodes with the largest positive V first (nested candidates, binary search on
/// the budget): its value is an upper bound for the infimum. Exhaustive searches
/// all admissible subsets exactly (ball with at most 20 nodes).
MolchanovResult molchanov_functional(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double c,
                                     const MolchanovOptions& opts = {});

enum class MeasureVariant { MTildeCN, MTildeC };

/// Measure budget |F| h^n <= c r^N (N forced to dim for MTildeC). Removing the
/// largest positive values first is exact for a cardinality budget.
MolchanovResult measure_variant(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double c, double N,
                                MeasureVariant variant);

/// h^n #{ p in ball : V(p) <= A }.
double sublevel_measure(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double A);

}  // namespace magspec
