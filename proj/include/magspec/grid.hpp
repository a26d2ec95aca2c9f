#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

namespace magspec {

constexpr int kMaxDim = 3;

/// Position in R^n, n <= 3. Unused trailing components are zero.
using Point = std::array<double, kMaxDim>;
using MultiIndex = std::array<int, kMaxDim>;

double dot(const Point& x, const Point& y, int dim);
double norm(const Point& x, int dim);
double distance(const Point& x, const Point& y, int dim);

/// Uniform axis-aligned Cartesian lattice: node(i) = origin + spacing * i.
class Grid {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  Grid(int dim, const Point& origin, double spacing, const MultiIndex& shape);

  /// Smallest grid on the lattice {k * spacing} whose box contains [lo, hi].
  static Grid enclosing(int dim, const Point& lo, const Point& hi, double spacing);

  int dim() const noexcept { return dim_; }
  const Point& origin() const noexcept { return origin_; }
  double spacing() const noexcept { return spacing_; }
  const MultiIndex& shape() const noexcept { return shape_; }
  std::size_t node_count() const noexcept { return count_; }
  double cell_volume() const noexcept;

  Point box_min() const noexcept { return origin_; }
  Point box_max() const noexcept;
  double smallest_side() const noexcept;

  Point coordinate(std::size_t index) const;
  Point coordinate(const MultiIndex& index) const;
  MultiIndex unravel(std::size_t index) const;
  std::size_t ravel(const MultiIndex& index) const;
  bool in_range(const MultiIndex& index) const noexcept;

  /// Index of the node one step along `axis` (step = +1 or -1), or npos.
  std::size_t neighbor(std::size_t index, int axis, int step) const noexcept;

  /// Node whose coordinate equals x up to rounding, or npos if x is off-lattice or outside.
  std::size_t locate(const Point& x) const noexcept;

  /// Another grid on the same lattice covering [lo, hi].
  Grid aligned_box(const Point& lo, const Point& hi) const;

  bool same_lattice(const Grid& other) const noexcept;

 private:
  int dim_;
  Point origin_;
  double spacing_;
  MultiIndex shape_;
  std::array<std::size_t, kMaxDim> stride_{};
  std::size_t count_ = 0;
};

/// Open ball B(center, radius).
struct BallRegion {
  Point center{};
  double radius = 1.0;

  BallRegion() = default;
  BallRegion(const Point& c, double r);
};

/// Subset of the nodes of a grid. Sorted members, O(1) membership test.
class NodeSet {
 public:
  explicit NodeSet(const Grid& grid);
  NodeSet(const Grid& grid, std::vector<std::size_t> members);

  const Grid& grid() const noexcept { return grid_; }
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(std::size_t index) const noexcept {
    return index < mask_.size() && mask_[index];
  }
  /// Position of `index` inside members(), or -1.
  std::ptrdiff_t local_index(std::size_t index) const noexcept;

  bool is_subset_of(const NodeSet& other) const noexcept;
  NodeSet unite(const NodeSet& other) const;

 private:
  Grid grid_;
  std::vector<std::size_t> members_;
  std::vector<bool> mask_;
};

bool ball_contains(const BallRegion& ball, const Grid& grid, std::size_t index);

/// Nodes strictly inside the ball. Requires the closed ball inside the grid box.
NodeSet nodes_in_ball(const Grid& grid, const BallRegion& ball);

/// Nodes strictly inside the ball, intersected with the grid (no containment check).
NodeSet nodes_in_ball_clipped(const Grid& grid, const BallRegion& ball);

NodeSet all_nodes(const Grid& grid);

/// Balls of radius r on a sub-lattice of pitch <= r / sqrt(dim) covering the box.
std::vector<BallRegion> cover_with_balls(const Grid& grid, double r);

/// Maximum number of balls containing any single node.
std::size_t covering_multiplicity(const Grid& grid, const std::vector<BallRegion>& balls);

}  // namespace magspec
