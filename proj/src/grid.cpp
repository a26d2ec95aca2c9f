#include "magspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "magspec/errors.hpp"

namespace magspec {

double dot(const Point& x, const Point& y, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += x[i] * y[i];
  return s;
}

double norm(const Point& x, int dim) { return std::sqrt(dot(x, x, dim)); }

double distance(const Point& x, const Point& y, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

Grid::Grid(int dim, const Point& origin, double spacing, const MultiIndex& shape)
    : dim_(dim), origin_(origin), spacing_(spacing), shape_(shape) {
  if (dim != 2 && dim != 3) throw ParameterError("grid dimension must be 2 or 3");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ParameterError("grid spacing must be positive");
  count_ = 1;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i < dim) {
      if (shape_[i] < 3) throw ParameterError("every grid shape entry must be >= 3");
    } else {
      shape_[i] = 1;
      origin_[i] = 0.0;
    }
  }
  stride_[0] = 1;
  for (int i = 1; i < kMaxDim; ++i) stride_[i] = stride_[i - 1] * static_cast<std::size_t>(shape_[i - 1]);
  for (int i = 0; i < dim; ++i) count_ *= static_cast<std::size_t>(shape_[i]);
}

Grid Grid::enclosing(int dim, const Point& lo, const Point& hi, double spacing) {
  Point origin{};
  MultiIndex shape{1, 1, 1};
  for (int i = 0; i < dim; ++i) {
    const double a = std::floor(lo[i] / spacing - 1e-9);
    const double b = std::ceil(hi[i] / spacing + 1e-9);
    origin[i] = a * spacing;
    shape[i] = std::max(3, static_cast<int>(b - a) + 1);
  }
  return Grid(dim, origin, spacing, shape);
}

double Grid::cell_volume() const noexcept { return std::pow(spacing_, dim_); }

Point Grid::box_max() const noexcept {
  Point p = origin_;
  for (int i = 0; i < dim_; ++i) p[i] += spacing_ * (shape_[i] - 1);
  return p;
}

double Grid::smallest_side() const noexcept {
  double s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim_; ++i) s = std::min(s, spacing_ * (shape_[i] - 1));
  return s;
}

Point Grid::coordinate(std::size_t index) const {
  if (index >= count_) {
    std::ostringstream os;
    os << "node index " << index << " out of range (grid has " << count_ << " nodes)";
    throw InvalidIndexError(os.str());
  }
  return coordinate(unravel(index));
}

Point Grid::coordinate(const MultiIndex& index) const {
  Point p{};
  for (int i = 0; i < dim_; ++i) p[i] = std::fma(spacing_, static_cast<double>(index[i]), origin_[i]);
  return p;
}

MultiIndex Grid::unravel(std::size_t index) const {
  MultiIndex m{0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    m[i] = static_cast<int>(index % static_cast<std::size_t>(shape_[i]));
    index /= static_cast<std::size_t>(shape_[i]);
  }
  return m;
}

std::size_t Grid::ravel(const MultiIndex& index) const {
  if (!in_range(index)) throw InvalidIndexError("multi-index out of range");
  std::size_t k = 0;
  for (int i = 0; i < dim_; ++i) k += stride_[i] * static_cast<std::size_t>(index[i]);
  return k;
}

bool Grid::in_range(const MultiIndex& index) const noexcept {
  for (int i = 0; i < dim_; ++i)
    if (index[i] < 0 || index[i] >= shape_[i]) return false;
  return true;
}

std::size_t Grid::neighbor(std::size_t index, int axis, int step) const noexcept {
  const auto len = static_cast<std::size_t>(shape_[axis]);
  const std::size_t coord = (index / stride_[axis]) % len;
  if (step > 0) return coord + 1 < len ? index + stride_[axis] : npos;
  return coord > 0 ? index - stride_[axis] : npos;
}

std::size_t Grid::locate(const Point& x) const noexcept {
  MultiIndex m{0, 0, 0};
  for (int i = 0; i < dim_; ++i) {
    const double t = (x[i] - origin_[i]) / spacing_;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-6) return npos;
    m[i] = static_cast<int>(r);
  }
  if (!in_range(m)) return npos;
  std::size_t k = 0;
  for (int i = 0; i < dim_; ++i) k += stride_[i] * static_cast<std::size_t>(m[i]);
  return k;
}

Grid Grid::aligned_box(const Point& lo, const Point& hi) const {
  Point origin{};
  MultiIndex shape{1, 1, 1};
  for (int i = 0; i < dim_; ++i) {
    const double a = std::floor((lo[i] - origin_[i]) / spacing_ - 1e-9);
    const double b = std::ceil((hi[i] - origin_[i]) / spacing_ + 1e-9);
    origin[i] = origin_[i] + a * spacing_;
    shape[i] = std::max(3, static_cast<int>(b - a) + 1);
  }
  return Grid(dim_, origin, spacing_, shape);
}

bool Grid::same_lattice(const Grid& other) const noexcept {
  if (dim_ != other.dim_ || std::abs(spacing_ - other.spacing_) > 1e-12 * spacing_) return false;
  for (int i = 0; i < dim_; ++i) {
    const double t = (other.origin_[i] - origin_[i]) / spacing_;
    if (std::abs(t - std::round(t)) > 1e-6) return false;
  }
  return true;
}

BallRegion::BallRegion(const Point& c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError("ball radius must be positive");
}

NodeSet::NodeSet(const Grid& grid) : grid_(grid), mask_(grid.node_count(), false) {}

NodeSet::NodeSet(const Grid& grid, std::vector<std::size_t> members)
    : grid_(grid), members_(std::move(members)), mask_(grid.node_count(), false) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  for (std::size_t m : members_) {
    if (m >= grid_.node_count()) throw InvalidIndexError("node set member outside grid");
    mask_[m] = true;
  }
}

std::ptrdiff_t NodeSet::local_index(std::size_t index) const noexcept {
  if (!contains(index)) return -1;
  auto it = std::lower_bound(members_.begin(), members_.end(), index);
  return it - members_.begin();
}

bool NodeSet::is_subset_of(const NodeSet& other) const noexcept {
  return std::all_of(members_.begin(), members_.end(), [&](std::size_t m) { return other.contains(m); });
}

NodeSet NodeSet::unite(const NodeSet& other) const {
  std::vector<std::size_t> all = members_;
  all.insert(all.end(), other.members_.begin(), other.members_.end());
  return NodeSet(grid_, std::move(all));
}

namespace {

// Squared lattice distances are integers when the center sits on a node and
// (r/h)^2 is an integer; compare exactly in that case.
struct BallTest {
  bool exact = false;
  long long r2_units = 0;
  MultiIndex center_units{0, 0, 0};
  double r2 = 0.0;
  Point center{};
  int dim = 2;

  BallTest(const Grid& grid, const BallRegion& ball) : r2(ball.radius * ball.radius), center(ball.center), dim(grid.dim()) {
    const double h = grid.spacing();
    bool commensurate = true;
    for (int i = 0; i < dim; ++i) {
      const double t = (ball.center[i] - grid.origin()[i]) / h;
      if (std::abs(t - std::round(t)) > 1e-9) commensurate = false;
      center_units[i] = static_cast<int>(std::round(t));
    }
    const double q = r2 / (h * h);
    if (commensurate && std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, q)) {
      exact = true;
      r2_units = std::llround(q);
    }
  }

  bool inside(const Grid& grid, const MultiIndex& m) const {
    if (exact) {
      long long d2 = 0;
      for (int i = 0; i < dim; ++i) {
        const long long d = m[i] - center_units[i];
        d2 += d * d;
      }
      return d2 < r2_units;
    }
    const Point p = grid.coordinate(m);
    double d2 = 0.0;
    for (int i = 0; i < dim; ++i) d2 += (p[i] - center[i]) * (p[i] - center[i]);
    return d2 < r2;
  }
};

NodeSet collect_ball(const Grid& grid, const BallRegion& ball) {
  const int dim = grid.dim();
  const double h = grid.spacing();
  MultiIndex lo{0, 0, 0}, hi{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    lo[i] = std::max(0, static_cast<int>(std::floor((ball.center[i] - ball.radius - grid.origin()[i]) / h)));
    hi[i] = std::min(grid.shape()[i] - 1,
                     static_cast<int>(std::ceil((ball.center[i] + ball.radius - grid.origin()[i]) / h)));
  }
  BallTest test(grid, ball);
  std::vector<std::size_t> members;
  MultiIndex m{0, 0, 0};
  const int z_hi = dim == 3 ? hi[2] : 0;
  const int z_lo = dim == 3 ? lo[2] : 0;
  for (m[2] = z_lo; m[2] <= z_hi; ++m[2])
    for (m[1] = lo[1]; m[1] <= hi[1]; ++m[1])
      for (m[0] = lo[0]; m[0] <= hi[0]; ++m[0])
        if (test.inside(grid, m)) members.push_back(grid.ravel(m));
  return NodeSet(grid, std::move(members));
}

}  // namespace

bool ball_contains(const BallRegion& ball, const Grid& grid, std::size_t index) {
  BallTest test(grid, ball);
  return test.inside(grid, grid.unravel(index));
}

NodeSet nodes_in_ball(const Grid& grid, const BallRegion& ball) {
  const Point lo = grid.box_min();
  const Point hi = grid.box_max();
  const double slack = 1e-12 * std::max(1.0, ball.radius);
  for (int i = 0; i < grid.dim(); ++i) {
    const double below = lo[i] - (ball.center[i] - ball.radius);
    const double above = (ball.center[i] + ball.radius) - hi[i];
    if (below > slack || above > slack) {
      std::ostringstream os;
      os << "ball (radius " << ball.radius << ") overhangs the grid box along axis " << i + 1 << " by "
         << std::max(below, above);
      throw GeometryError(os.str());
    }
  }
  return collect_ball(grid, ball);
}

NodeSet nodes_in_ball_clipped(const Grid& grid, const BallRegion& ball) { return collect_ball(grid, ball); }

NodeSet all_nodes(const Grid& grid) {
  std::vector<std::size_t> members(grid.node_count());
  for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
  return NodeSet(grid, std::move(members));
}

std::vector<BallRegion> cover_with_balls(const Grid& grid, double r) {
  if (!(r > 0.0)) throw GeometryError("covering radius must be positive");
  if (!(r < 0.5 * grid.smallest_side())) {
    std::ostringstream os;
    os << "covering radius " << r << " must be below half the smallest box side " << 0.5 * grid.smallest_side();
    throw GeometryError(os.str());
  }
  const int dim = grid.dim();
  const double pitch = r / std::sqrt(static_cast<double>(dim));
  const Point lo = grid.box_min();
  const Point hi = grid.box_max();
  std::array<int, kMaxDim> count{1, 1, 1};
  std::array<double, kMaxDim> step{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    const double side = hi[i] - lo[i];
    count[i] = static_cast<int>(std::ceil(side / pitch - 1e-12)) + 1;
    step[i] = side / (count[i] - 1);
  }
  std::vector<BallRegion> balls;
  balls.reserve(static_cast<std::size_t>(count[0]) * count[1] * count[2]);
  for (int k = 0; k < count[2]; ++k)
    for (int j = 0; j < count[1]; ++j)
      for (int i = 0; i < count[0]; ++i) {
        Point c{};
        const int idx[3] = {i, j, k};
        for (int a = 0; a < dim; ++a) c[a] = lo[a] + step[a] * idx[a];
        balls.emplace_back(c, r);
      }
  return balls;
}

std::size_t covering_multiplicity(const Grid& grid, const std::vector<BallRegion>& balls) {
  std::vector<std::size_t> hits(grid.node_count(), 0);
  for (const auto& b : balls) {
    const NodeSet inside = nodes_in_ball_clipped(grid, b);
    for (std::size_t m : inside.members()) ++hits[m];
  }
  return hits.empty() ? 0 : *std::max_element(hits.begin(), hits.end());
}

}  // namespace magspec
