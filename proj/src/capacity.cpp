#include "magspec/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "magspec/errors.hpp"

namespace magspec {

namespace {

/// Graph Laplacian on the nodes of a lattice box strictly inside an outer ball.
class LocalProblem {
 public:
  LocalProblem(const Grid& grid, const BallRegion& outer)
      : grid_(grid.aligned_box(shifted(outer.center, -(outer.radius + grid.spacing()), grid.dim()),
                               shifted(outer.center, outer.radius + grid.spacing(), grid.dim()))),
        w_(std::pow(grid.spacing(), grid.dim() - 2)) {
    const std::size_t N = grid_.node_count();
    inside_.assign(N, false);
    for (std::size_t p = 0; p < N; ++p) inside_[p] = ball_contains(outer, grid_, p);
  }

  const Grid& grid() const noexcept { return grid_; }
  double weight() const noexcept { return w_; }
  bool inside(std::size_t p) const noexcept { return inside_[p]; }

  /// Maps nodes of `from` (same lattice) into this box; GeometryError if any is
  /// not interior to the outer ball or has a neighbour outside it.
  std::vector<std::size_t> map_interior(const Grid& from, const std::vector<std::size_t>& nodes) const {
    std::vector<std::size_t> out;
    out.reserve(nodes.size());
    for (std::size_t p : nodes) {
      const Point x = from.coordinate(p);
      const std::size_t q = grid_.locate(x);
      bool ok = q != Grid::npos && inside_[q];
      for (int ax = 0; ok && ax < grid_.dim(); ++ax)
        for (int s : {-1, 1}) {
          const std::size_t r = grid_.neighbor(q, ax, s);
          if (r == Grid::npos || !inside_[r]) ok = false;
        }
      if (!ok) {
        std::ostringstream os;
        os << "set touches the outer capacity boundary at node (";
        for (int i = 0; i < from.dim(); ++i) os << (i ? ", " : "") << x[i];
        os << ")";
        throw GeometryError(os.str());
      }
      out.push_back(q);
    }
    return out;
  }

  struct Solution {
    std::vector<double> u;
    double residual = 0.0;
    int iterations = 0;
  };

  /// Harmonic extension of the values prescribed on `fixed` (zero outside the ball).
  Solution solve(const std::vector<std::size_t>& fixed, const std::vector<double>& values,
                 const CapacityOptions& opts) const {
    const std::size_t N = grid_.node_count();
    const int n = grid_.dim();
    std::vector<char> is_fixed(N, 0);
    std::vector<double> u(N, 0.0);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      is_fixed[fixed[i]] = 1;
      u[fixed[i]] = values[i];
    }
    std::vector<long> compact(N, -1);
    std::vector<std::size_t> freev;
    for (std::size_t p = 0; p < N; ++p)
      if (inside_[p] && !is_fixed[p]) {
        compact[p] = static_cast<long>(freev.size());
        freev.push_back(p);
      }
    const std::size_t M = freev.size();
    const int deg = 2 * n;
    std::vector<long> nb(M * deg, -1);
    std::vector<double> b(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
      const std::size_t p = freev[i];
      int slot = 0;
      for (int ax = 0; ax < n; ++ax)
        for (int s : {-1, 1}) {
          const std::size_t q = grid_.neighbor(p, ax, s);
          if (q != Grid::npos) {
            if (compact[q] >= 0) nb[i * deg + slot] = compact[q];
            else if (is_fixed[q]) b[i] += w_ * u[q];
          }
          ++slot;
        }
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      for (std::size_t i = 0; i < M; ++i) {
        double s = deg * x[i];
        for (int j = 0; j < deg; ++j) {
          const long q = nb[i * deg + j];
          if (q >= 0) s -= x[static_cast<std::size_t>(q)];
        }
        y[i] = w_ * s;
      }
    };
    Solution sol;
    std::vector<double> x(M, 0.0), r = b, pv = b, Ap(M);
    const double bnorm = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
    double rr = bnorm * bnorm;
    if (bnorm > 0.0) {
      int it = 0;
      while (std::sqrt(rr) > opts.tol * bnorm) {
        if (++it > opts.max_iter) {
          std::ostringstream os;
          os << "capacity CG did not converge in " << opts.max_iter << " iterations (relative residual "
             << std::sqrt(rr) / bnorm << ")";
          throw NumericalError(os.str());
        }
        apply(pv, Ap);
        const double alpha = rr / std::inner_product(pv.begin(), pv.end(), Ap.begin(), 0.0);
        for (std::size_t i = 0; i < M; ++i) {
          x[i] += alpha * pv[i];
          r[i] -= alpha * Ap[i];
        }
        const double rr_new = std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < M; ++i) pv[i] = r[i] + beta * pv[i];
      }
      sol.iterations = it;
      // true residual
      apply(x, Ap);
      double t = 0.0;
      for (std::size_t i = 0; i < M; ++i) t += (b[i] - Ap[i]) * (b[i] - Ap[i]);
      sol.residual = std::sqrt(t) / bnorm;
    }
    for (std::size_t i = 0; i < M; ++i) u[freev[i]] = x[i];
    sol.u = std::move(u);
    return sol;
  }

  /// sum over lattice edges touching the ball of w (u_p - u_q)^2.
  double energy(const std::vector<double>& u) const {
    double e = 0.0;
    const std::size_t N = grid_.node_count();
    for (std::size_t p = 0; p < N; ++p)
      for (int ax = 0; ax < grid_.dim(); ++ax) {
        const std::size_t q = grid_.neighbor(p, ax, 1);
        if (q == Grid::npos || (!inside_[p] && !inside_[q])) continue;
        const double d = u[p] - u[q];
        e += w_ * d * d;
      }
    return e;
  }

  /// (L u)_p for an inside node p.
  double laplacian_at(const std::vector<double>& u, std::size_t p) const {
    double s = 2 * grid_.dim() * u[p];
    for (int ax = 0; ax < grid_.dim(); ++ax)
      for (int sg : {-1, 1}) {
        const std::size_t q = grid_.neighbor(p, ax, sg);
        if (q != Grid::npos) s -= u[q];
      }
    return w_ * s;
  }

 private:
  static Point shifted(const Point& c, double d, int dim) {
    Point p = c;
    for (int i = 0; i < dim; ++i) p[i] += d;
    return p;
  }

  Grid grid_;
  double w_;
  std::vector<bool> inside_;
};

struct Candidate {
  std::size_t node;  // grid index
  int pos;           // position in ball members
  double V;
};

}  // namespace

CapacityResult wiener_capacity(const Grid& grid, const NodeSet& F, const BallRegion& outer, const CapacityOptions& opts) {
  LocalProblem lp(grid, outer);
  CapacityResult res{0.0, lp.grid(), {}, 0.0, 0, outer.radius, 0.0};
  if (F.empty()) {
    res.potential.assign(lp.grid().node_count(), 0.0);
    return res;
  }
  const auto fixed = lp.map_interior(F.grid(), F.members());
  auto sol = lp.solve(fixed, std::vector<double>(fixed.size(), 1.0), opts);
  res.value = lp.energy(sol.u);
  std::vector<char> inF(lp.grid().node_count(), 0);
  for (std::size_t p : fixed) inF[p] = 1;
  for (std::size_t p : fixed)
    for (int ax = 0; ax < grid.dim(); ++ax)
      for (int s : {-1, 1}) {
        const std::size_t q = lp.grid().neighbor(p, ax, s);
        if (!inF[q]) res.flux += lp.weight() * (1.0 - sol.u[q]);
      }
  res.potential = std::move(sol.u);
  res.solver_residual = sol.residual;
  res.iterations = sol.iterations;
  return res;
}

double ball_capacity(const Grid& grid, const BallRegion& ball, double outer_factor) {
  const NodeSet F = nodes_in_ball_clipped(grid, ball);
  return wiener_capacity(grid, F, BallRegion(ball.center, outer_factor * ball.radius)).value;
}

CapacityEvaluator::CapacityEvaluator(const Grid& grid, const NodeSet& S, const BallRegion& outer,
                                     const CapacityOptions& opts) {
  LocalProblem lp(grid, outer);
  const auto fixed = lp.map_interior(S.grid(), S.members());
  const auto m = static_cast<Eigen::Index>(fixed.size());
  K_.resize(m, m);
  for (Eigen::Index s = 0; s < m; ++s) {
    std::vector<double> vals(fixed.size(), 0.0);
    vals[static_cast<std::size_t>(s)] = 1.0;
    const auto sol = lp.solve(fixed, vals, opts);
    for (Eigen::Index t = 0; t < m; ++t) K_(t, s) = lp.laplacian_at(sol.u, fixed[static_cast<std::size_t>(t)]);
  }
  K_ = 0.5 * (K_ + K_.transpose()).eval();
}

double CapacityEvaluator::capacity(const std::vector<int>& subset) const {
  if (subset.empty()) return 0.0;
  const auto m = K_.rows();
  std::vector<char> inF(static_cast<std::size_t>(m), 0);
  for (int i : subset) inF[static_cast<std::size_t>(i)] = 1;
  std::vector<Eigen::Index> Fi, Gi;
  for (Eigen::Index i = 0; i < m; ++i) (inF[static_cast<std::size_t>(i)] ? Fi : Gi).push_back(i);
  double cap = 0.0;
  for (auto i : Fi)
    for (auto j : Fi) cap += K_(i, j);
  if (Gi.empty()) return cap;
  const auto g = static_cast<Eigen::Index>(Gi.size());
  Eigen::MatrixXd KGG(g, g);
  Eigen::VectorXd KGF1 = Eigen::VectorXd::Zero(g);
  for (Eigen::Index a = 0; a < g; ++a) {
    for (Eigen::Index b = 0; b < g; ++b) KGG(a, b) = K_(Gi[a], Gi[b]);
    for (auto j : Fi) KGF1[a] += K_(Gi[a], j);
  }
  const Eigen::VectorXd y = KGG.ldlt().solve(KGF1);
  return cap - KGF1.dot(y);
}

double molchanov_reference_c(int dim) { return std::ldexp(1.0, -2 * dim - 6); }

const char* to_string(MolchanovStrategy s) {
  return s == MolchanovStrategy::LevelSet ? "levelset" : "exhaustive";
}

MolchanovStrategy molchanov_strategy_from_string(const std::string& s) {
  if (s == "levelset" || s == "sublevel") return MolchanovStrategy::LevelSet;
  if (s == "exhaustive") return MolchanovStrategy::Exhaustive;
  throw ConfigError("unknown Molchanov strategy '" + s + "' (levelset, exhaustive)");
}

MolchanovResult molchanov_functional(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double c,
                                     const MolchanovOptions& opts) {
  if (!(c > 0.0)) throw ParameterError("Molchanov constant c must be positive");
  const NodeSet S = nodes_in_ball(grid, ball);
  const double R = opts.outer_radius.value_or(4.0 * ball.radius);
  if (!(R > ball.radius)) throw ParameterError("outer capacity radius must exceed the ball radius");
  const BallRegion outer(ball.center, R);
  const double hn = grid.cell_volume();
  const auto& mem = S.members();

  MolchanovResult res(grid);
  res.strategy = opts.strategy;
  res.outer_radius = R;
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double v = V(grid.coordinate(mem[i]));
    res.full_integral += hn * v;
    if (v > 0.0) cand.push_back({mem[i], static_cast<int>(i), v});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.V > b.V; });

  const bool small = mem.size() <= opts.exhaustive_limit;
  if (opts.strategy == MolchanovStrategy::Exhaustive && !small) {
    std::ostringstream os;
    os << "exhaustive strategy limited to " << opts.exhaustive_limit << " ball nodes, ball has " << mem.size();
    throw ParameterError(os.str());
  }
  std::optional<CapacityEvaluator> ev;
  if (small && !mem.empty()) ev.emplace(grid, S, outer, opts.capacity);

  std::function<double(std::size_t)> prefix_cap;  // capacity of the first k candidates
  if (ev) {
    std::vector<int> all(mem.size());
    std::iota(all.begin(), all.end(), 0);
    res.ball_cap = ev->capacity(all);
    prefix_cap = [&](std::size_t k) {
      std::vector<int> sub;
      for (std::size_t i = 0; i < k; ++i) sub.push_back(cand[i].pos);
      return ev->capacity(sub);
    };
  } else {
    res.ball_cap = wiener_capacity(grid, S, outer, opts.capacity).value;
    prefix_cap = [&](std::size_t k) {
      std::vector<std::size_t> sub;
      for (std::size_t i = 0; i < k; ++i) sub.push_back(cand[i].node);
      std::sort(sub.begin(), sub.end());
      return wiener_capacity(grid, NodeSet(grid, sub), outer, opts.capacity).value;
    };
  }
  res.cap_budget = c * res.ball_cap;

  std::vector<std::size_t> removed;
  double removed_sum = 0.0;
  if (opts.strategy == MolchanovStrategy::LevelSet) {
    std::size_t lo = 0, hi = cand.size();
    double cap_lo = 0.0;
    if (hi > 0) {
      const double cap_hi = prefix_cap(hi);
      ++res.candidates;
      if (cap_hi <= res.cap_budget) {
        lo = hi;
        cap_lo = cap_hi;
      } else {
        while (hi - lo > 1) {  // invariant: prefix lo feasible, prefix hi not
          const std::size_t mid = lo + (hi - lo) / 2;
          const double cm = prefix_cap(mid);
          ++res.candidates;
          if (cm <= res.cap_budget) {
            lo = mid;
            cap_lo = cm;
          } else {
            hi = mid;
          }
        }
      }
    }
    for (std::size_t i = 0; i < lo; ++i) {
      removed.push_back(cand[i].node);
      removed_sum += cand[i].V;
    }
    res.cap_used = cap_lo;
  } else {
    // depth-first over subsets of the positive nodes; admissible sets are down-closed
    std::vector<double> tail(cand.size() + 1, 0.0);
    for (std::size_t i = cand.size(); i-- > 0;) tail[i] = tail[i + 1] + cand[i].V;
    std::vector<int> cur;
    std::vector<std::size_t> cur_idx, best_idx;
    double best = 0.0, best_cap = 0.0;
    std::function<void(std::size_t, double)> dfs = [&](std::size_t from, double sum) {
      for (std::size_t i = from; i < cand.size(); ++i) {
        if (sum + tail[i] <= best) return;
        cur.push_back(cand[i].pos);
        const double cp = ev->capacity(cur);
        ++res.candidates;
        if (cp <= res.cap_budget) {
          cur_idx.push_back(cand[i].node);
          const double s = sum + cand[i].V;
          if (s > best) {
            best = s;
            best_idx = cur_idx;
            best_cap = cp;
          }
          dfs(i + 1, s);
          cur_idx.pop_back();
        }
        cur.pop_back();
      }
    };
    dfs(0, 0.0);
    removed = best_idx;
    removed_sum = best;
    res.cap_used = best_cap;
  }
  std::sort(removed.begin(), removed.end());
  res.removed_set = NodeSet(grid, removed);
  res.value = res.full_integral - hn * removed_sum;
  return res;
}

MolchanovResult measure_variant(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double c, double N,
                                MeasureVariant variant) {
  if (!(c > 0.0)) throw ParameterError("measure constant c must be positive");
  if (variant == MeasureVariant::MTildeC) N = grid.dim();
  const NodeSet S = nodes_in_ball(grid, ball);
  const double hn = grid.cell_volume();
  MolchanovResult res(grid);
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < S.size(); ++i) {
    const double v = V(grid.coordinate(S.members()[i]));
    res.full_integral += hn * v;
    if (v > 0.0) cand.push_back({S.members()[i], static_cast<int>(i), v});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) { return a.V > b.V; });
  res.cap_budget = c * std::pow(ball.radius, N);
  const auto kmax = static_cast<std::size_t>(std::floor(res.cap_budget / hn * (1.0 + 1e-12)));
  const std::size_t k = std::min(kmax, cand.size());
  std::vector<std::size_t> removed;
  double removed_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    removed.push_back(cand[i].node);
    removed_sum += cand[i].V;
  }
  std::sort(removed.begin(), removed.end());
  res.removed_set = NodeSet(grid, removed);
  res.cap_used = hn * static_cast<double>(k);
  res.value = res.full_integral - hn * removed_sum;
  res.candidates = 1;
  return res;
}

double sublevel_measure(const Grid& grid, const ScalarFn& V, const BallRegion& ball, double A) {
  const NodeSet S = nodes_in_ball(grid, ball);
  std::size_t count = 0;
  for (std::size_t p : S.members())
    if (V(grid.coordinate(p)) <= A) ++count;
  return grid.cell_volume() * static_cast<double>(count);
}

}  // namespace magspec
