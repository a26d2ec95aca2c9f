#include <algorithm>
#include <cmath>

#include "magspec/errors.hpp"
#include "magspec/sweep.hpp"

namespace magspec {

double quintic_smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

std::vector<double> PartitionOfUnity::dense(std::size_t k) const {
  std::vector<double> e(grid.node_count(), 0.0);
  for (std::size_t i = 0; i < support[k].size(); ++i) e[support[k][i]] = weights[k][i];
  return e;
}

std::vector<double> PartitionOfUnity::grad_sq(std::size_t k) const {
  const std::vector<double> e = dense(k);
  const double h2 = grid.spacing() * grid.spacing();
  std::vector<double> g(grid.node_count(), 0.0);
  for (std::size_t p = 0; p < e.size(); ++p)
    for (int ax = 0; ax < grid.dim(); ++ax) {
      const std::size_t q = grid.neighbor(p, ax, 1);
      if (q == Grid::npos) continue;
      const double d = e[q] - e[p];
      if (d == 0.0) continue;
      const double t = 0.5 * d * d / h2;
      g[p] += t;
      g[q] += t;
    }
  return g;
}

PartitionOfUnity build_partition(const Grid& grid, double r) { return build_partition(grid, cover_with_balls(grid, r)); }

PartitionOfUnity build_partition(const Grid& grid, std::vector<BallRegion> balls) {
  PartitionOfUnity pu{grid, std::move(balls), {}, {}, 0.0};
  const int dim = grid.dim();
  std::vector<double> sum_sq(grid.node_count(), 0.0);
  for (const auto& b : pu.balls) {
    const NodeSet nodes = nodes_in_ball_clipped(grid, b);
    std::vector<std::size_t> sup;
    std::vector<double> val;
    for (std::size_t p : nodes.members()) {
      const double v = quintic_smoothstep(1.0 - distance(grid.coordinate(p), b.center, dim) / b.radius);
      if (v <= 0.0) continue;
      sup.push_back(p);
      val.push_back(v);
      sum_sq[p] += v * v;
    }
    pu.support.push_back(std::move(sup));
    pu.weights.push_back(std::move(val));
  }
  for (std::size_t p = 0; p < sum_sq.size(); ++p)
    if (!(sum_sq[p] > 0.0)) {
      const Point x = grid.coordinate(p);
      throw GeometryError("partition of unity leaves node (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                          (dim == 3 ? ", " + std::to_string(x[2]) : std::string()) + ") uncovered");
    }
  for (std::size_t k = 0; k < pu.balls.size(); ++k)
    for (std::size_t i = 0; i < pu.support[k].size(); ++i) pu.weights[k][i] /= std::sqrt(sum_sq[pu.support[k][i]]);
  for (std::size_t k = 0; k < pu.balls.size(); ++k) {
    const auto g = pu.grad_sq(k);
    pu.gradient_bound = std::max(pu.gradient_bound, std::sqrt(*std::max_element(g.begin(), g.end())));
  }
  return pu;
}

ImsResult ims_check(const DiscreteOperator& op, const PartitionOfUnity& pu, const std::vector<CVector>& us) {
  if (!op.grid().same_lattice(pu.grid) || op.grid().node_count() != pu.grid.node_count())
    throw ParameterError("operator and partition live on different grids");
  const auto& mem = op.region().members();
  const std::size_t N = mem.size();
  const double hn = op.cell_volume();
  std::vector<std::vector<double>> e_loc, g_loc;
  for (std::size_t k = 0; k < pu.balls.size(); ++k) {
    const auto e = pu.dense(k);
    const auto g = pu.grad_sq(k);
    std::vector<double> el(N), gl(N);
    bool touches = false;
    for (std::size_t i = 0; i < N; ++i) {
      el[i] = e[mem[i]];
      gl[i] = g[mem[i]];
      touches = touches || el[i] != 0.0 || gl[i] != 0.0;
    }
    if (!touches) continue;
    e_loc.push_back(std::move(el));
    g_loc.push_back(std::move(gl));
  }
  ImsResult res;
  for (const CVector& u : us) {
    if (static_cast<std::size_t>(u.size()) != N) throw ParameterError("test vector size does not match the operator");
    const double lhs = matrix_form(op, u);
    double rhs = 0.0;
    for (std::size_t k = 0; k < e_loc.size(); ++k) {
      CVector v(u.size());
      double loc = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        v[static_cast<Eigen::Index>(i)] = e_loc[k][i] * u[static_cast<Eigen::Index>(i)];
        loc += g_loc[k][i] * std::norm(u[static_cast<Eigen::Index>(i)]);
      }
      rhs += matrix_form(op, v) - hn * loc;
    }
    const double err = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    res.errors.push_back(err);
    res.worst_relative_error = std::max(res.worst_relative_error, err);
  }
  return res;
}

double Minorant::operator()(const Point& x) const {
  MultiIndex idx{0, 0, 0};
  for (int i = 0; i < grid.dim(); ++i) {
    const int m = static_cast<int>(std::lround((x[i] - grid.origin()[i]) / grid.spacing()));
    idx[i] = std::clamp(m, 0, grid.shape()[i] - 1);
  }
  return values[grid.ravel(idx)];
}

Minorant minorant_from_sweep(const std::vector<double>& ball_lambda, const PartitionOfUnity& pu) {
  if (ball_lambda.size() != pu.balls.size()) throw ParameterError("one bottom per covering ball is required");
  Minorant m{pu.grid, std::vector<double>(pu.grid.node_count(), 0.0)};
  for (std::size_t k = 0; k < pu.balls.size(); ++k) {
    for (std::size_t i = 0; i < pu.support[k].size(); ++i) {
      const double e = pu.weights[k][i];
      m.values[pu.support[k][i]] += ball_lambda[k] * e * e;
    }
    const auto g = pu.grad_sq(k);
    for (std::size_t p = 0; p < g.size(); ++p) m.values[p] -= g[p];
  }
  return m;
}

std::vector<double> covering_lambdas(const Grid& grid, const FieldSpec& spec, const PartitionOfUnity& pu,
                                     const SolverOptions& solver) {
  std::vector<double> out;
  SolverOptions o = solver;
  o.k = 1;
  for (const auto& b : pu.balls) {
    const NodeSet nodes = nodes_in_ball_clipped(grid, b);
    if (nodes.size() < 2) {
      out.push_back(nodes.empty() ? 0.0 : assemble(grid, spec, nodes, Boundary::Dirichlet).matrix().coeff(0, 0).real());
      continue;
    }
    out.push_back(smallest_eigs(assemble(grid, spec, nodes, Boundary::Dirichlet), o).eigenvalues.front());
  }
  return out;
}

}  // namespace magspec
