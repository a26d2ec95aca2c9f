#pragma once

// Test-side reference computations. Written against plain loops and dense
// Eigen so that they do not share code paths with the library.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

/// Node list of a box lattice origin + h*i, i in [0, n)^dim, x fastest.
inline std::vector<Vec3> box_nodes(int dim, const Vec3& origin, double h, int n) {
  std::vector<Vec3> out;
  const int nz = dim == 3 ? n : 1;
  const int ny = dim >= 2 ? n : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < n; ++i) out.push_back({origin[0] + h * i, origin[1] + h * j, origin[2] + h * k});
  return out;
}

/// Dense magnetic Schrodinger matrix on every node of a box lattice, Dirichlet
/// (missing neighbours count as zero) or Neumann (only present neighbours).
inline Eigen::MatrixXcd dense_operator(int dim, const Vec3& origin, double h, int n,
                                       const std::function<Vec3(const Vec3&)>& a,
                                       const std::function<double(const Vec3&)>& V, bool dirichlet) {
  const auto nodes = box_nodes(dim, origin, h, n);
  const int N = static_cast<int>(nodes.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
  auto id = [&](int i, int j, int k) { return i + n * (j + n * k); };
  for (int p = 0; p < N; ++p) {
    const int i = p % n, j = (p / n) % n, k = dim == 3 ? p / (n * n) : 0;
    int present = 0;
    for (int ax = 0; ax < dim; ++ax) {
      int ii[3] = {i, j, k};
      for (int s : {-1, 1}) {
        ii[ax] += s;
        if (ii[ax] >= 0 && ii[ax] < n) {
          const int q = id(ii[0], ii[1], ii[2]);
          Vec3 mid;
          for (int c = 0; c < 3; ++c) mid[c] = 0.5 * (nodes[p][c] + nodes[q][c]);
          const double theta = s * h * a(mid)[ax];
          H(p, q) = -std::exp(cplx(0, theta)) / (h * h);
          ++present;
        }
        ii[ax] -= s;
      }
    }
    H(p, p) = (dirichlet ? 2.0 * dim : present) / (h * h) + V(nodes[p]);
  }
  return H;
}

inline Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  return es.eigenvalues();
}

/// Eigenvalues of the free Dirichlet lattice Laplacian on n^dim interior nodes
/// of spacing h: sum over axes of (4/h^2) sin^2(pi m_ax / (2 (n+1))).
inline std::vector<double> free_dirichlet_box(int dim, int n, double h) {
  std::vector<double> one;
  for (int m = 1; m <= n; ++m) {
    const double s = std::sin(std::numbers::pi * m / (2.0 * (n + 1)));
    one.push_back(4.0 * s * s / (h * h));
  }
  std::vector<double> all = {0.0};
  for (int ax = 0; ax < dim; ++ax) {
    std::vector<double> next;
    for (double x : all)
      for (double y : one) next.push_back(x + y);
    all = next;
  }
  std::sort(all.begin(), all.end());
  return all;
}

/// Discrete capacity by a dense linear solve over the lattice Z^dim h clipped
/// to the open ball |x - c| < R. F is given by integer offsets from c.
inline double dense_capacity(int dim, double h, double R, const std::vector<std::array<int, 3>>& F) {
  const int m = static_cast<int>(std::ceil(R / h)) + 1;
  std::vector<std::array<int, 3>> nodes;
  auto inside = [&](int i, int j, int k) { return h * h * (i * i + j * j + k * k) < R * R; };
  const int mz = dim == 3 ? m : 0;
  for (int k = -mz; k <= mz; ++k)
    for (int j = -m; j <= m; ++j)
      for (int i = -m; i <= m; ++i)
        if (inside(i, j, k)) nodes.push_back({i, j, k});
  auto find = [&](const std::array<int, 3>& x) -> int {
    for (std::size_t t = 0; t < nodes.size(); ++t)
      if (nodes[t] == x) return static_cast<int>(t);
    return -1;
  };
  std::vector<int> in_F(nodes.size(), 0);
  for (const auto& f : F) in_F[find(f)] = 1;
  std::vector<int> free_idx(nodes.size(), -1);
  int nf = 0;
  for (std::size_t t = 0; t < nodes.size(); ++t)
    if (!in_F[t]) free_idx[t] = nf++;
  const double w = std::pow(h, dim - 2);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf, nf);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(nf);
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    if (in_F[t]) continue;
    const int row = free_idx[t];
    for (int ax = 0; ax < dim; ++ax)
      for (int s : {-1, 1}) {
        auto y = nodes[t];
        y[ax] += s;
        A(row, row) += w;
        if (!inside(y[0], y[1], y[2])) continue;
        const int q = find(y);
        if (in_F[q]) b(row) += w;
        else A(row, free_idx[q]) -= w;
      }
  }
  Eigen::VectorXd u = nf ? Eigen::VectorXd(A.ldlt().solve(b)) : Eigen::VectorXd();
  double energy = 0.0;
  auto val = [&](const std::array<int, 3>& y) {
    if (!inside(y[0], y[1], y[2])) return 0.0;
    const int q = find(y);
    return in_F[q] ? 1.0 : u(free_idx[q]);
  };
  for (std::size_t t = 0; t < nodes.size(); ++t)
    for (int ax = 0; ax < dim; ++ax) {
      auto y = nodes[t];
      y[ax] += 1;
      const double d = val(nodes[t]) - val(y);
      energy += w * d * d;
      y[ax] -= 2;
      if (!inside(y[0], y[1], y[2])) energy += w * val(nodes[t]) * val(nodes[t]);
    }
  return energy;
}

/// Central-difference partial derivative.
inline double partial(const std::function<double(const Vec3&)>& f, Vec3 x, int axis, double step = 1e-5) {
  Vec3 y = x;
  x[axis] += step;
  y[axis] -= step;
  return (f(x) - f(y)) / (2 * step);
}

/// Relative capacity of concentric balls in the continuum.
inline double continuum_ball_capacity(int dim, double r, double R) {
  if (dim == 2) return 2 * std::numbers::pi / std::log(R / r);
  return 4 * std::numbers::pi * r * R / (R - r);
}

}  // namespace oracle
