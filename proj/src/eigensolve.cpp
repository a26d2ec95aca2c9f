#include "magspec/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "magspec/errors.hpp"

namespace magspec {

namespace {

using Dense = Eigen::MatrixXcd;
using Factorization = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

SpectralResult dense_solve(const SparseMatrix& H, const SolverOptions& opt) {
  Dense A = Dense(H);
  A = 0.5 * (A + A.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Dense> es(A);
  if (es.info() != Eigen::Success) throw NumericalError("dense Hermitian eigensolver failed");
  SpectralResult r;
  r.method = "dense";
  r.seed = opt.seed;
  for (int j = 0; j < opt.k; ++j) {
    const CVector v = es.eigenvectors().col(j);
    const double lam = es.eigenvalues()[j];
    r.eigenvalues.push_back(lam);
    r.residuals.push_back((H * v - lam * v).norm() / v.norm());
    if (opt.want_vectors) r.eigenvectors.push_back(v);
  }
  return r;
}

/// Orthonormalizes the columns of Z against the orthonormal basis X and against
/// each other (two passes of modified Gram-Schmidt), dropping dependent columns.
Dense orthonormalize_against(const Dense& X, Dense Z) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < Z.cols(); ++j) {
    const double n0 = Z.col(j).norm();
    if (n0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      Z.col(j) -= X * (X.adjoint() * Z.col(j));
      for (Eigen::Index i : keep) Z.col(j) -= Z.col(i) * Z.col(i).dot(Z.col(j));
    }
    const double n1 = Z.col(j).norm();
    if (n1 <= 1e-10 * n0) continue;
    Z.col(j) /= n1;
    keep.push_back(j);
  }
  Dense out(Z.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = Z.col(keep[c]);
  return out;
}

/// Applies (H - shift)^{-1} through a sparse LDL^H factorization, or the
/// inverse diagonal when the factorization is unavailable. The shift stays
/// strictly below the spectrum: a new shift is accepted only when the
/// factorization shows zero negative pivots (Sylvester inertia).
class BlockPreconditioner {
 public:
  BlockPreconditioner(const SparseMatrix& H, double shift, Preconditioner kind) : H_(H), shift_(shift) {
    if (kind == Preconditioner::ShiftedFactorization) use_factor_ = factor_at(shift, factor_);
    if (!use_factor_) {
      diag_.resize(H.rows());
      for (int i = 0; i < H.rows(); ++i) diag_[i] = std::max(H.coeff(i, i).real() - shift, 1e-12);
    }
  }

  Dense apply(const Dense& R) const {
    if (use_factor_) return factor_->solve(R);
    Dense W = R;
    for (Eigen::Index i = 0; i < W.rows(); ++i) W.row(i) /= diag_[i];
    return W;
  }

  bool factored() const { return use_factor_; }
  double shift() const { return shift_; }

  /// Moves the shift up to `candidate` if H - candidate is still positive definite.
  bool try_shift(double candidate) {
    if (!use_factor_ || !(candidate > shift_)) return false;
    auto f = std::make_unique<Factorization>();
    if (!factor_at(candidate, f)) return false;
    factor_ = std::move(f);
    shift_ = candidate;
    return true;
  }

 private:
  bool factor_at(double shift, std::unique_ptr<Factorization>& out) const {
    SparseMatrix S = H_;
    for (int i = 0; i < S.rows(); ++i) S.coeffRef(i, i) -= shift;
    auto f = std::make_unique<Factorization>();
    f->compute(S);
    if (f->info() != Eigen::Success) return false;
    const auto D = f->vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i)
      if (!(D[i].real() > 0.0)) return false;
    out = std::move(f);
    return true;
  }

  const SparseMatrix& H_;
  double shift_;
  bool use_factor_ = false;
  std::unique_ptr<Factorization> factor_;
  Eigen::VectorXd diag_;
};

SpectralResult lobpcg(const SparseMatrix& H, double lower_bound, const SolverOptions& opt) {
  const Eigen::Index N = H.rows();
  const int k = opt.k;
  const Eigen::Index m = std::min<Eigen::Index>(std::max(k + 4, 2 * k), (N - 1) / 3);
  if (m < k) throw ParameterError("too many eigenvalues requested for an iterative solve of this size");

  const double margin = std::max(0.25, 0.05 * std::abs(lower_bound));
  BlockPreconditioner T(H, lower_bound - margin, opt.preconditioner);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dense X(N, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < N; ++i) X(i, j) = cplx(gauss(rng), gauss(rng));
  X = orthonormalize_against(Dense(N, 0), X);
  if (X.cols() < m) throw NumericalError("degenerate starting block");

  Dense HX = H * X;
  Eigen::VectorXd theta(m);
  auto rayleigh_ritz = [&](const Dense& S, const Dense& HS) {
    Dense G = S.adjoint() * HS;
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Dense> es(G);
    if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz eigensolve failed");
    const Dense C = es.eigenvectors().leftCols(m);
    theta = es.eigenvalues().head(m);
    return C;
  };
  {
    const Dense C = rayleigh_ritz(X, HX);
    X = X * C;
    HX = HX * C;
  }

  Dense P(N, 0);
  std::vector<double> res(m, 0.0);
  SpectralResult out;
  out.seed = opt.seed;
  out.method = T.factored() ? "lobpcg+ldlt" : "lobpcg+jacobi";
  for (int it = 1; it <= opt.max_iter; ++it) {
    Dense R = HX - X * theta.asDiagonal();
    bool converged = true;
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j) {
      res[j] = R.col(j).norm();
      if (j < k && res[j] > opt.tol) converged = false;
      if (res[j] > 0.1 * opt.tol) active.push_back(j);
    }
    out.iterations = it - 1;
    if (converged) break;
    if (it == opt.max_iter) {
      std::ostringstream os;
      os << "eigensolver did not converge in " << opt.max_iter << " iterations (worst residual "
         << *std::max_element(res.begin(), res.begin() + k) << ")";
      throw ConvergenceError(os.str(), std::vector<double>(res.begin(), res.begin() + k));
    }
    if (it % 5 == 0 && T.factored()) {
      // approach the bottom: theta_0 >= lambda_min, inertia guards the other side
      const double gap = theta[0] - T.shift();
      const double floor_gap = 1e-4 * (1.0 + std::abs(theta[0]));
      if (gap > 2.0 * floor_gap) {
        const double candidate = theta[0] - std::max(0.1 * gap, floor_gap);
        if (!T.try_shift(candidate)) T.try_shift(theta[0] - std::max(0.5 * gap, floor_gap));
      }
    }
    Dense Ra(N, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) Ra.col(static_cast<Eigen::Index>(c)) = R.col(active[c]);
    Dense W = T.apply(Ra);
    Dense Z(N, W.cols() + P.cols());
    Z << W, P;
    Z = orthonormalize_against(X, Z);
    const Dense HZ = H * Z;
    Dense S(N, m + Z.cols()), HS(N, m + Z.cols());
    S << X, Z;
    HS << HX, HZ;
    const Dense C = rayleigh_ritz(S, HS);
    const auto Cz = C.bottomRows(Z.cols());
    P = Z * Cz;
    X = S * C;
    HX = HS * C;
    if (it % 25 == 0) {
      // re-orthonormalize to control drift
      X = orthonormalize_against(Dense(N, 0), X);
      if (X.cols() < m) throw NumericalError("eigensolver block lost rank");
      HX = H * X;
      const Dense C2 = rayleigh_ritz(X, HX);
      X = X * C2;
      HX = HX * C2;
      P = orthonormalize_against(X, P);
    }
  }
  for (int j = 0; j < k; ++j) {
    out.eigenvalues.push_back(theta[j]);
    out.residuals.push_back(res[j]);
    if (opt.want_vectors) out.eigenvectors.push_back(X.col(j));
  }
  return out;
}

}  // namespace

SpectralResult smallest_eigs(const SparseMatrix& H, double lower_bound, const SolverOptions& opt) {
  const auto N = static_cast<std::size_t>(H.rows());
  if (opt.k < 1) throw ParameterError("k must be at least 1");
  if (static_cast<std::size_t>(opt.k) >= N) {
    std::ostringstream os;
    os << "k = " << opt.k << " must be smaller than the operator size " << N;
    throw ParameterError(os.str());
  }
  if (!(opt.tol > 0.0)) throw ParameterError("tolerance must be positive");
  SpectralResult r = N <= opt.dense_threshold ? dense_solve(H, opt) : lobpcg(H, lower_bound, opt);
  for (std::size_t j = 0; j < r.residuals.size(); ++j)
    if (!(r.residuals[j] <= opt.tol)) {
      std::ostringstream os;
      os << "eigenpair " << j << " residual " << r.residuals[j] << " exceeds tolerance " << opt.tol;
      throw ConvergenceError(os.str(), r.residuals);
    }
  return r;
}

SpectralResult smallest_eigs(const DiscreteOperator& op, const SolverOptions& opt) {
  return smallest_eigs(op.matrix(), op.min_potential(), opt);
}

double lambda_bottom(const Grid& grid, const FieldSpec& spec, const BallRegion& ball, Boundary bc,
                     const SolverOptions& options) {
  SolverOptions o = options;
  o.k = 1;
  return smallest_eigs(assemble(grid, spec, ball, bc), o).eigenvalues.front();
}

BallBottoms ball_bottoms(const Grid& grid, const FieldSpec& spec, const BallRegion& ball, const SolverOptions& options) {
  SolverOptions o = options;
  o.k = 1;
  const NodeSet nodes = nodes_in_ball(grid, ball);
  const DiscreteOperator dir = assemble(grid, spec, nodes, Boundary::Dirichlet);
  const DiscreteOperator neu(dir.grid(), dir.region(), Boundary::Neumann, dir.links(), dir.potential());
  BallBottoms b;
  b.lambda = smallest_eigs(dir, o).eigenvalues.front();
  b.mu = smallest_eigs(neu, o).eigenvalues.front();
  if (b.mu > b.lambda + 10.0 * o.tol) {
    std::ostringstream os;
    os.precision(17);
    os << "Neumann bottom " << b.mu << " exceeds Dirichlet bottom " << b.lambda;
    throw NumericalError(os.str());
  }
  return b;
}

std::size_t count_below(const SparseMatrix& H, double threshold) {
  if (!std::isfinite(threshold)) throw ParameterError("threshold must be finite");
  SparseMatrix S = H;
  for (int i = 0; i < S.rows(); ++i) S.coeffRef(i, i) -= threshold;
  Factorization f(S);
  double scale = 0.0;
  for (int i = 0; i < H.rows(); ++i) scale = std::max(scale, std::abs(H.coeff(i, i)));
  bool ok = f.info() == Eigen::Success;
  std::size_t negatives = 0;
  if (ok) {
    const auto D = f.vectorD();
    for (Eigen::Index i = 0; i < D.size(); ++i) {
      const double d = D[i].real();
      if (!std::isfinite(d) || std::abs(d) < 1e-13 * std::max(1.0, scale)) {
        ok = false;
        break;
      }
      if (d < 0.0) ++negatives;
    }
  }
  if (ok) return negatives;
  if (H.rows() > 4000) throw NumericalError("LDL^H factorization broke down while counting eigenvalues");
  Dense A = Dense(H);
  A = 0.5 * (A + A.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Dense> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed while counting eigenvalues");
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] < threshold) ++c;
  return c;
}

std::size_t count_below(const DiscreteOperator& op, double threshold) { return count_below(op.matrix(), threshold); }

}  // namespace magspec
