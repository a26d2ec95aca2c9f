#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magspec/operator.hpp"

namespace magspec {

enum class Preconditioner { ShiftedFactorization, Jacobi };

struct SolverOptions {
  int k = 1;
  double tol = 1e-8;        // on ||Hv - lambda v|| / ||v||
  int max_iter = 3000;
  std::uint64_t seed = 20240601;
  bool want_vectors = false;
  std::size_t dense_threshold = 400;  // operators up to this size use a dense solver
  Preconditioner preconditioner = Preconditioner::ShiftedFactorization;
};

struct SpectralResult {
  std::vector<double> eigenvalues;   // ascending
  std::vector<CVector> eigenvectors; // unit norm, filled when want_vectors
  std::vector<double> residuals;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::string method;
};

/// k smallest eigenvalues of a Hermitian matrix. `lower_bound` must not exceed
/// the smallest eigenvalue (it places the preconditioner shift).
SpectralResult smallest_eigs(const SparseMatrix& H, double lower_bound, const SolverOptions& options);

/// Uses min V as the lower bound: the kinetic part is positive semidefinite.
SpectralResult smallest_eigs(const DiscreteOperator& op, const SolverOptions& options);

/// Smallest eigenvalue of the Dirichlet (lambda) or Neumann (mu) operator on ball.
double lambda_bottom(const Grid& grid, const FieldSpec& spec, const BallRegion& ball, Boundary bc,
                     const SolverOptions& options = {});

struct BallBottoms {
  double lambda = 0.0;
  double mu = 0.0;
};

/// Both bottoms on the same node set; throws NumericalError if mu > lambda beyond tolerance.
BallBottoms ball_bottoms(const Grid& grid, const FieldSpec& spec, const BallRegion& ball,
                         const SolverOptions& options = {});

/// Number of eigenvalues strictly below threshold, from the inertia of an LDL^H
/// factorization of H - threshold. Dense fallback for small matrices on breakdown.
std::size_t count_below(const DiscreteOperator& op, double threshold);
std::size_t count_below(const SparseMatrix& H, double threshold);

}  // namespace magspec
