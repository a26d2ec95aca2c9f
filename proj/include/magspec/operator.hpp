#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "magspec/fields.hpp"
#include "magspec/grid.hpp"

namespace magspec {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

enum class Boundary { Dirichlet, Neumann };

const char* to_string(Boundary bc);
Boundary boundary_from_string(const std::string& s);

/// Edge p -> q = p + h e_axis between two region nodes (local indices).
/// phase = h * a_axis(midpoint); the stored matrix entry is -exp(i phase) / h^2.
struct Link {
  std::size_t p = 0;
  std::size_t q = 0;
  int axis = 0;
  double phase = 0.0;
};

struct QuadraticFormValue {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
  double norm_sq = 0.0;
};

/// Discrete magnetic Schrodinger operator on a node region of a grid:
/// (Hu)_p = sum_{q ~ p} (u_p - e^{i theta_pq} u_q) / h^2 + V_p u_p, with the
/// Dirichlet stencil counting every lattice neighbour (absent ones carry u = 0)
/// and the Neumann stencil counting only neighbours inside the region.
class DiscreteOperator {
 public:
  DiscreteOperator(Grid grid, NodeSet region, Boundary bc, std::vector<Link> links, std::vector<double> potential);

  const Grid& grid() const noexcept { return grid_; }
  const NodeSet& region() const noexcept { return region_; }
  Boundary bc() const noexcept { return bc_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const std::vector<Link>& links() const noexcept { return links_; }
  const std::vector<double>& potential() const noexcept { return potential_; }
  /// Lattice neighbours of each region node that lie outside the region.
  const std::vector<int>& missing_neighbors() const noexcept { return missing_; }
  std::size_t size() const noexcept { return potential_.size(); }
  int dim() const noexcept { return grid_.dim(); }
  double spacing() const noexcept { return grid_.spacing(); }
  double cell_volume() const noexcept { return grid_.cell_volume(); }
  double min_potential() const;

  /// Same operator with link phases theta_pq + phi_q - phi_p (a discrete gauge transform).
  DiscreteOperator with_phase_shift(const std::vector<double>& phi) const;

  /// Same operator with every link phase set to zero.
  DiscreteOperator without_field() const;

 private:
  void build_matrix();

  Grid grid_;
  NodeSet region_;
  Boundary bc_;
  std::vector<Link> links_;
  std::vector<double> potential_;
  std::vector<int> missing_;
  SparseMatrix matrix_;
};

DiscreteOperator assemble(const Grid& grid, const FieldSpec& spec, const NodeSet& region, Boundary bc);
DiscreteOperator assemble(const Grid& grid, const FieldSpec& spec, const BallRegion& ball, Boundary bc);

/// Region values of a node function given on the grid.
std::vector<double> restrict_to_region(const DiscreteOperator& op, const ScalarFn& f);

/// Edge-wise evaluation of the form with volume weight h^n:
/// kinetic = sum_edges |u_p - e^{i theta} u_q|^2 h^{n-2} (+ Dirichlet boundary terms),
/// potential = sum V_p |u_p|^2 h^n. `total` comes from the matrix, Re<u, Hu> h^n.
QuadraticFormValue quad_form(const DiscreteOperator& op, const CVector& u);

/// Re<u, Hu> h^n through the sparse matrix only.
double matrix_form(const DiscreteOperator& op, const CVector& u);

/// e^{-i phi} u: maps eigenvectors of op to those of op.with_phase_shift(phi).
CVector gauge_transform_vector(const CVector& u, const std::vector<double>& phi);

struct DiamagneticResult {
  double lhs = 0.0;  // kinetic form of |u| without field
  double rhs = 0.0;  // kinetic form of u with field
  bool holds = false;
};

DiamagneticResult diamagnetic_check(const DiscreteOperator& op_a, const DiscreteOperator& op_0, const CVector& u);

/// (1 + eps) (lambda_base + dim (1 + 1/eps) a_tilde_sup^2): upper bound on the
/// bottom of the operator perturbed by a potential with sup norm a_tilde_sup.
double bounded_perturbation_bound(double lambda_base, int dim, double a_tilde_sup, double eps);

/// Coordinate-format dump: "row col re im" per stored entry, 17 significant digits.
void write_matrix(const DiscreteOperator& op, std::ostream& os);

}  // namespace magspec
