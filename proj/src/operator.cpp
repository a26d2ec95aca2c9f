#include "magspec/operator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "magspec/errors.hpp"

namespace magspec {

const char* to_string(Boundary bc) { return bc == Boundary::Dirichlet ? "dirichlet" : "neumann"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "Dirichlet") return Boundary::Dirichlet;
  if (s == "neumann" || s == "Neumann") return Boundary::Neumann;
  throw ConfigError("unknown boundary condition '" + s + "' (expected dirichlet or neumann)");
}

DiscreteOperator::DiscreteOperator(Grid grid, NodeSet region, Boundary bc, std::vector<Link> links,
                                   std::vector<double> potential)
    : grid_(std::move(grid)), region_(std::move(region)), bc_(bc), links_(std::move(links)),
      potential_(std::move(potential)) {
  if (region_.empty()) throw GeometryError("operator region has no nodes");
  if (potential_.size() != region_.size()) throw ParameterError("potential size does not match the region");
  missing_.assign(region_.size(), 0);
  const auto& members = region_.members();
  for (std::size_t i = 0; i < members.size(); ++i)
    for (int axis = 0; axis < grid_.dim(); ++axis)
      for (int step : {-1, 1}) {
        const std::size_t q = grid_.neighbor(members[i], axis, step);
        if (q == Grid::npos || !region_.contains(q)) ++missing_[i];
      }
  build_matrix();
}

void DiscreteOperator::build_matrix() {
  const std::size_t n = size();
  const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const int two_d = 2 * grid_.dim();
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(n + 2 * links_.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int degree = bc_ == Boundary::Dirichlet ? two_d : two_d - missing_[i];
    t.emplace_back(static_cast<int>(i), static_cast<int>(i), cplx(degree * inv_h2 + potential_[i], 0.0));
  }
  for (const Link& l : links_) {
    const cplx w = -std::polar(inv_h2, l.phase);
    t.emplace_back(static_cast<int>(l.p), static_cast<int>(l.q), w);
    t.emplace_back(static_cast<int>(l.q), static_cast<int>(l.p), std::conj(w));
  }
  matrix_.resize(static_cast<int>(n), static_cast<int>(n));
  matrix_.setFromTriplets(t.begin(), t.end());
  matrix_.makeCompressed();
}

double DiscreteOperator::min_potential() const {
  double m = potential_.front();
  for (double v : potential_) m = std::min(m, v);
  return m;
}

DiscreteOperator DiscreteOperator::with_phase_shift(const std::vector<double>& phi) const {
  if (phi.size() != size()) throw ParameterError("gauge function size does not match the operator");
  std::vector<Link> links = links_;
  for (Link& l : links) l.phase += phi[l.q] - phi[l.p];
  return DiscreteOperator(grid_, region_, bc_, std::move(links), potential_);
}

DiscreteOperator DiscreteOperator::without_field() const {
  std::vector<Link> links = links_;
  for (Link& l : links) l.phase = 0.0;
  return DiscreteOperator(grid_, region_, bc_, std::move(links), potential_);
}

DiscreteOperator assemble(const Grid& grid, const FieldSpec& spec, const NodeSet& region, Boundary bc) {
  if (spec.dim != grid.dim()) throw ParameterError("field dimension does not match the grid");
  if (region.empty()) throw GeometryError("operator region has no interior nodes");
  const double h = grid.spacing();
  const auto& members = region.members();
  std::vector<double> potential(members.size());
  std::vector<Link> links;
  links.reserve(members.size() * grid.dim());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Point x = grid.coordinate(members[i]);
    potential[i] = spec.V ? spec.V(x) : 0.0;
    if (!std::isfinite(potential[i])) throw EvaluationError("non-finite potential V on a grid node");
    for (int axis = 0; axis < grid.dim(); ++axis) {
      const std::size_t q = grid.neighbor(members[i], axis, +1);
      if (q == Grid::npos || !region.contains(q)) continue;
      Point mid = x;
      mid[axis] += 0.5 * h;
      double phase = 0.0;
      if (spec.a) {
        const Point a = spec.a(mid);
        if (!std::isfinite(a[axis])) throw EvaluationError("non-finite magnetic potential on a link midpoint");
        phase = h * a[axis];
      }
      links.push_back(Link{i, static_cast<std::size_t>(region.local_index(q)), axis, phase});
    }
  }
  return DiscreteOperator(grid, region, bc, std::move(links), std::move(potential));
}

DiscreteOperator assemble(const Grid& grid, const FieldSpec& spec, const BallRegion& ball, Boundary bc) {
  return assemble(grid, spec, nodes_in_ball(grid, ball), bc);
}

std::vector<double> restrict_to_region(const DiscreteOperator& op, const ScalarFn& f) {
  std::vector<double> out;
  out.reserve(op.size());
  for (std::size_t m : op.region().members()) out.push_back(f(op.grid().coordinate(m)));
  return out;
}

namespace {

void check_size(const DiscreteOperator& op, const CVector& u) {
  if (static_cast<std::size_t>(u.size()) != op.size()) throw ParameterError("vector size does not match the operator");
}

double kinetic_form(const DiscreteOperator& op, const CVector& u) {
  const double w = std::pow(op.spacing(), op.dim() - 2);
  double k = 0.0;
  for (const Link& l : op.links()) k += std::norm(u[l.p] - std::polar(1.0, l.phase) * u[l.q]);
  if (op.bc() == Boundary::Dirichlet) {
    const auto& miss = op.missing_neighbors();
    for (std::size_t i = 0; i < op.size(); ++i) k += miss[i] * std::norm(u[i]);
  }
  return k * w;
}

}  // namespace

double matrix_form(const DiscreteOperator& op, const CVector& u) {
  check_size(op, u);
  const CVector Hu = op.matrix() * u;
  return u.dot(Hu).real() * op.cell_volume();
}

QuadraticFormValue quad_form(const DiscreteOperator& op, const CVector& u) {
  check_size(op, u);
  QuadraticFormValue f;
  f.kinetic = kinetic_form(op, u);
  const double vol = op.cell_volume();
  for (std::size_t i = 0; i < op.size(); ++i) {
    f.potential += op.potential()[i] * std::norm(u[i]) * vol;
    f.norm_sq += std::norm(u[i]) * vol;
  }
  f.total = matrix_form(op, u);
  return f;
}

CVector gauge_transform_vector(const CVector& u, const std::vector<double>& phi) {
  if (static_cast<std::size_t>(u.size()) != phi.size()) throw ParameterError("gauge function size mismatch");
  CVector out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = std::polar(1.0, -phi[i]) * u[i];
  return out;
}

DiamagneticResult diamagnetic_check(const DiscreteOperator& op_a, const DiscreteOperator& op_0, const CVector& u) {
  if (op_a.size() != op_0.size() || op_a.bc() != op_0.bc() || op_a.links().size() != op_0.links().size())
    throw ParameterError("diamagnetic check needs operators on the same region");
  check_size(op_a, u);
  CVector mod(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) mod[i] = std::abs(u[i]);
  DiamagneticResult r;
  r.lhs = kinetic_form(op_0, mod);
  r.rhs = kinetic_form(op_a, u);
  r.holds = r.lhs <= r.rhs + 1e-12;
  return r;
}

double bounded_perturbation_bound(double lambda_base, int dim, double a_tilde_sup, double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(a_tilde_sup >= 0.0)) throw ParameterError("a_tilde_sup must be nonnegative");
  return (1.0 + eps) * (lambda_base + dim * (1.0 + 1.0 / eps) * a_tilde_sup * a_tilde_sup);
}

void write_matrix(const DiscreteOperator& op, std::ostream& os) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(17);
  const SparseMatrix& M = op.matrix();
  os << "% rows " << M.rows() << " cols " << M.cols() << " nnz " << M.nonZeros() << "\n";
  for (int col = 0; col < M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(M, col); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace magspec
