#include <cmath>

#include "doctest.h"
#include "magspec/eigensolve.hpp"
#include "magspec/errors.hpp"
#include "magspec/fields.hpp"
#include "oracles.hpp"

using namespace magspec;

TEST_CASE("free Dirichlet box matches the sine formula") {
  for (int dim : {2, 3}) {
    const int n = dim == 2 ? 30 : 12;
    const double h = 0.1;
    Grid g(dim, Point{}, h, MultiIndex{n, n, dim == 3 ? n : 1});
    const auto op = assemble(g, free_field(dim), all_nodes(g), Boundary::Dirichlet);
    SolverOptions o;
    o.k = 4;
    o.tol = 1e-10;
    const auto res = smallest_eigs(op, o);
    const auto ref = oracle::free_dirichlet_box(dim, n, h);
    for (int i = 0; i < 4; ++i) CHECK(res.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-8));
    for (double r : res.residuals) CHECK(r <= 1e-9 * (1 + res.eigenvalues.back()));
  }
}

TEST_CASE("iterative and dense paths agree") {
  const FieldSpec f = constant_field_2d(2.0, Gauge2D::Symmetric, [](const Point& x) { return x[0] * x[0]; });
  Grid g(2, Point{-2, -2, 0}, 0.1, MultiIndex{41, 41, 1});
  const auto op = assemble(g, f, BallRegion(Point{}, 1.5), Boundary::Dirichlet);
  const Eigen::VectorXd ref = oracle::dense_eigenvalues(Eigen::MatrixXcd(op.matrix()));
  for (auto pc : {Preconditioner::ShiftedFactorization, Preconditioner::Jacobi}) {
    SolverOptions o;
    o.k = 3;
    o.tol = 1e-9;
    o.preconditioner = pc;
    o.dense_threshold = 0;
    const auto res = smallest_eigs(op, o);
    for (int i = 0; i < 3; ++i) CHECK(res.eigenvalues[i] == doctest::Approx(ref(i)).epsilon(1e-8));
  }
  SolverOptions dense;
  dense.k = 3;
  dense.dense_threshold = 100000;
  const auto d = smallest_eigs(op, dense);
  for (int i = 0; i < 3; ++i) CHECK(d.eigenvalues[i] == doctest::Approx(ref(i)).epsilon(1e-10));
}

TEST_CASE("eigenvectors are unit residual pairs") {
  const FieldSpec f = constant_field_2d(1.0, Gauge2D::Landau);
  Grid g(2, Point{-3, -3, 0}, 0.1, MultiIndex{61, 61, 1});
  const auto op = assemble(g, f, BallRegion(Point{}, 2.5), Boundary::Dirichlet);
  SolverOptions o;
  o.k = 2;
  o.want_vectors = true;
  const auto res = smallest_eigs(op, o);
  REQUIRE(res.eigenvectors.size() == 2);
  for (int i = 0; i < 2; ++i) {
    const CVector& v = res.eigenvectors[i];
    CHECK(v.norm() == doctest::Approx(1).epsilon(1e-10));
    CHECK((op.matrix() * v - res.eigenvalues[i] * v).norm() < 1e-7 * (1 + res.eigenvalues[i]));
  }
}

TEST_CASE("same seed gives identical output") {
  const FieldSpec f = constant_field_2d(1.0, Gauge2D::Symmetric);
  Grid g(2, Point{-3, -3, 0}, 0.1, MultiIndex{61, 61, 1});
  const auto op = assemble(g, f, BallRegion(Point{}, 2.5), Boundary::Dirichlet);
  SolverOptions o;
  o.k = 2;
  const auto a = smallest_eigs(op, o), b = smallest_eigs(op, o);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("Dirichlet and Neumann bottoms on a ball") {
  Grid g(2, Point{-2, -2, 0}, 0.1, MultiIndex{41, 41, 1});
  const auto bb = ball_bottoms(g, free_field(2), BallRegion(Point{}, 1.0));
  CHECK(bb.mu == doctest::Approx(0).epsilon(1e-9));
  // continuum j_{0,1}^2 / rho^2, with the effective radius rho between r and r + h
  const double j01sq = 5.783185962946784;
  CHECK(bb.lambda <= j01sq);
  CHECK(bb.lambda >= j01sq / (1.1 * 1.1));
  CHECK(lambda_bottom(g, free_field(2), BallRegion(Point{}, 1.0), Boundary::Dirichlet) ==
        doctest::Approx(bb.lambda).epsilon(1e-8));
}

TEST_CASE("inertia count matches dense eigenvalues") {
  const FieldSpec f = constant_field_2d(1.0, Gauge2D::Symmetric, [](const Point& x) { return -x[1]; });
  Grid g(2, Point{-2, -2, 0}, 0.1, MultiIndex{41, 41, 1});
  const auto op = assemble(g, f, BallRegion(Point{}, 1.8), Boundary::Dirichlet);
  const Eigen::VectorXd ev = oracle::dense_eigenvalues(Eigen::MatrixXcd(op.matrix()));
  for (double t : {-1.0, 2.0, 5.0, 10.0, 30.0}) {
    std::size_t expect = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) expect += ev(i) < t;
    CHECK(count_below(op, t) == expect);
  }
}

TEST_CASE("invalid solver requests") {
  Grid g(2, Point{}, 0.5, MultiIndex{3, 3, 1});
  const auto op = assemble(g, free_field(2), all_nodes(g), Boundary::Dirichlet);
  SolverOptions o;
  o.k = 20;
  CHECK_THROWS_AS(smallest_eigs(op, o), ParameterError);
  o.k = 0;
  CHECK_THROWS_AS(smallest_eigs(op, o), ParameterError);
}
