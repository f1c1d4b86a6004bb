#include <doctest.h>

#include <random>

#include "test_helpers.hpp"

using namespace qgbc;
using cd = std::complex<double>;

namespace {
constexpr double pi = 3.14159265358979323846;

QuasiDeltaParams lasso_params(double d1, double d2, std::array<double, 4> chis) {
  // chis indexed by boundary point id: {e1/tail, e1/head, e2/tail, e2/head}.
  QuasiDeltaParams p;
  p.delta[0] = d1;
  p.delta[1] = d2;
  for (int i = 0; i < 4; ++i)
    if (chis[i] != 0.0) p.chi[i] = chis[i];
  return p;
}
}  // namespace

TEST_CASE("dead-end junction of size 1 is a Robin block") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  const double d = 0.7;
  BoundaryUnitary bu = quasi_delta_unitary(bl, lasso_params(d, 0.3, {0, 0, 0, 0}));
  // Point 0 is the size-1 junction at v1.
  CHECK(std::abs(bu.U(0, 0) - std::polar(1.0, d)) < 1e-14);
  // With delta = 0 it becomes the identity (Neumann-type block).
  BoundaryUnitary bu0 = quasi_delta_unitary(bl, lasso_params(0.0, 0.3, {0, 0, 0, 0}));
  CHECK(std::abs(bu0.U(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("size-2 Kirchhoff block is the swap") {
  MetricGraph g = test::two_edge_graph();
  BoundaryLayout bl = boundary_index(g);
  QuasiDeltaParams p;
  p.delta[g.vertex_index("m")] = 0.0;
  BoundaryUnitary bu = quasi_delta_unitary(bl, p);
  // Junction couples points 1 and 2; block [[0,1],[1,0]].
  CHECK(std::abs(bu.U(1, 1)) < 1e-15);
  CHECK(std::abs(bu.U(1, 2) - 1.0) < 1e-15);
  CHECK(std::abs(bu.U(2, 1) - 1.0) < 1e-15);
  // Exterior block is Dirichlet.
  CHECK(std::abs(bu.U(0, 0) + 1.0) < 1e-15);
  CHECK(std::abs(bu.U(3, 3) + 1.0) < 1e-15);
}

TEST_CASE("exterior-only interval gives U = -I, P = I, C = 0, infinite gap") {
  MetricGraph g = test::interval_graph();
  BoundaryLayout bl = boundary_index(g);
  BoundaryUnitary bu = quasi_delta_unitary(bl, {});
  CHECK(test::frob(bu.U + MatrixXcd::Identity(2, 2)) < 1e-15);
  CHECK(test::frob(bu.P - MatrixXcd::Identity(2, 2)) < 1e-15);
  CHECK(test::frob(bu.C) < 1e-15);
  CHECK(std::isinf(bu.gap));

  auto [P, gap] = eigenprojector_minus_one(bu.U);
  CHECK(test::frob(P - MatrixXcd::Identity(2, 2)) < 1e-12);
  CHECK(std::isinf(gap));
}

TEST_CASE("identity unitary: P = 0, gap = pi") {
  auto [P, gap] = eigenprojector_minus_one(MatrixXcd::Identity(3, 3));
  CHECK(test::frob(P) < 1e-12);
  CHECK(gap == doctest::Approx(pi));
}

TEST_CASE("quasi-delta blocks: rank of P and gap") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  const double d2 = -1.1;
  BoundaryUnitary bu = quasi_delta_unitary(bl, lasso_params(0.4, d2, {0, 0.5, 1.0, 2.5}));
  auto [P, gap] = eigenprojector_minus_one(bu.U);
  CHECK(test::frob(P - bu.P) < 1e-12);
  // Size-3 junction contributes rank 2, size-1 contributes rank 0.
  CHECK(std::abs(std::real(P.trace()) - 2.0) < 1e-12);
  CHECK(gap == doctest::Approx(pi - 1.1));
}

TEST_CASE("partial Cayley: closed form vs spectral over random quasi-delta draws") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dd(-pi + 1e-2, pi - 1e-2);
  std::uniform_real_distribution<double> dc(0.0, 2 * pi);
  for (int it = 0; it < 50; ++it) {
    BoundaryUnitary bu =
        quasi_delta_unitary(bl, lasso_params(dd(rng), dd(rng), {dc(rng), dc(rng), dc(rng), dc(rng)}));
    MatrixXcd Cs = partial_cayley(bu.U);
    CHECK((Cs - bu.C).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("size-2 block with delta = pi/2: Cayley entries -1/2") {
  MetricGraph g = test::two_edge_graph();
  BoundaryLayout bl = boundary_index(g);
  QuasiDeltaParams p;
  p.delta[g.vertex_index("m")] = pi / 2;
  const double c1 = 0.3, c2 = 1.9;
  p.chi[1] = c1;
  p.chi[2] = c2;
  BoundaryUnitary bu = quasi_delta_unitary(bl, p);
  CHECK(std::abs(bu.C(1, 1) - cd(-0.5, 0.0)) < 1e-14);
  CHECK(std::abs(bu.C(2, 2) - cd(-0.5, 0.0)) < 1e-14);
  CHECK(std::abs(bu.C(1, 2) - (-0.5 * std::polar(1.0, c1 - c2))) < 1e-14);
}

TEST_CASE("unitary/projector/Cayley identities over random draws") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dd(-2.0, 2.0);
  std::uniform_real_distribution<double> dc(0.0, 2 * pi);
  for (int it = 0; it < 25; ++it) {
    BoundaryUnitary bu =
        quasi_delta_unitary(bl, lasso_params(dd(rng), dd(rng), {dc(rng), dc(rng), dc(rng), dc(rng)}));
    const int n = bl.size();
    CHECK(test::frob(bu.U.adjoint() * bu.U - MatrixXcd::Identity(n, n)) < 1e-12);
    CHECK(test::frob(bu.P * bu.P - bu.P) < 1e-12);
    CHECK(test::frob(bu.P - bu.P.adjoint()) < 1e-12);
    CHECK(test::frob(bu.P * bu.U - bu.U * bu.P) < 1e-12);
    CHECK(test::frob(bu.P * bu.U + bu.P) < 1e-12);
    CHECK(test::frob(bu.C - bu.C.adjoint()) < 1e-12);
    CHECK(test::frob(bu.C * bu.P) < 1e-12);
  }
}

TEST_CASE("Cayley norm equals the worst |tan(delta/2)| over vertices") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  const double d1 = 0.9, d2 = -2.2;
  BoundaryUnitary bu = quasi_delta_unitary(bl, lasso_params(d1, d2, {0.1, 0.2, 0.3, 0.4}));
  Eigen::JacobiSVD<MatrixXcd> svd(bu.C);
  const double expect = std::max(std::abs(std::tan(d1 / 2)), std::abs(std::tan(d2 / 2)));
  CHECK(svd.singularValues()(0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("gauge conjugation") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  BoundaryUnitary bu = quasi_delta_unitary(bl, lasso_params(0.8, -0.5, {0.3, 1.1, 2.0, 0.7}));

  SUBCASE("zero phase leaves U unchanged") {
    BoundaryUnitary out = gauge_conjugate(bu, VectorXd::Zero(4));
    CHECK(test::frob(out.U - bu.U) == 0.0);
    CHECK(out.gap == bu.gap);
  }
  SUBCASE("constant phase leaves U unchanged") {
    BoundaryUnitary out = gauge_conjugate(bu, VectorXd::Constant(4, 1.234));
    CHECK(test::frob(out.U - bu.U) < 1e-14);
  }
  SUBCASE("theta = -chi maps to the chi = 0 unitary with the same deltas") {
    VectorXd theta(4);
    theta << -0.3, -1.1, -2.0, -0.7;
    BoundaryUnitary out = gauge_conjugate(bu, theta);
    BoundaryUnitary flat = quasi_delta_unitary(bl, lasso_params(0.8, -0.5, {0, 0, 0, 0}));
    CHECK(test::frob(out.U - flat.U) < 1e-13);
    CHECK(test::frob(out.P - flat.P) < 1e-13);
    CHECK(test::frob(out.C - flat.C) < 1e-13);
  }
  SUBCASE("conjugated package matches spectral recomputation") {
    VectorXd theta(4);
    theta << 0.4, -0.9, 1.7, 0.2;
    BoundaryUnitary out = gauge_conjugate(bu, theta);
    auto [P, gap] = eigenprojector_minus_one(out.U);
    CHECK(test::frob(P - out.P) < 1e-12);
    CHECK(gap == doctest::Approx(out.gap));
    CHECK((partial_cayley(out.U) - out.C).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spectrum accumulating at -1 raises NO_GAP") {
  // Eigenvalue at angular distance 1e-7 from -1: inside the gap threshold
  // but outside the clustering tolerance.
  MatrixXcd U = MatrixXcd::Zero(2, 2);
  U(0, 0) = std::polar(1.0, pi - 1e-7);
  U(1, 1) = 1.0;
  CHECK_THROWS_WITH_AS(eigenprojector_minus_one(U), doctest::Contains("NO_GAP"), error);
  CHECK_THROWS_WITH_AS(partial_cayley(U), doctest::Contains("NO_GAP"), error);
}

TEST_CASE("delta at the gap margin is rejected") {
  MetricGraph g = test::lasso_graph();
  BoundaryLayout bl = boundary_index(g);
  CHECK_THROWS_WITH_AS(quasi_delta_unitary(bl, lasso_params(pi - 1e-4, 0.0, {0, 0, 0, 0})),
                       doctest::Contains("PARAM_MISMATCH"), error);
}

TEST_CASE("missing junction parameters are rejected") {
  MetricGraph g = test::two_edge_graph();
  BoundaryLayout bl = boundary_index(g);
  CHECK_THROWS_WITH_AS(quasi_delta_unitary(bl, {}), doctest::Contains("PARAM_MISMATCH"), error);
}
