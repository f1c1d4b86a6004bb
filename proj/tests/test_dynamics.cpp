#include <doctest.h>

#include <cmath>
#include <random>

#include "test_helpers.hpp"

using namespace qgbc;
using cd = std::complex<double>;

namespace {

// Small Dirichlet interval system with a scalar-potential control channel.
struct Fixture {
  FormMatrices fm;
  MatrixXcd H0, V, Mr;
  int n = 0;
};

Fixture make_fixture(double h = 0.05) {
  MetricGraph g = test::interval_graph();
  BoundaryLayout bl = boundary_index(g);
  BoundaryUnitary bu = quasi_delta_unitary(bl, {});
  Mesh mesh = make_mesh(g, h);
  // Potential profile: a bump that couples neighbouring modes.
  EdgeProfile bump = [](int, double x) { return x * (1.0 - x) * (0.5 + x); };
  Fixture f;
  f.fm = assemble(g, mesh, bu, zero_profile(), bump);
  f.H0 = MatrixXcd(f.fm.R.adjoint() * f.fm.K * f.fm.R);
  f.V = MatrixXcd(f.fm.R.adjoint() * f.fm.V * f.fm.R);
  f.Mr = MatrixXcd(f.fm.R.adjoint() * f.fm.M * f.fm.R);
  f.n = f.fm.reduced;
  return f;
}

FormLinearHamiltonian constant_H(const Fixture& f, double T) {
  FormLinearHamiltonian H;
  H.H0 = f.H0;
  H.Hi = {f.V};
  H.f = {CoefficientSignal::constant(0.0, 0.0, T)};
  H.Mr = f.Mr;
  H.m = 0.0;
  return H;
}

Poly rebase(const Poly& local, double a) {
  // p(t) = local(t - a), expanded in absolute time.
  Poly shifted;
  shifted.c.assign(local.c.size(), 0.0);
  for (size_t k = 0; k < local.c.size(); ++k) {
    double binom = 1.0;
    for (size_t i = 0; i <= k; ++i) {
      shifted.c[k - i] += local.c[k] * binom * std::pow(-a, static_cast<double>(i));
      binom = binom * double(k - i) / double(i + 1);
    }
  }
  return shifted;
}

// Cubic-piece interpolation of amp*sin(w t) with exact Hermite data.
CoefficientSignal cubic_sin(double amp, double w, double T, int pieces) {
  std::vector<double> breaks(pieces + 1);
  std::vector<Poly> polys;
  for (int j = 0; j <= pieces; ++j) breaks[j] = T * j / pieces;
  for (int j = 0; j < pieces; ++j) {
    const double a = breaks[j], b = breaks[j + 1], dt = b - a;
    const double f0 = amp * std::sin(w * a), f1 = amp * std::sin(w * b);
    const double d0 = amp * w * std::cos(w * a), d1 = amp * w * std::cos(w * b);
    const double c2 = (3 * (f1 - f0) / dt - 2 * d0 - d1) / dt;
    const double c3 = (2 * (f0 - f1) / dt + d0 + d1) / (dt * dt);
    polys.push_back(rebase(Poly{{f0, d0, c2, c3}}, a));
  }
  return CoefficientSignal(breaks, polys);
}

}  // namespace

TEST_CASE("eval: zero signals return H0; linear signal endpoints") {
  Fixture f = make_fixture();
  FormLinearHamiltonian H = constant_H(f, 1.0);
  CHECK((H.eval(0.3) - f.H0).norm() == 0.0);

  FormLinearHamiltonian Ht = H;
  Ht.f = {CoefficientSignal::piecewise_linear({0.0, 1.0}, {0.0, 1.0})};
  CHECK((Ht.eval(0.0) - f.H0).norm() == 0.0);
  CHECK((Ht.eval(1.0) - (f.H0 + f.V)).norm() < 1e-14 * f.H0.norm());
  CHECK_THROWS_WITH_AS(Ht.eval(1.5), doctest::Contains("OUT_OF_DOMAIN"), error);
}

TEST_CASE("eval_derivative: pencil weight identities") {
  Fixture f = make_fixture();

  SUBCASE("constant signals have zero derivative") {
    FormLinearHamiltonian H = constant_H(f, 1.0);
    auto d = H.eval_derivative(0.5);
    CHECK(d.C == 0.0);
  }
  SUBCASE("H(t) = H0 + t*Mr gives C(t) = 1/lambda_min(A(t), Mr)") {
    FormLinearHamiltonian H;
    H.H0 = f.H0;
    H.Hi = {f.Mr};
    H.f = {CoefficientSignal::piecewise_linear({0.0, 1.0}, {0.0, 1.0})};
    H.Mr = f.Mr;
    H.m = 0.0;
    const double t = 0.25;
    auto d = H.eval_derivative(t);
    Eigenpairs ep = dense_geig(H.eval(t) + (H.m + 1.0) * f.Mr, f.Mr);
    CHECK(d.C == doctest::Approx(1.0 / ep.values(0)).epsilon(1e-10));
  }
  SUBCASE("breakpoints are rejected") {
    FormLinearHamiltonian H = constant_H(f, 1.0);
    H.f = {CoefficientSignal::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0})};
    CHECK_THROWS_WITH_AS(H.eval_derivative(0.5), doctest::Contains("AT_BREAKPOINT"), error);
  }
  SUBCASE("piecewise-linear signal: per-piece integrals of C are finite") {
    FormLinearHamiltonian H = constant_H(f, 1.0);
    H.f = {CoefficientSignal::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 1.0, -0.5})};
    double total = 0.0;
    for (double a : {0.0, 0.5}) {
      auto weight = [&](double t) { return H.eval_derivative_inside(t).C; };
      total += simpson(weight, a + 1e-9, a + 0.5 - 1e-9, 64);
    }
    CHECK(std::isfinite(total));
    CHECK(total > 0.0);
  }
}

TEST_CASE("piecewise-constant propagation") {
  Fixture f = make_fixture();
  const double T = 1.0;

  SUBCASE("eigenstate acquires the exact phase") {
    FormLinearHamiltonian H = constant_H(f, T);
    ReducedOperator op;
    op.H = f.H0;
    op.Mr = f.Mr;
    Eigenpairs ep = spectrum(op, 2);
    Propagator P = propagate_piecewise_constant(H, 0.0, 0.7);
    VectorXcd expect = std::polar(1.0, -ep.values(1) * 0.7) * ep.vectors.col(1);
    CHECK((P.U * ep.vectors.col(1) - expect).norm() < 1e-9);
  }
  SUBCASE("s = t returns the identity") {
    FormLinearHamiltonian H = constant_H(f, T);
    Propagator P = propagate_piecewise_constant(H, 0.4, 0.4);
    CHECK((P.U - MatrixXcd::Identity(f.n, f.n)).norm() == 0.0);
  }
  SUBCASE("two equal pieces equal one refined piece") {
    FormLinearHamiltonian H1 = constant_H(f, T);
    H1.f = {CoefficientSignal::piecewise_constant({0.0, 0.5, 1.0}, {0.7, 0.7})};
    FormLinearHamiltonian H2 = constant_H(f, T);
    H2.f = {CoefficientSignal::constant(0.7, 0.0, T)};
    MatrixXcd U1 = propagate_piecewise_constant(H1, 0.0, 1.0).U;
    MatrixXcd U2 = propagate_piecewise_constant(H2, 0.0, 1.0).U;
    CHECK((U1 - U2).norm() < 1e-12 * U2.norm());
  }
  SUBCASE("non-constant signals are rejected") {
    FormLinearHamiltonian H = constant_H(f, T);
    H.f = {CoefficientSignal::piecewise_linear({0.0, 1.0}, {0.0, 1.0})};
    CHECK_THROWS_WITH_AS(propagate_piecewise_constant(H, 0.0, 1.0),
                         doctest::Contains("NOT_PIECEWISE_CONSTANT"), error);
  }
}

TEST_CASE("midpoint stepping: exactness, clamping, self-convergence") {
  Fixture f = make_fixture();
  const double T = 1.0;

  SUBCASE("constant generator: midpoint equals the exact exponential") {
    FormLinearHamiltonian H = constant_H(f, T);
    H.f = {CoefficientSignal::constant(0.4, 0.0, T)};
    MatrixXcd Ue = propagate_piecewise_constant(H, 0.0, T).U;
    MatrixXcd Um = propagate_smooth(H, 0.0, T, 0.23).U;
    CHECK((Ue - Um).norm() < 1e-10 * Ue.norm());
  }
  SUBCASE("dt larger than the window gives a single clamped step") {
    FormLinearHamiltonian H = constant_H(f, T);
    Propagator P = propagate_smooth(H, 0.2, 0.5, 10.0);
    CHECK(P.log.size() == 1);
  }
  SUBCASE("Richardson self-convergence ratio approaches 4") {
    // Operator-norm asymptotics require resolving the fastest mesh mode
    // (lambda_max * dt below ~1), so this runs on a coarse space.
    Fixture fc = make_fixture(0.2);
    FormLinearHamiltonian H = constant_H(fc, T);
    H.f = {cubic_sin(0.8, 5.0, T, 8)};
    const double lmax = dense_geig(fc.H0, fc.Mr).values.maxCoeff();
    const double dt = 0.5 / lmax;
    MatrixXcd U1 = propagate_smooth(H, 0.0, T, dt).U;
    MatrixXcd U2 = propagate_smooth(H, 0.0, T, dt / 2).U;
    MatrixXcd U4 = propagate_smooth(H, 0.0, T, dt / 4).U;
    const double ratio = (U1 - U2).norm() / (U2 - U4).norm();
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.6);
  }
}

TEST_CASE("propagator contracts: unitarity, composition, time reversal, norm conservation") {
  Fixture f = make_fixture();
  const double T = 1.0;
  FormLinearHamiltonian H = constant_H(f, T);
  H.f = {cubic_sin(0.6, 3.0, T, 8)};

  const double dt = 1.0 / 256;
  Propagator U_T = propagate_smooth(H, 0.0, T, dt);
  Propagator U_half = propagate_smooth(H, 0.0, 0.5, dt);
  Propagator U_rest = propagate_smooth(H, 0.5, T, dt);

  CHECK((U_T.U.adjoint() * f.Mr * U_T.U - f.Mr).norm() / f.Mr.norm() < 1e-10);
  CHECK((U_rest.U * U_half.U - U_T.U).norm() / U_T.U.norm() < 1e-10);

  // Time reversal: U(s, t) = U(t, s)^adjoint.
  Propagator U_back = propagate_smooth(H, 0.5, 0.0, dt);
  CHECK((U_back.U - U_half.U.adjoint()).norm() < 1e-12);
  CHECK(U_back.s == 0.5);
  CHECK(U_back.t == 0.0);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist;
  VectorXcd psi(f.n);
  for (int i = 0; i < f.n; ++i) psi(i) = cd(dist(rng), dist(rng));
  const double n0 = std::sqrt(std::real(psi.dot(f.Mr * psi)));
  VectorXcd out = U_T.U * psi;
  CHECK(std::abs(std::sqrt(std::real(out.dot(f.Mr * out))) - n0) < 1e-10 * n0);
}

TEST_CASE("weak residual: order two in dt, zero cases") {
  Fixture f = make_fixture(0.1);
  const double T = 0.5;
  FormLinearHamiltonian H = constant_H(f, T);
  H.f = {cubic_sin(0.7, 4.0, T, 4)};
  ReducedOperator op;
  op.H = f.H0;
  op.Mr = f.Mr;
  HilbertScale scale = make_scale(op, 0.0);

  Eigenpairs ep = spectrum(op, 3);
  std::vector<VectorXcd> probes{ep.vectors.col(0), ep.vectors.col(1), ep.vectors.col(2)};
  VectorXcd psi0 = ep.vectors.col(0);

  Trajectory t1 = propagate_trajectory(H, psi0, 0.0, T, T / 64);
  Trajectory t2 = propagate_trajectory(H, psi0, 0.0, T, T / 128);
  const double r1 = weak_residual(H, t1, probes, scale);
  const double r2 = weak_residual(H, t2, probes, scale);
  CHECK(r1 / r2 > 3.0);
  CHECK(r1 / r2 < 5.2);

  SUBCASE("stationary state under a constant generator") {
    FormLinearHamiltonian Hc = constant_H(f, T);
    Trajectory traj = propagate_trajectory(Hc, psi0, 0.0, T, T / 64);
    // The evolution is an exact phase; the residual is the centered
    // difference error of that phase, about lambda^3 dt^2 / 6, and an
    // orthogonal probe sees zero.
    CHECK(weak_residual(Hc, traj, {psi0}, scale) < 1e-2);
    CHECK(weak_residual(Hc, traj, {probes[2]}, scale) < 1e-12);
  }
}
