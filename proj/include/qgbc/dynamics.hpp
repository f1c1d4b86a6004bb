#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qgbc/scales.hpp"
#include "qgbc/signals.hpp"

namespace qgbc {

// H(t) = H0 + sum_i f_i(t) Hi on a reduced space with mass Mr. All structure
// matrices are Hermitian; m is a uniform lower bound of (H(t), Mr) over the
// domain (checked on a grid by stability::check_assumptions).
struct FormLinearHamiltonian {
  MatrixXcd H0;
  std::vector<MatrixXcd> Hi;
  std::vector<CoefficientSignal> f;
  MatrixXcd Mr;
  double m = 0.0;

  int dim() const { return static_cast<int>(H0.rows()); }
  double t_begin() const;
  double t_end() const;
  std::vector<double> breakpoints() const;  // merged over all signals

  MatrixXcd eval(double t) const;  // OUT_OF_DOMAIN outside the common domain

  // dH/dt = sum f_i'(t) Hi together with the instantaneous derivative weight
  // C(t) = max |lambda| of the pencil (dH/dt, H(t) + (m+1) Mr). Throws
  // AT_BREAKPOINT on interior breakpoints.
  struct DerivativeInfo {
    MatrixXcd dH;
    double C = 0.0;
  };
  DerivativeInfo eval_derivative(double t) const;
  // Same, but evaluated one-sidedly inside the piece containing t (used by
  // quadrature routines that never sample exactly at breakpoints).
  DerivativeInfo eval_derivative_inside(double t) const;
};

// Two-parameter discrete propagator: an Mr-unitary matrix with a step log.
struct Propagator {
  MatrixXcd U;
  double s = 0.0, t = 0.0;
  struct Step {
    double from, to;
    std::string method;
  };
  std::vector<Step> log;
};

// Exact stepping for piecewise-constant coefficients: spectral exponentials
// exp(-i tau inv(Mr) H_piece) multiplied across pieces.
Propagator propagate_piecewise_constant(const FormLinearHamiltonian& H, double s, double t);

// Exponential midpoint stepping with steps aligned to signal breakpoints;
// globally second order, exactly Mr-unitary per step.
Propagator propagate_smooth(const FormLinearHamiltonian& H, double s, double t, double dt);

// Mr-unitary exponential exp(-i tau inv(Mr) A) via the generalized
// eigendecomposition of (A, Mr).
MatrixXcd unitary_exponential(const MatrixXcd& A, const MatrixXcd& Mr, double tau);

// Applies the same exponential to one state without forming the matrix
// (one eigendecomposition plus three matrix-vector products).
VectorXcd unitary_exponential_apply(const MatrixXcd& A, const MatrixXcd& Mr, double tau,
                                    const VectorXcd& psi);

// Stored trajectory on a uniform time grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXcd> states;
};

Trajectory propagate_trajectory(const FormLinearHamiltonian& H, const VectorXcd& psi0, double s,
                                double t, double dt, int dump_every = 1);

// Max over probes and interior grid times of
// |centered-difference d/dt <probe, psi> + i probe* H(t) psi| / |probe|_+,
// the weak-equation residual in the scale anchored at `scale`.
double weak_residual(const FormLinearHamiltonian& H, const Trajectory& traj,
                     const std::vector<VectorXcd>& probes, const HilbertScale& scale);

}  // namespace qgbc
