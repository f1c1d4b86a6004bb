#pragma once

#include <functional>
#include <vector>

#include "qgbc/dynamics.hpp"

namespace qgbc {

// Composite Simpson over [a, b]; panels is rounded up to an even count.
double simpson(const std::function<double(double)>& f, double a, double b, int panels);

// Simpson with one refinement doubling; sets *converged to false when the
// doubling changes the value by more than 1e-8 (relative).
double simpson_checked(const std::function<double(double)>& f, double a, double b, int panels,
                       bool* converged);

// Measured constants of a family sharing structure space and mass matrix:
// m: common lower bound over the sampled grid,
// c: norm-equivalence constant against the anchor scale,
// M: sup over members of the summed per-piece L1 norms of the derivative
//    weight  t -> |dH/dt|_{+,-} (anchor scale).
struct AssumptionReport {
  double m = 0.0;
  double c = 1.0;
  double M = 0.0;
  HilbertScale anchor;      // scale at (n0, t0) with the common m
  bool quadrature_ok = true;
  int samples_per_piece = 5;
};

// Verifies the family's uniform bound, norm equivalence and derivative
// budget; anchors the scale at family[0] at its initial time. Throws
// A1_VIOLATION / A3_UNBOUNDED / A4_DIVERGENT.
AssumptionReport check_assumptions(const std::vector<FormLinearHamiltonian>& family,
                                   int samples_per_piece = 5, int simpson_panels = 64);

struct StabilityReport {
  int j = 0, k = 0;
  double s = 0.0, t = 0.0;
  double lhs = 0.0;            // |U_j(t,s) - U_k(t,s)|_{+,-}
  double rhs_integral = 0.0;   // int_s^t |H_j - H_k|_{+,-}
  double ratio = 0.0;          // lhs / rhs (0 when rhs = 0)
  double c = 1.0, m = 0.0, M = 0.0;
  std::vector<double> signal_l1;  // per-channel L1 distances of coefficients
  bool quadrature_ok = true;
};

// Propagates both members and measures both sides of the propagator
// difference bound in the given anchor scale.
StabilityReport stability_pair(const FormLinearHamiltonian& Hj, const FormLinearHamiltonian& Hk,
                               double s, double t, const HilbertScale& anchor, double dt,
                               int simpson_panels = 64);

struct SweepRow {
  int n = 0;
  double l1_u = 0.0;        // |u_n - u_0|_L1
  double l1_u2 = 0.0;       // |u_n^2 - u_0^2|_L1
  double bound_u = 0.0;     // r T^2 / n
  double bound_u2 = 0.0;    // u_0 r T^2 / n + r^2 T^3 / n^2
  double propagator_diff = 0.0;  // |U_n - U_0|_{+,-}
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_slope = 0.0;   // log-log slope of propagator_diff vs n
  double ratio_max = 0.0;      // max over rows of diff / (l1_u + l1_u2)
};

struct SweepMember {
  FormLinearHamiltonian H;
  CoefficientSignal u;  // the lifted schedule (for the L1 columns)
};

// Runs the resetting-schedule convergence sweep against a base member with
// schedule u0. `build` produces the n-th member. Rows are independent and run
// on `threads` workers; the row order of the result is fixed by n_list.
SweepResult convergence_sweep(const FormLinearHamiltonian& H0, const CoefficientSignal& u0,
                              double r, const std::vector<int>& n_list,
                              const std::function<SweepMember(int)>& build,
                              const HilbertScale& anchor, double dt, int threads = 1);

struct StrongConvergenceRow {
  int n = 0;
  double opnorm = 0.0;                 // |U_n - U_0|_{+,-}
  std::vector<double> probe_distance;  // |(U_n - U_0) psi| per probe
};

std::vector<StrongConvergenceRow> strong_convergence_check(
    const std::vector<std::pair<int, MatrixXcd>>& Un_seq, const MatrixXcd& U0,
    const std::vector<VectorXcd>& probes, const HilbertScale& anchor);

}  // namespace qgbc
