#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qgbc/stability.hpp"

namespace qgbc {

// Per-edge scalar profile interpolating prescribed boundary-point values with
// a quintic smoothstep (flat to second order at both endpoints), and its
// derivative used as the vector potential.
struct ThetaProfile {
  std::vector<std::pair<double, double>> endpoint_values;  // per edge (tail, head)
  std::vector<double> lengths;

  double theta(int e, double x) const;
  double slope(int e, double x) const;  // d theta / dx
  EdgeProfile theta_fn() const;
  EdgeProfile potential_fn() const;
  // Boundary trace: value at each boundary point, edge-major indexing.
  Eigen::VectorXd boundary_trace() const;
};

// chi_bar maps boundary point id -> phase; unlisted junction points and all
// exterior points sit at 0.
ThetaProfile theta_profile(const MetricGraph& g, const BoundaryLayout& layout,
                           const std::map<int, double>& chi_bar);

// Magnetic control system at fixed delta-type coupling (chi = 0): structure
// matrices of H(t) = K~ + u S1 + u^2 S2 + u' V with a piecewise-linear
// schedule u bounded by |u'| <= r almost everywhere.
struct InductionSystem {
  MetricGraph g;
  Mesh mesh;
  BoundaryLayout layout;
  BoundaryUnitary bc;  // chi = 0 couplings
  ThetaProfile profile;
  FormMatrices fm;
  MatrixXcd K0;  // reduced K + B
  MatrixXcd S1r, S2r, Vr, Mr;
  CoefficientSignal u;  // schedule; may be empty until set
  double r = 0.0;
  double m = 0.0;  // uniform family bound; set by callers via family_lower_bound

  int dim() const { return static_cast<int>(K0.rows()); }

  // H(t) with channels (u, u^2, u') for the stored schedule.
  FormLinearHamiltonian hamiltonian() const;
  FormLinearHamiltonian hamiltonian_for(const CoefficientSignal& schedule) const;

  // Frozen operator K~ + u S1 + u^2 S2 (+ v V) as a ReducedOperator.
  ReducedOperator frozen(double uval, double vval = 0.0) const;

  // Nodal gauge phases e^{-i c theta(x_j)} over all mesh nodes.
  VectorXcd gauge_phase_nodes(double c) const;
  // The same phases compressed onto reduced coordinates is not diagonal; use
  // nodal form: boundary-frame nodal values = conj(phases) .* (R x).
  VectorXcd pull_back_nodal(const VectorXcd& reduced_state, double c) const;
};

// Builds the system: couplings U(chi=0, delta), quintic profile from chi_bar,
// one shared assembly.
InductionSystem build_induction(const MetricGraph& g, const std::map<std::string, double>& delta,
                                const std::map<int, double>& chi_bar, double r, double mesh_h);

// Uniform lower bound of the frozen family over the coefficient box
// [umin, umax] x [vmin, vmax], sampled at a grid including the corners.
double family_lower_bound(const InductionSystem& sys, double umin, double umax, double vmin,
                          double vmax, int samples = 5);

// Diagonal of the gauge map J(t) on mesh nodes for the stored schedule.
VectorXcd gauge_map(const InductionSystem& sys, double t);

// Controllability-hypothesis report for H0 (frozen) and a coupling form H1.
struct ChambrionReport {
  std::vector<double> gaps;       // lambda_{n+1} - lambda_n, n < k
  std::vector<double> couplings;  // |<phi_{n+1}, H1 phi_n>|
  double min_coupling = 0.0;
  bool couplings_nonzero = false;
  bool rational_dependence_suspected = false;
  std::vector<int> relation;  // integer relation on the gaps, if one was found
};

ChambrionReport chambrion_report(const ReducedOperator& H0, const MatrixXcd& H1, int k, double tol);

struct SearchOptions {
  int pieces = 24;
  int levels = 9;       // amplitude grid size
  int restarts = 4;
  long budget = 200000;  // fidelity evaluations
  std::uint64_t seed = 1;
  bool positive_only = false;  // restrict v to (0, r)
  int max_sweeps = 40;
};

struct SearchTrace {
  std::vector<double> best_fidelity;  // nondecreasing
  long evaluations = 0;
  bool budget_exhausted = false;
};

struct PiecewiseControlResult {
  CoefficientSignal v;
  double fidelity = 0.0;
  SearchTrace trace;
};

// Coordinate descent with random restarts over piecewise-constant amplitudes
// on a fixed grid, maximizing |<psiT, psi(T)>| for the auxiliary generator
// H0 + v(t) V in the mass geometry Mr.
PiecewiseControlResult synthesize_piecewise_control(const MatrixXcd& H0, const MatrixXcd& V,
                                                    const MatrixXcd& Mr, const VectorXcd& psi0,
                                                    const VectorXcd& psiT, double r, double T,
                                                    const SearchOptions& opts);

// Resetting lift: within each interval of the coarsest refinement of the
// n-part uniform partition by v's breakpoints, u ramps from u0 with slope v
// and resets to u0 at interval starts.
CoefficientSignal lift_to_induction(const CoefficientSignal& v, double u0, int n);

// Prepends a hold at u0 of duration q and appends a hold at u1 of duration p
// (zero-slope pieces); the result is rebased to start at the original start.
CoefficientSignal endpoint_match(const CoefficientSignal& schedule, double u0, double u1, double q,
                                 double p);

// |(exp(-i H duration) - I) psi|_- for a frozen generator.
double hold_penalty(const ReducedOperator& H, const VectorXcd& psi, double duration,
                    const HilbertScale& scale);

// Boundary control with chi(t) = c(t) chi_bar and fixed delta, realized in
// the gauge frame of the induction system.
struct BoundaryControlSystem {
  InductionSystem induction;
  std::map<int, double> chi_bar;
  double u0 = 0.0, u1 = 0.0;
};

struct ControlResult {
  CoefficientSignal schedule;
  VectorXcd final_state_reduced;  // induction frame
  VectorXcd final_state_nodal;    // boundary frame nodal values
  double fidelity = 0.0;
  double weak_distance = 0.0;    // minus norm, after optimal global-phase alignment
  double strong_distance = 0.0;  // mass norm, same alignment
  double weak_distance_free = 0.0;  // weak metric under free evolution
  SearchTrace trace;
  double gauge_consistency = 0.0;  // max nodal deviation between the two runs
  bool epsilon_met = false;        // weak_distance < requested epsilon
};

ControlResult boundary_control_run(const BoundaryControlSystem& bcs, const VectorXcd& psi0,
                                   const VectorXcd& psiT, double epsilon, double T, int sawtooth_n,
                                   double hold_q, double hold_p, double dt,
                                   const SearchOptions& opts);

}  // namespace qgbc
