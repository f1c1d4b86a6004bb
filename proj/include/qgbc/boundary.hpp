#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

#include "qgbc/graph.hpp"

namespace qgbc {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

// Parameters of a quasi-delta vertex coupling: one strength delta per
// junction vertex, one phase chi per junction boundary point. Exterior points
// carry no parameters (Dirichlet).
struct QuasiDeltaParams {
  std::map<int, double> delta;  // vertex index -> delta in (-pi, pi)
  std::map<int, double> chi;    // boundary point id -> chi in [0, 2pi)

  double chi_at(int point) const {
    auto it = chi.find(point);
    return it == chi.end() ? 0.0 : it->second;
  }
};

// Margin kept away from the gap-closing limit |delta| = pi.
inline constexpr double kDeltaMargin = 1e-3;
// Angular tolerance for clustering eigenvalues onto -1.
inline constexpr double kClusterTol = 1e-8;
// Below this gap the coupling is rejected as having no usable gap.
inline constexpr double kGapThreshold = 1e-6;

// A boundary unitary with its -1 eigenprojector and partial Cayley transform.
// All three act on boundary points in the layout's edge-major indexing.
struct BoundaryUnitary {
  MatrixXcd U;
  MatrixXcd P;  // orthogonal projector onto ker(U + 1)
  MatrixXcd C;  // Hermitian, C P = 0
  double gap = 0.0;  // angular distance of spectrum\{-1} to -1; +inf if empty
};

// Closed-form quasi-delta unitary: Dirichlet block -I on exterior points, and
// per junction (e^{i delta}+1) Pperp - I with Pperp_{pq} = e^{i(chi_p-chi_q)}/k.
BoundaryUnitary quasi_delta_unitary(const BoundaryLayout& layout, const QuasiDeltaParams& params);

// Spectral route: cluster eigenvalues of U at angle pi, return the projector
// onto the cluster and the angular gap of the rest. Throws NO_GAP when the
// remainder comes closer than kGapThreshold.
std::pair<MatrixXcd, double> eigenprojector_minus_one(const MatrixXcd& U);

// Spectral route: C = sum over eigenpairs (e^{i t}, w), t != pi, of
// -tan(t/2) w w^*.
MatrixXcd partial_cayley(const MatrixXcd& U);

// Builds the full spectral package for an arbitrary unitary (escape hatch).
BoundaryUnitary from_unitary(const MatrixXcd& U);

// Conjugation by a diagonal phase: e^{i theta} U e^{-i theta}, with P and C
// conjugated the same way. Gap is preserved exactly.
BoundaryUnitary gauge_conjugate(const BoundaryUnitary& bu, const VectorXd& theta);

}  // namespace qgbc
