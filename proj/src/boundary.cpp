#include "qgbc/boundary.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace qgbc {

namespace {
using cd = std::complex<double>;
constexpr double pi = 3.14159265358979323846;

// Angular distance of a unimodular z to -1.
double angle_from_minus_one(cd z) {
  return pi - std::abs(std::arg(z));  // arg in (-pi, pi]
}
}  // namespace

BoundaryUnitary quasi_delta_unitary(const BoundaryLayout& layout, const QuasiDeltaParams& params) {
  const int n = layout.size();
  BoundaryUnitary bu;
  bu.U = MatrixXcd::Zero(n, n);
  bu.P = MatrixXcd::Zero(n, n);
  bu.C = MatrixXcd::Zero(n, n);
  bu.gap = std::numeric_limits<double>::infinity();

  for (int p : layout.exterior_points) {
    bu.U(p, p) = -1.0;
    bu.P(p, p) = 1.0;
    if (params.chi.count(p)) fail(errc::param_mismatch, "chi given for exterior point");
  }

  for (size_t v = 0; v < layout.junction_points.size(); ++v) {
    const auto& pts = layout.junction_points[v];
    if (pts.empty()) continue;
    auto it = params.delta.find(static_cast<int>(v));
    if (it == params.delta.end()) fail(errc::param_mismatch, "missing delta for a junction vertex");
    const double delta = it->second;
    if (!(std::abs(delta) < pi - kDeltaMargin))
      fail(errc::param_mismatch, "delta too close to +-pi (gap closes)");

    const int k = static_cast<int>(pts.size());
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const cd pperp = std::polar(1.0 / k, params.chi_at(pts[a]) - params.chi_at(pts[b]));
        bu.U(pts[a], pts[b]) = (std::polar(1.0, delta) + 1.0) * pperp - (a == b ? 1.0 : 0.0);
        bu.P(pts[a], pts[b]) = (a == b ? 1.0 : 0.0) - pperp;
        bu.C(pts[a], pts[b]) = -std::tan(delta / 2.0) * pperp;
      }
    }
    bu.gap = std::min(bu.gap, pi - std::abs(delta));
  }
  return bu;
}

std::pair<MatrixXcd, double> eigenprojector_minus_one(const MatrixXcd& U) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(U);
  if (es.info() != Eigen::Success) fail(errc::eigensolve_fail, "unitary eigendecomposition");
  const int n = static_cast<int>(U.rows());

  // A unitary matrix has an orthonormal eigenbasis, but a generic dense
  // eigensolver does not orthonormalize within degenerate clusters. Build the
  // projector from an orthonormalized basis of the clustered eigenvectors.
  std::vector<int> in_cluster;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double a = angle_from_minus_one(es.eigenvalues()(i));
    if (a <= kClusterTol)
      in_cluster.push_back(i);
    else
      gap = std::min(gap, a);
  }
  if (gap < kGapThreshold) fail(errc::no_gap, "spectrum accumulates at -1");

  MatrixXcd P = MatrixXcd::Zero(n, n);
  if (!in_cluster.empty()) {
    MatrixXcd V(n, static_cast<int>(in_cluster.size()));
    for (size_t j = 0; j < in_cluster.size(); ++j) V.col(j) = es.eigenvectors().col(in_cluster[j]);
    Eigen::HouseholderQR<MatrixXcd> qr(V);
    MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(n, static_cast<int>(in_cluster.size()));
    P = Q * Q.adjoint();
  }
  return {P, gap};
}

MatrixXcd partial_cayley(const MatrixXcd& U) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(U);
  if (es.info() != Eigen::Success) fail(errc::eigensolve_fail, "unitary eigendecomposition");
  const int n = static_cast<int>(U.rows());

  std::vector<int> keep;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double a = angle_from_minus_one(es.eigenvalues()(i));
    if (a > kClusterTol) {
      keep.push_back(i);
      gap = std::min(gap, a);
    }
  }
  if (!keep.empty() && gap < kGapThreshold) fail(errc::no_gap, "spectrum accumulates at -1");

  // Eigenvectors of distinct eigenvalues of a unitary are orthogonal, but
  // within a degenerate eigenvalue the solver may return a skew basis.
  // Orthonormalize the kept block and apply -tan(theta/2) per vector, with
  // theta recomputed via the Rayleigh quotient (stable under the QR mixing
  // because mixing only happens within a degenerate eigenvalue).
  MatrixXcd C = MatrixXcd::Zero(n, n);
  if (keep.empty()) return C;
  MatrixXcd V(n, static_cast<int>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) V.col(j) = es.eigenvectors().col(keep[j]);
  Eigen::HouseholderQR<MatrixXcd> qr(V);
  MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(n, static_cast<int>(keep.size()));
  for (int j = 0; j < Q.cols(); ++j) {
    const cd lam = Q.col(j).dot(U * Q.col(j));  // dot conjugates the first factor
    const double theta = std::arg(lam);
    C += -std::tan(theta / 2.0) * (Q.col(j) * Q.col(j).adjoint());
  }
  return C;
}

BoundaryUnitary from_unitary(const MatrixXcd& U) {
  BoundaryUnitary bu;
  bu.U = U;
  auto [P, gap] = eigenprojector_minus_one(U);
  bu.P = P;
  bu.gap = gap;
  bu.C = partial_cayley(U);
  return bu;
}

BoundaryUnitary gauge_conjugate(const BoundaryUnitary& bu, const VectorXd& theta) {
  if (theta.size() != bu.U.rows()) fail(errc::param_mismatch, "phase vector size");
  Eigen::VectorXcd d(theta.size());
  for (int i = 0; i < theta.size(); ++i) d(i) = std::polar(1.0, theta(i));
  BoundaryUnitary out;
  out.U = d.asDiagonal() * bu.U * d.conjugate().asDiagonal();
  out.P = d.asDiagonal() * bu.P * d.conjugate().asDiagonal();
  out.C = d.asDiagonal() * bu.C * d.conjugate().asDiagonal();
  out.gap = bu.gap;
  return out;
}

}  // namespace qgbc
