#include "qgbc/assembly.hpp"

#include <cmath>
#include <complex>

namespace qgbc {

namespace {
using cd = std::complex<double>;
using Triplet = Eigen::Triplet<cd>;

// 3-point Gauss on [0,1] (degree 5): enough for O(h^2) eigenvalue accuracy of
// the profile terms; M and K integrands are polynomial of degree <= 2 and are
// integrated exactly. All bulk matrices share this rule so that algebraic
// identities between them (positivity of the magnetic square, gauge pairing)
// hold to roundoff rather than to quadrature error.
constexpr double kGaussX[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kGaussW[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
}  // namespace

Mesh make_mesh(const MetricGraph& g, double h) {
  if (!(h > 0.0)) fail(errc::config_invalid, "mesh size must be positive");
  Mesh m;
  m.edge.resize(g.edges.size());
  int offset = 0;
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const double target = (g.edges[e].mesh_hint > 0.0) ? std::min(h, g.edges[e].mesh_hint) : h;
    int n = static_cast<int>(std::ceil(g.edges[e].length / target));
    n = std::max(n, 4);
    m.edge[e].elements = n;
    m.edge[e].h = g.edges[e].length / n;
    m.edge[e].node_offset = offset;
    offset += n + 1;
  }
  m.nodes = offset;
  m.boundary_node.resize(2 * g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    m.boundary_node[BoundaryLayout::point_id(static_cast<int>(e), endpoint::tail)] =
        m.node(static_cast<int>(e), 0);
    m.boundary_node[BoundaryLayout::point_id(static_cast<int>(e), endpoint::head)] =
        m.node(static_cast<int>(e), m.edge[e].elements);
  }
  return m;
}

FormMatrices assemble(const MetricGraph& g, const Mesh& mesh, const BoundaryUnitary& bc,
                      const EdgeProfile& vector_potential, const EdgeProfile& scalar_potential) {
  const int n = mesh.nodes;
  const int nb = static_cast<int>(mesh.boundary_node.size());
  if (bc.U.rows() != nb) fail(errc::mesh_bc_mismatch, "boundary unitary size vs mesh boundary points");

  std::vector<Triplet> tM, tK, tS1, tS2, tV;
  tM.reserve(4 * n);
  tK.reserve(4 * n);

  for (size_t e = 0; e < g.edges.size(); ++e) {
    const int ne = mesh.edge[e].elements;
    const double h = mesh.edge[e].h;
    for (int el = 0; el < ne; ++el) {
      const double x0 = el * h;
      const int i0 = mesh.node(static_cast<int>(e), el);
      const int idx[2] = {i0, i0 + 1};
      const double Me[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
      const double Ke[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
      double S1e[2][2] = {{0, 0}, {0, 0}};  // real antisymmetric factor of S1 = i * (.)
      double S2e[2][2] = {{0, 0}, {0, 0}};
      double Ve[2][2] = {{0, 0}, {0, 0}};
      for (int q = 0; q < 3; ++q) {
        const double xi = kGaussX[q];
        const double w = kGaussW[q] * h;
        const double x = x0 + xi * h;
        const double a = vector_potential(static_cast<int>(e), x);
        const double th = scalar_potential(static_cast<int>(e), x);
        const double phi[2] = {1.0 - xi, xi};
        const double dphi[2] = {-1.0 / h, 1.0 / h};
        for (int p = 0; p < 2; ++p)
          for (int r = 0; r < 2; ++r) {
            S2e[p][r] += w * a * a * phi[p] * phi[r];
            Ve[p][r] += w * th * phi[p] * phi[r];
            // s1(f, g) = i * int a (f' g - f g')
            S1e[p][r] += w * a * (dphi[p] * phi[r] - phi[p] * dphi[r]);
          }
      }
      for (int p = 0; p < 2; ++p)
        for (int r = 0; r < 2; ++r) {
          tM.emplace_back(idx[p], idx[r], Me[p][r]);
          tK.emplace_back(idx[p], idx[r], Ke[p][r]);
          if (S2e[p][r] != 0.0) tS2.emplace_back(idx[p], idx[r], S2e[p][r]);
          if (Ve[p][r] != 0.0) tV.emplace_back(idx[p], idx[r], Ve[p][r]);
          if (S1e[p][r] != 0.0) tS1.emplace_back(idx[p], idx[r], cd(0.0, S1e[p][r]));
        }
    }
  }

  FormMatrices fm;
  fm.nodes = n;
  auto build = [&](std::vector<Triplet>& t) {
    SparseCd s(n, n);
    s.setFromTriplets(t.begin(), t.end());
    return s;
  };
  fm.M = build(tM);
  fm.K = build(tK);
  fm.S1 = build(tS1);
  fm.S2 = build(tS2);
  fm.V = build(tV);

  // Vertex coupling: the form -<phi, C psi> lifted to boundary nodes.
  std::vector<Triplet> tB;
  for (int p = 0; p < nb; ++p)
    for (int q = 0; q < nb; ++q)
      if (bc.C(p, q) != cd(0.0)) tB.emplace_back(mesh.boundary_node[p], mesh.boundary_node[q], -bc.C(p, q));
  fm.B = SparseCd(n, n);
  fm.B.setFromTriplets(tB.begin(), tB.end());

  // Constraint rows: P phi = 0 together with explicit Dirichlet rows on the
  // exterior points (redundant for the quasi-delta family, where P already
  // contains them, but required for escape-hatch unitaries).
  const BoundaryLayout layout = boundary_index(g);
  MatrixXcd rows(nb + static_cast<int>(layout.exterior_points.size()), nb);
  rows.topRows(nb) = bc.P;
  rows.bottomRows(static_cast<int>(layout.exterior_points.size())).setZero();
  for (size_t i = 0; i < layout.exterior_points.size(); ++i)
    rows(nb + static_cast<int>(i), layout.exterior_points[i]) = 1.0;

  Eigen::JacobiSVD<MatrixXcd> svd(rows, Eigen::ComputeFullV);
  const double tol = 1e-10 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 1.0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  MatrixXcd kernel = svd.matrixV().rightCols(nb - rank);  // orthonormal columns

  const int nred = (n - nb) + static_cast<int>(kernel.cols());
  std::vector<Triplet> tR;
  std::vector<bool> is_boundary(n, false);
  for (int p = 0; p < nb; ++p) is_boundary[mesh.boundary_node[p]] = true;
  int col = 0;
  for (int i = 0; i < n; ++i)
    if (!is_boundary[i]) tR.emplace_back(i, col++, 1.0);
  for (int j = 0; j < kernel.cols(); ++j, ++col)
    for (int p = 0; p < nb; ++p)
      if (std::abs(kernel(p, j)) > 1e-300) tR.emplace_back(mesh.boundary_node[p], col, kernel(p, j));
  fm.R = SparseCd(n, nred);
  fm.R.setFromTriplets(tR.begin(), tR.end());
  fm.reduced = nred;
  return fm;
}

const Eigenpairs& ReducedOperator::eig() const {
  if (!cache_) cache_ = std::make_shared<Eigenpairs>(dense_geig(H, Mr));
  return *cache_;
}

ReducedOperator reduce(const FormMatrices& fm, double u, double v) {
  SparseCd Hfull = fm.K + fm.B;
  if (u != 0.0) Hfull = (Hfull + cd(u) * fm.S1 + cd(u * u) * fm.S2).eval();
  if (v != 0.0) Hfull = (Hfull + cd(v) * fm.V).eval();

  ReducedOperator op;
  op.H = MatrixXcd(fm.R.adjoint() * Hfull * fm.R);
  op.H = (0.5 * (op.H + op.H.adjoint())).eval();
  op.Mr = MatrixXcd(fm.R.adjoint() * fm.M * fm.R);
  op.Mr = (0.5 * (op.Mr + op.Mr.adjoint())).eval();
  op.real_valued =
      op.H.imag().cwiseAbs().maxCoeff() == 0.0 && op.Mr.imag().cwiseAbs().maxCoeff() == 0.0;
  op.m = lower_bound(op);
  return op;
}

Eigenpairs dense_geig(const MatrixXcd& A, const MatrixXcd& B) {
  const bool realcase =
      A.imag().cwiseAbs().maxCoeff() == 0.0 && B.imag().cwiseAbs().maxCoeff() == 0.0;
  Eigenpairs out;
  if (realcase) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(A.real(), B.real());
    if (es.info() != Eigen::Success) fail(errc::eigensolve_fail, "generalized eigensolve (real)");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cd>();
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(A, B);
    if (es.info() != Eigen::Success) fail(errc::eigensolve_fail, "generalized eigensolve (complex)");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

double lower_bound(const ReducedOperator& op) { return std::max(0.0, -op.eig().values(0)); }

Eigenpairs spectrum(const ReducedOperator& op, int k) {
  if (k < 0 || k > op.H.rows()) fail(errc::config_invalid, "eigenpair count out of range");
  const Eigenpairs& full = op.eig();
  Eigenpairs out;
  out.values = full.values.head(k);
  out.vectors = full.vectors.leftCols(k);
  return out;
}

}  // namespace qgbc
