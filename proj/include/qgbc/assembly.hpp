#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qgbc/boundary.hpp"
#include "qgbc/graph.hpp"

namespace qgbc {

using Eigen::MatrixXd;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using SparseCd = Eigen::SparseMatrix<std::complex<double>>;

// Smooth per-edge profile evaluated in the edge coordinate x in [0, length].
using EdgeProfile = std::function<double(int edge, double x)>;

inline EdgeProfile zero_profile() {
  return [](int, double) { return 0.0; };
}

// Uniform per-edge P1 mesh. Junction endpoints keep one DOF per incident
// edge; couplings are imposed only through the boundary constraint, never by
// node identification.
struct Mesh {
  struct EdgeMesh {
    int elements = 0;
    double h = 0.0;
    int node_offset = 0;  // nodes of edge e are [offset, offset + elements]
  };
  std::vector<EdgeMesh> edge;
  int nodes = 0;
  std::vector<int> boundary_node;  // boundary point id -> global node

  double coord(int e, int local) const { return edge[e].h * local; }
  int node(int e, int local) const { return edge[e].node_offset + local; }
};

Mesh make_mesh(const MetricGraph& g, double h);

// Discrete pieces of the quadratic form: mass M, kinetic K, magnetic cross
// term S1 (coefficient u), magnetic square term S2 (coefficient u^2), scalar
// potential V (coefficient v), vertex coupling B (the -C term on boundary
// nodes), and the constraint reduction R whose columns span
// {P phi = 0, phi|_ext = 0} on boundary DOFs and the identity on the rest.
struct FormMatrices {
  SparseCd M, K, S1, S2, V, B;
  SparseCd R;  // nodes x reduced, orthonormal columns
  int nodes = 0;
  int reduced = 0;
};

FormMatrices assemble(const MetricGraph& g, const Mesh& mesh, const BoundaryUnitary& bc,
                      const EdgeProfile& vector_potential, const EdgeProfile& scalar_potential);

struct Eigenpairs {
  Eigen::VectorXd values;  // ascending
  MatrixXcd vectors;       // Mr-orthonormal columns
};

// Reduced Hermitian operator H = R*(K + u S1 + u^2 S2 + B + v V)R with its
// reduced mass and the lower bound m = max(0, -lambda_min(H, Mr)). The full
// generalized eigendecomposition is computed once and cached.
struct ReducedOperator {
  MatrixXcd H;
  MatrixXcd Mr;
  double m = 0.0;
  bool real_valued = false;

  const Eigenpairs& eig() const;

 private:
  mutable std::shared_ptr<Eigenpairs> cache_;
};

ReducedOperator reduce(const FormMatrices& fm, double u, double v);

double lower_bound(const ReducedOperator& op);

// First k eigenpairs of (H, Mr), ascending, Mr-orthonormal vectors.
Eigenpairs spectrum(const ReducedOperator& op, int k);

// Full generalized eigendecomposition (A, B) with B positive definite,
// dispatching to the real solver when both matrices are real.
Eigenpairs dense_geig(const MatrixXcd& A, const MatrixXcd& B);

}  // namespace qgbc
