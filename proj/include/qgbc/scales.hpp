#pragma once

#include <Eigen/Dense>

#include "qgbc/assembly.hpp"

namespace qgbc {

// Discrete scale of spaces built from a reference operator A0 = H + (m+1) Mr.
// Conventions, with W the Mr-orthonormal eigenbasis (A0 W = Mr W diag(lam)):
//   plus norm   |x|+^2 = x* A0 x            (Gram Gp = A0 = Mr W L W* Mr)
//   minus norm  |x|-^2 = x* (Mr A0^-1 Mr) x (Gram Gm = Mr W L^-1 W* Mr)
// so the duality bound |x* Mr y| <= |x|- |y|+ is an exact Cauchy-Schwarz.
// The operator A acting on coefficient vectors is inv(Mr) A0.
class HilbertScale {
 public:
  HilbertScale() = default;
  HilbertScale(MatrixXcd A0, MatrixXcd Mr);

  const MatrixXcd& gram_plus() const { return A0_; }
  const MatrixXcd& gram_minus() const { return Gm_; }
  const MatrixXcd& mass() const { return Mr_; }
  const Eigen::VectorXd& eigenvalues() const { return lam_; }

  double norm(const VectorXcd& x) const;
  double norm_plus(const VectorXcd& x) const;
  double norm_minus(const VectorXcd& x) const;

  // Coefficient maps of A^{+1/2} and A^{-1/2}; their composition is the
  // identity to eigensolver accuracy.
  VectorXcd apply_half_plus(const VectorXcd& x) const;
  VectorXcd apply_half_minus(const VectorXcd& x) const;

  // Norm of a Hermitian form matrix T as an operator H+ -> H-:
  // sup |x* T y| / (|x|+ |y|+) = max |lambda| of the pencil (T, A0).
  double opnorm_plus_minus(const MatrixXcd& T) const;

  // Norm of an operator H- -> H+ given through its pairing (form) matrix G,
  // G = Mr S Mr for a coefficient map S: max |lambda| of (G, Gm).
  double opnorm_minus_plus_form(const MatrixXcd& G) const;

  // Norm of a coefficient-map operator T (e.g. a difference of propagators)
  // as an operator H+ -> H-: sqrt(lambda_max(T* Gm T, A0)).
  double opnorm_plus_minus_map(const MatrixXcd& T) const;

  // Pairing (form) matrix of the inverse operator A^-1: Mr A0^-1 Mr = Gm.
  const MatrixXcd& inverse_form() const { return Gm_; }

 private:
  MatrixXcd A0_, Mr_, Gm_;
  MatrixXcd W_;            // Mr-orthonormal eigenvectors
  Eigen::VectorXd lam_;    // ascending, all > 0
};

// Scale anchored at op with shift m+1: A0 = H + (m+1) Mr. Throws NOT_POSITIVE
// when the shifted pencil is not positive definite.
HilbertScale make_scale(const ReducedOperator& op, double m);

// Smallest c >= 1 with c^-1 |.|_{s2} <= |.|_{s1} <= c |.|_{s2} on the plus
// norms (and, by duality, the minus norms): max(sqrt(lmax(A1,A2)),
// sqrt(lmax(A2,A1))).
double scale_equivalence(const HilbertScale& s1, const HilbertScale& s2);

}  // namespace qgbc
