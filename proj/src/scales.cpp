#include "qgbc/scales.hpp"

#include <cmath>

namespace qgbc {

namespace {
double herm_quad(const MatrixXcd& G, const VectorXcd& x) {
  return std::real(x.dot(G * x));  // dot conjugates the first factor
}
}  // namespace

HilbertScale::HilbertScale(MatrixXcd A0, MatrixXcd Mr) : A0_(std::move(A0)), Mr_(std::move(Mr)) {
  Eigenpairs ep = dense_geig(A0_, Mr_);
  if (ep.values(0) <= 0.0) fail(errc::not_positive, "reference operator is not positive definite");
  W_ = ep.vectors;
  lam_ = ep.values;
  Gm_ = Mr_ * W_ * lam_.cwiseInverse().asDiagonal() * W_.adjoint() * Mr_;
  Gm_ = (0.5 * (Gm_ + Gm_.adjoint())).eval();
}

double HilbertScale::norm(const VectorXcd& x) const { return std::sqrt(std::max(0.0, herm_quad(Mr_, x))); }
double HilbertScale::norm_plus(const VectorXcd& x) const { return std::sqrt(std::max(0.0, herm_quad(A0_, x))); }
double HilbertScale::norm_minus(const VectorXcd& x) const { return std::sqrt(std::max(0.0, herm_quad(Gm_, x))); }

VectorXcd HilbertScale::apply_half_plus(const VectorXcd& x) const {
  return W_ * (lam_.cwiseSqrt().asDiagonal() * (W_.adjoint() * (Mr_ * x)));
}

VectorXcd HilbertScale::apply_half_minus(const VectorXcd& x) const {
  return W_ * (lam_.cwiseSqrt().cwiseInverse().asDiagonal() * (W_.adjoint() * (Mr_ * x)));
}

double HilbertScale::opnorm_plus_minus(const MatrixXcd& T) const {
  if (T.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigenpairs ep = dense_geig(T, A0_);
  return std::max(std::abs(ep.values(0)), std::abs(ep.values(ep.values.size() - 1)));
}

double HilbertScale::opnorm_minus_plus_form(const MatrixXcd& G) const {
  if (G.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigenpairs ep = dense_geig(G, Gm_);
  return std::max(std::abs(ep.values(0)), std::abs(ep.values(ep.values.size() - 1)));
}

double HilbertScale::opnorm_plus_minus_map(const MatrixXcd& T) const {
  if (T.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  MatrixXcd G = T.adjoint() * Gm_ * T;
  G = (0.5 * (G + G.adjoint())).eval();
  Eigenpairs ep = dense_geig(G, A0_);
  return std::sqrt(std::max(0.0, ep.values(ep.values.size() - 1)));
}

HilbertScale make_scale(const ReducedOperator& op, double m) {
  MatrixXcd A0 = op.H + (m + 1.0) * op.Mr;
  return HilbertScale(std::move(A0), op.Mr);
}

double scale_equivalence(const HilbertScale& s1, const HilbertScale& s2) {
  Eigenpairs a = dense_geig(s1.gram_plus(), s2.gram_plus());
  Eigenpairs b = dense_geig(s2.gram_plus(), s1.gram_plus());
  const double l1 = a.values(a.values.size() - 1);
  const double l2 = b.values(b.values.size() - 1);
  return std::sqrt(std::max({l1, l2, 1.0}));
}

}  // namespace qgbc
