#pragma once

#include <vector>

#include "qgbc/errors.hpp"

namespace qgbc {

// Dense polynomial p(t) = sum c_k t^k with exact arithmetic helpers used by
// the L1 routines (products up to degree 6 appear when squaring cubics).
struct Poly {
  std::vector<double> c;  // c[k] multiplies t^k; empty = zero

  double operator()(double t) const;
  Poly derivative() const;
  Poly antiderivative() const;
  int degree() const { return c.empty() ? -1 : static_cast<int>(c.size()) - 1; }

  static Poly constant(double v) { return Poly{{v}}; }
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);

  // Real roots inside (lo, hi), ascending (companion-matrix based).
  std::vector<double> roots_in(double lo, double hi) const;
  // Exact integral of |p| over [lo, hi] by splitting at sign changes.
  double integral_abs(double lo, double hi) const;
  double integral(double lo, double hi) const;
};

enum class signal_class { c0_piecewise, c1, c2 };

// Piecewise polynomial signal of degree <= 3 in absolute time. Pieces may be
// discontinuous across breakpoints (the derivative is defined a.e.).
class CoefficientSignal {
 public:
  CoefficientSignal() = default;
  // breaks.size() == pieces.size() + 1; piece j is valid on
  // [breaks[j], breaks[j+1]] with polynomials given in absolute time.
  CoefficientSignal(std::vector<double> breaks, std::vector<Poly> pieces);

  static CoefficientSignal constant(double v, double t0, double t1);
  static CoefficientSignal piecewise_constant(const std::vector<double>& breaks,
                                              const std::vector<double>& values);
  // Piecewise linear through (times[i], values[i]) (continuous).
  static CoefficientSignal piecewise_linear(const std::vector<double>& times,
                                            const std::vector<double>& values);

  double t_begin() const { return breaks_.front(); }
  double t_end() const { return breaks_.back(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<Poly>& pieces() const { return pieces_; }
  signal_class classify() const { return class_; }
  bool is_piecewise_constant() const;

  double operator()(double t) const;
  // Derivative at t; throws AT_BREAKPOINT exactly on interior breakpoints.
  double derivative(double t) const;
  // One-sided value of the derivative inside the piece containing t
  // (breakpoints resolved to the right except at t_end).
  double derivative_inside(double t) const;

  int piece_index(double t) const;  // breakpoints resolve to the right

  // Exact L1 norms over [a, b] within the common domain.
  double l1_distance(const CoefficientSignal& other, double a, double b) const;
  double l1_distance_squares(const CoefficientSignal& other, double a, double b) const;
  double l1_derivative(double a, double b) const;  // sum over pieces of int |f'|
  double max_abs() const;                          // sup |f| over the domain

 private:
  std::vector<double> breaks_;
  std::vector<Poly> pieces_;
  signal_class class_ = signal_class::c0_piecewise;

  void classify_continuity();
};

// Merged, sorted breakpoints of several signals restricted to [a, b].
std::vector<double> merged_breakpoints(const std::vector<const CoefficientSignal*>& sigs, double a,
                                       double b);

}  // namespace qgbc
