#include "qgbc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

namespace qgbc {

double Poly::operator()(double t) const {
  double acc = 0.0;
  for (size_t k = c.size(); k-- > 0;) acc = acc * t + c[k];
  return acc;
}

Poly Poly::derivative() const {
  Poly d;
  if (c.size() <= 1) return d;
  d.c.resize(c.size() - 1);
  for (size_t k = 1; k < c.size(); ++k) d.c[k - 1] = c[k] * static_cast<double>(k);
  return d;
}

Poly Poly::antiderivative() const {
  Poly a;
  a.c.assign(c.size() + 1, 0.0);
  for (size_t k = 0; k < c.size(); ++k) a.c[k + 1] = c[k] / static_cast<double>(k + 1);
  return a;
}

Poly operator+(const Poly& a, const Poly& b) {
  Poly r;
  r.c.assign(std::max(a.c.size(), b.c.size()), 0.0);
  for (size_t k = 0; k < a.c.size(); ++k) r.c[k] += a.c[k];
  for (size_t k = 0; k < b.c.size(); ++k) r.c[k] += b.c[k];
  return r;
}

Poly operator-(const Poly& a, const Poly& b) {
  Poly nb = b;
  for (auto& x : nb.c) x = -x;
  return a + nb;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r;
  if (a.c.empty() || b.c.empty()) return r;
  r.c.assign(a.c.size() + b.c.size() - 1, 0.0);
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

std::vector<double> Poly::roots_in(double lo, double hi) const {
  std::vector<double> cs = c;
  while (!cs.empty() && cs.back() == 0.0) cs.pop_back();
  std::vector<double> out;
  if (cs.size() <= 1) return out;  // constant: no isolated roots
  const int n = static_cast<int>(cs.size()) - 1;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -cs[i] / cs[n];
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
  for (int i = 0; i < n; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) < 1e-10 * (1.0 + std::abs(z.real()))) {
      const double r = z.real();
      if (r > lo && r < hi) out.push_back(r);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double Poly::integral(double lo, double hi) const {
  Poly a = antiderivative();
  return a(hi) - a(lo);
}

double Poly::integral_abs(double lo, double hi) const {
  std::vector<double> cuts = roots_in(lo, hi);
  cuts.insert(cuts.begin(), lo);
  cuts.push_back(hi);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double part = integral(cuts[i], cuts[i + 1]);
    acc += std::abs(part);
  }
  return acc;
}

CoefficientSignal::CoefficientSignal(std::vector<double> breaks, std::vector<Poly> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (breaks_.size() != pieces_.size() + 1 || pieces_.empty())
    fail(errc::config_invalid, "signal needs pieces.size()+1 breakpoints");
  for (size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i] < breaks_[i + 1])) fail(errc::config_invalid, "signal breakpoints must increase");
  for (const auto& p : pieces_) {
    if (p.degree() > 3) fail(errc::config_invalid, "signal pieces must have degree <= 3");
    for (double v : p.c)
      if (!std::isfinite(v)) fail(errc::config_invalid, "signal coefficients must be finite");
  }
  classify_continuity();
}

void CoefficientSignal::classify_continuity() {
  const double scale = std::max(1.0, max_abs());
  auto worst_jump = [&](int deriv) {
    double worst = 0.0;
    for (size_t j = 0; j + 1 < pieces_.size(); ++j) {
      Poly a = pieces_[j], b = pieces_[j + 1];
      for (int d = 0; d < deriv; ++d) {
        a = a.derivative();
        b = b.derivative();
      }
      worst = std::max(worst, std::abs(a(breaks_[j + 1]) - b(breaks_[j + 1])));
    }
    return worst;
  };
  const double tol = 1e-12 * scale;
  if (worst_jump(0) > tol || worst_jump(1) > tol)
    class_ = signal_class::c0_piecewise;
  else if (worst_jump(2) > tol)
    class_ = signal_class::c1;
  else
    class_ = signal_class::c2;
}

CoefficientSignal CoefficientSignal::constant(double v, double t0, double t1) {
  return CoefficientSignal({t0, t1}, {Poly::constant(v)});
}

CoefficientSignal CoefficientSignal::piecewise_constant(const std::vector<double>& breaks,
                                                        const std::vector<double>& values) {
  std::vector<Poly> ps;
  ps.reserve(values.size());
  for (double v : values) ps.push_back(Poly::constant(v));
  return CoefficientSignal(breaks, ps);
}

CoefficientSignal CoefficientSignal::piecewise_linear(const std::vector<double>& times,
                                                      const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 2)
    fail(errc::config_invalid, "piecewise linear signal needs matching times/values");
  std::vector<Poly> ps;
  for (size_t i = 0; i + 1 < times.size(); ++i) {
    const double slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
    ps.push_back(Poly{{values[i] - slope * times[i], slope}});
  }
  return CoefficientSignal(times, ps);
}

bool CoefficientSignal::is_piecewise_constant() const {
  for (const auto& p : pieces_)
    if (p.degree() > 0) return false;
  return true;
}

int CoefficientSignal::piece_index(double t) const {
  if (t < breaks_.front() || t > breaks_.back()) fail(errc::out_of_domain, "signal evaluated outside domain");
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  int j = static_cast<int>(it - breaks_.begin()) - 1;
  return std::min(j, static_cast<int>(pieces_.size()) - 1);
}

double CoefficientSignal::operator()(double t) const { return pieces_[piece_index(t)](t); }

double CoefficientSignal::derivative(double t) const {
  for (size_t j = 1; j + 1 < breaks_.size(); ++j)
    if (t == breaks_[j]) fail(errc::at_breakpoint, "derivative undefined at an interior breakpoint");
  return derivative_inside(t);
}

double CoefficientSignal::derivative_inside(double t) const {
  return pieces_[piece_index(t)].derivative()(t);
}

double CoefficientSignal::max_abs() const {
  double m = 0.0;
  for (size_t j = 0; j < pieces_.size(); ++j) {
    m = std::max({m, std::abs(pieces_[j](breaks_[j])), std::abs(pieces_[j](breaks_[j + 1]))});
    for (double r : pieces_[j].derivative().roots_in(breaks_[j], breaks_[j + 1]))
      m = std::max(m, std::abs(pieces_[j](r)));
  }
  return m;
}

std::vector<double> merged_breakpoints(const std::vector<const CoefficientSignal*>& sigs, double a,
                                       double b) {
  std::set<double> s{a, b};
  for (const auto* sig : sigs)
    for (double t : sig->breakpoints())
      if (t > a && t < b) s.insert(t);
  return {s.begin(), s.end()};
}

double CoefficientSignal::l1_distance(const CoefficientSignal& other, double a, double b) const {
  std::vector<double> cuts = merged_breakpoints({this, &other}, a, b);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    Poly d = pieces_[piece_index(mid)] - other.pieces_[other.piece_index(mid)];
    acc += d.integral_abs(cuts[i], cuts[i + 1]);
  }
  return acc;
}

double CoefficientSignal::l1_distance_squares(const CoefficientSignal& other, double a, double b) const {
  std::vector<double> cuts = merged_breakpoints({this, &other}, a, b);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    const Poly& p = pieces_[piece_index(mid)];
    const Poly& q = other.pieces_[other.piece_index(mid)];
    Poly d = p * p - q * q;
    acc += d.integral_abs(cuts[i], cuts[i + 1]);
  }
  return acc;
}

double CoefficientSignal::l1_derivative(double a, double b) const {
  std::vector<double> cuts = merged_breakpoints({this}, a, b);
  double acc = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    acc += pieces_[piece_index(mid)].derivative().integral_abs(cuts[i], cuts[i + 1]);
  }
  return acc;
}

}  // namespace qgbc
