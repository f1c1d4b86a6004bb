#include "qgbc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace qgbc {

namespace {
using cd = std::complex<double>;
}

double FormLinearHamiltonian::t_begin() const {
  double t = -std::numeric_limits<double>::infinity();
  for (const auto& s : f) t = std::max(t, s.t_begin());
  return f.empty() ? 0.0 : t;
}

double FormLinearHamiltonian::t_end() const {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& s : f) t = std::min(t, s.t_end());
  return f.empty() ? 0.0 : t;
}

std::vector<double> FormLinearHamiltonian::breakpoints() const {
  if (f.empty()) return {};
  std::vector<const CoefficientSignal*> ptrs;
  for (const auto& s : f) ptrs.push_back(&s);
  return merged_breakpoints(ptrs, t_begin(), t_end());
}

MatrixXcd FormLinearHamiltonian::eval(double t) const {
  MatrixXcd H = H0;
  for (size_t i = 0; i < Hi.size(); ++i) {
    const double fi = f[i](t);
    if (fi != 0.0) H += fi * Hi[i];
  }
  return H;
}

FormLinearHamiltonian::DerivativeInfo FormLinearHamiltonian::eval_derivative(double t) const {
  for (size_t i = 0; i < f.size(); ++i) (void)f[i].derivative(t);  // AT_BREAKPOINT check
  return eval_derivative_inside(t);
}

FormLinearHamiltonian::DerivativeInfo FormLinearHamiltonian::eval_derivative_inside(double t) const {
  DerivativeInfo out;
  out.dH = MatrixXcd::Zero(dim(), dim());
  bool nonzero = false;
  for (size_t i = 0; i < Hi.size(); ++i) {
    const double fp = f[i].derivative_inside(t);
    if (fp != 0.0) {
      out.dH += fp * Hi[i];
      nonzero = true;
    }
  }
  if (!nonzero) {
    out.C = 0.0;
    return out;
  }
  MatrixXcd A = eval(t) + (m + 1.0) * Mr;
  Eigenpairs ep = dense_geig(out.dH, A);
  out.C = std::max(std::abs(ep.values(0)), std::abs(ep.values(ep.values.size() - 1)));
  return out;
}

MatrixXcd unitary_exponential(const MatrixXcd& A, const MatrixXcd& Mr, double tau) {
  Eigenpairs ep = dense_geig(A, Mr);
  const int n = static_cast<int>(ep.values.size());
  VectorXcd phases(n);
  for (int i = 0; i < n; ++i) phases(i) = std::polar(1.0, -tau * ep.values(i));
  return ep.vectors * phases.asDiagonal() * ep.vectors.adjoint() * Mr;
}

VectorXcd unitary_exponential_apply(const MatrixXcd& A, const MatrixXcd& Mr, double tau,
                                    const VectorXcd& psi) {
  Eigenpairs ep = dense_geig(A, Mr);
  const int n = static_cast<int>(ep.values.size());
  VectorXcd coeffs = ep.vectors.adjoint() * (Mr * psi);
  for (int i = 0; i < n; ++i) coeffs(i) *= std::polar(1.0, -tau * ep.values(i));
  return ep.vectors * coeffs;
}

namespace {

std::vector<double> segment_grid(const FormLinearHamiltonian& H, double s, double t) {
  if (s < H.t_begin() - 1e-13 || t > H.t_end() + 1e-13)
    fail(errc::out_of_domain, "propagation window outside signal domain");
  std::vector<double> cuts{s};
  for (double b : H.breakpoints())
    if (b > s && b < t) cuts.push_back(b);
  cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

// Stepping backwards adjoints every factor, so U(s, t) = U(t, s)^* exactly.
Propagator reversed(Propagator P) {
  std::swap(P.s, P.t);
  P.U = P.U.adjoint().eval();
  for (auto& step : P.log) std::swap(step.from, step.to);
  std::reverse(P.log.begin(), P.log.end());
  return P;
}

}  // namespace

Propagator propagate_piecewise_constant(const FormLinearHamiltonian& H, double s, double t) {
  for (const auto& sig : H.f)
    if (!sig.is_piecewise_constant())
      fail(errc::not_piecewise_constant, "signal has a non-constant piece");
  if (t < s) return reversed(propagate_piecewise_constant(H, t, s));
  Propagator P;
  P.s = s;
  P.t = t;
  P.U = MatrixXcd::Identity(H.dim(), H.dim());
  if (s == t) return P;
  std::vector<double> cuts = segment_grid(H, s, t);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    P.U = (unitary_exponential(H.eval(mid), H.Mr, b - a) * P.U).eval();
    P.log.push_back({a, b, "exact"});
  }
  return P;
}

Propagator propagate_smooth(const FormLinearHamiltonian& H, double s, double t, double dt) {
  if (!(dt > 0.0)) fail(errc::config_invalid, "dt must be positive");
  if (t < s) return reversed(propagate_smooth(H, t, s, dt));
  Propagator P;
  P.s = s;
  P.t = t;
  P.U = MatrixXcd::Identity(H.dim(), H.dim());
  if (s == t) return P;
  std::vector<double> cuts = segment_grid(H, s, t);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / dt - 1e-12)));
    const double h = (b - a) / steps;
    for (int k = 0; k < steps; ++k) {
      const double t0 = a + k * h;
      P.U = (unitary_exponential(H.eval(t0 + 0.5 * h), H.Mr, h) * P.U).eval();
    }
    P.log.push_back({a, b, "midpoint"});
  }
  return P;
}

Trajectory propagate_trajectory(const FormLinearHamiltonian& H, const VectorXcd& psi0, double s,
                                double t, double dt, int dump_every) {
  if (!(dt > 0.0)) fail(errc::config_invalid, "dt must be positive");
  Trajectory traj;
  // Uniform outer grid; each outer step is propagated with breakpoint-aligned
  // midpoint substeps applied directly to the state, so dumps land on exact
  // multiples of dt without forming step matrices.
  const int n = std::max(1, static_cast<int>(std::llround((t - s) / dt)));
  const double h = (t - s) / n;
  VectorXcd psi = psi0;
  traj.times.push_back(s);
  traj.states.push_back(psi);
  for (int k = 0; k < n; ++k) {
    const double a = s + k * h;
    const double b = (k + 1 == n) ? t : s + (k + 1) * h;
    std::vector<double> cuts{a};
    for (double br : H.breakpoints())
      if (br > a && br < b) cuts.push_back(br);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      const int steps = std::max(1, static_cast<int>(std::ceil((cuts[i + 1] - cuts[i]) / h - 1e-12)));
      const double hh = (cuts[i + 1] - cuts[i]) / steps;
      for (int q = 0; q < steps; ++q)
        psi = unitary_exponential_apply(H.eval(cuts[i] + (q + 0.5) * hh), H.Mr, hh, psi);
    }
    if ((k + 1) % dump_every == 0 || k + 1 == n) {
      traj.times.push_back(b);
      traj.states.push_back(psi);
    }
  }
  return traj;
}

double weak_residual(const FormLinearHamiltonian& H, const Trajectory& traj,
                     const std::vector<VectorXcd>& probes, const HilbertScale& scale) {
  if (traj.times.size() < 3) fail(errc::config_invalid, "trajectory too short for residuals");
  // The equation holds per smooth piece (solutions are glued at coefficient
  // breakpoints), so stencils straddling a breakpoint are excluded: there the
  // centered difference would measure the derivative jump, not a residual.
  const std::vector<double> breaks = H.breakpoints();
  auto stencil_is_smooth = [&](double lo, double hi) {
    for (double b : breaks)
      if (b > lo && b < hi) return false;
    return true;
  };
  double worst = 0.0;
  for (const auto& probe : probes) {
    const double np = scale.norm_plus(probe);
    if (np == 0.0) continue;
    for (size_t k = 1; k + 1 < traj.times.size(); ++k) {
      if (!stencil_is_smooth(traj.times[k - 1], traj.times[k + 1])) continue;
      const double dt2 = traj.times[k + 1] - traj.times[k - 1];
      const cd inner_next = probe.dot(H.Mr * traj.states[k + 1]);
      const cd inner_prev = probe.dot(H.Mr * traj.states[k - 1]);
      const cd ddt = (inner_next - inner_prev) / dt2;
      const cd rhs = cd(0, 1) * probe.dot(H.eval(traj.times[k]) * traj.states[k]);
      worst = std::max(worst, std::abs(ddt + rhs) / np);
    }
  }
  return worst;
}

}  // namespace qgbc
