#include "qgbc/stability.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace qgbc {

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (b <= a) return 0.0;
  int n = std::max(2, panels + (panels % 2));
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double simpson_checked(const std::function<double(double)>& f, double a, double b, int panels,
                       bool* converged) {
  const double coarse = simpson(f, a, b, panels);
  const double fine = simpson(f, a, b, 2 * panels);
  if (converged) *converged = std::abs(fine - coarse) <= 1e-8 * (1.0 + std::abs(fine));
  return fine;
}

namespace {

// Quadrature nodes may land exactly on piece boundaries, where piecewise
// evaluation would resolve to the neighbouring piece; nudge them inside.
std::function<double(double)> clamped_into(const std::function<double(double)>& f, double a,
                                           double b) {
  const double eps = 1e-9 * (b - a);
  return [f, a, b, eps](double t) { return f(std::min(std::max(t, a + eps), b - eps)); };
}

// Sample times inside each smooth piece (never on breakpoints).
std::vector<double> interior_samples(const std::vector<double>& cuts, int per_piece) {
  std::vector<double> out;
  for (size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double a = cuts[j], b = cuts[j + 1];
    for (int i = 0; i < per_piece; ++i) {
      const double s = (i + 0.5) / per_piece;
      out.push_back(a + s * (b - a));
    }
  }
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const std::vector<FormLinearHamiltonian>& family,
                                   int samples_per_piece, int simpson_panels) {
  if (family.empty()) fail(errc::config_invalid, "empty family");
  AssumptionReport rep;
  rep.samples_per_piece = samples_per_piece;

  // (A1) uniform lower bound on a grid.
  double m = 0.0;
  for (const auto& H : family) {
    std::vector<double> cuts{H.t_begin()};
    for (double b : H.breakpoints())
      if (b > cuts.front() && b < H.t_end()) cuts.push_back(b);
    cuts.push_back(H.t_end());
    for (double t : interior_samples(cuts, samples_per_piece)) {
      Eigenpairs ep = dense_geig(H.eval(t), H.Mr);
      const double lmin = ep.values(0);
      if (!std::isfinite(lmin)) fail(errc::a1_violation, "nonfinite lower bound");
      m = std::max(m, -lmin);
    }
  }
  if (!(m < 1e12)) fail(errc::a1_violation, "lower bound diverges");
  rep.m = std::max(0.0, m);

  // Anchor scale at family[0], initial time, with the common m.
  const FormLinearHamiltonian& H0 = family[0];
  {
    MatrixXcd A0 = H0.eval(H0.t_begin()) + (rep.m + 1.0) * H0.Mr;
    rep.anchor = HilbertScale(std::move(A0), H0.Mr);
  }

  // (A3) equivalence constant over the family x grid.
  double c = 1.0;
  for (const auto& H : family) {
    std::vector<double> cuts{H.t_begin()};
    for (double b : H.breakpoints())
      if (b > cuts.front() && b < H.t_end()) cuts.push_back(b);
    cuts.push_back(H.t_end());
    std::vector<double> grid = interior_samples(cuts, samples_per_piece);
    grid.push_back(H.t_begin());
    grid.push_back(H.t_end());
    for (double t : grid) {
      MatrixXcd At = H.eval(t) + (rep.m + 1.0) * H.Mr;
      HilbertScale st(std::move(At), H.Mr);
      c = std::max(c, scale_equivalence(st, rep.anchor));
      if (!(c < 1e8)) fail(errc::a3_unbounded, "norm equivalence constant exceeds cap");
    }
  }
  rep.c = c;

  // (A4) summed per-piece L1 budget of the derivative weight, in the anchor
  // scale. Simpson per smooth piece with a refinement check.
  double M = 0.0;
  bool quad_ok = true;
  for (const auto& H : family) {
    std::vector<double> cuts{H.t_begin()};
    for (double b : H.breakpoints())
      if (b > cuts.front() && b < H.t_end()) cuts.push_back(b);
    cuts.push_back(H.t_end());
    double total = 0.0;
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
      auto weight = [&](double t) {
        auto d = H.eval_derivative_inside(t);
        if (d.dH.size() == 0 || d.dH.cwiseAbs().maxCoeff() == 0.0) return 0.0;
        return rep.anchor.opnorm_plus_minus(d.dH);
      };
      bool conv = true;
      const double part =
          simpson_checked(clamped_into(weight, cuts[j], cuts[j + 1]), cuts[j], cuts[j + 1],
                          simpson_panels, &conv);
      quad_ok = quad_ok && conv;
      if (!std::isfinite(part)) fail(errc::a4_divergent, "derivative budget diverges");
      total += part;
    }
    if (!std::isfinite(total) || total > 1e12) fail(errc::a4_divergent, "derivative budget diverges");
    M = std::max(M, total);
  }
  rep.M = M;
  rep.quadrature_ok = quad_ok;
  return rep;
}

StabilityReport stability_pair(const FormLinearHamiltonian& Hj, const FormLinearHamiltonian& Hk,
                               double s, double t, const HilbertScale& anchor, double dt,
                               int simpson_panels) {
  StabilityReport rep;
  rep.s = s;
  rep.t = t;

  AssumptionReport assume = check_assumptions({Hj, Hk});
  rep.c = assume.c;
  rep.m = assume.m;
  rep.M = assume.M;

  auto is_pc = [](const FormLinearHamiltonian& H) {
    for (const auto& sig : H.f)
      if (!sig.is_piecewise_constant()) return false;
    return true;
  };
  Propagator Uj = is_pc(Hj) ? propagate_piecewise_constant(Hj, s, t) : propagate_smooth(Hj, s, t, dt);
  Propagator Uk = is_pc(Hk) ? propagate_piecewise_constant(Hk, s, t) : propagate_smooth(Hk, s, t, dt);

  rep.lhs = anchor.opnorm_plus_minus_map(Uj.U - Uk.U);

  std::vector<const CoefficientSignal*> sigs;
  for (const auto& sig : Hj.f) sigs.push_back(&sig);
  for (const auto& sig : Hk.f) sigs.push_back(&sig);
  std::vector<double> cuts = merged_breakpoints(sigs, s, t);
  bool quad_ok = assume.quadrature_ok;
  double rhs = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto gapnorm = [&](double tau) {
      MatrixXcd D = Hj.eval(tau) - Hk.eval(tau);
      return anchor.opnorm_plus_minus(D);
    };
    bool conv = true;
    rhs += simpson_checked(clamped_into(gapnorm, cuts[i], cuts[i + 1]), cuts[i], cuts[i + 1],
                           simpson_panels, &conv);
    quad_ok = quad_ok && conv;
  }
  rep.rhs_integral = rhs;
  rep.quadrature_ok = quad_ok;
  rep.ratio = rhs > 0.0 ? rep.lhs / rhs : 0.0;

  if (Hj.f.size() == Hk.f.size()) {
    for (size_t i = 0; i < Hj.f.size(); ++i)
      rep.signal_l1.push_back(Hj.f[i].l1_distance(Hk.f[i], s, t));
  }
  return rep;
}

SweepResult convergence_sweep(const FormLinearHamiltonian& H0, const CoefficientSignal& u0,
                              double r, const std::vector<int>& n_list,
                              const std::function<SweepMember(int)>& build,
                              const HilbertScale& anchor, double dt, int threads) {
  SweepResult out;
  const double s = H0.t_begin(), t = H0.t_end();
  const double T = t - s;

  auto is_pc = [](const FormLinearHamiltonian& H) {
    for (const auto& sig : H.f)
      if (!sig.is_piecewise_constant()) return false;
    return true;
  };
  Propagator U0 = is_pc(H0) ? propagate_piecewise_constant(H0, s, t) : propagate_smooth(H0, s, t, dt);

  const double u0val = u0(s);
  out.rows.resize(n_list.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < n_list.size(); i = next.fetch_add(1)) {
      const int n = n_list[i];
      SweepMember mem = build(n);
      Propagator Un = propagate_smooth(mem.H, s, t, dt);
      SweepRow row;
      row.n = n;
      row.l1_u = mem.u.l1_distance(u0, s, t);
      row.l1_u2 = mem.u.l1_distance_squares(u0, s, t);
      row.bound_u = r * T * T / n;
      row.bound_u2 = std::abs(u0val) * r * T * T / n + r * r * T * T * T / (double(n) * n);
      row.propagator_diff = anchor.opnorm_plus_minus_map(Un.U - U0.U);
      out.rows[i] = row;
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(threads, static_cast<int>(n_list.size())); ++w)
      pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Least-squares slope of log(diff) against log(n).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& row : out.rows) {
    if (row.propagator_diff <= 0.0) continue;
    const double x = std::log(double(row.n)), y = std::log(row.propagator_diff);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  out.fitted_slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  for (const auto& row : out.rows) {
    const double denom = row.l1_u + row.l1_u2;
    if (denom > 0.0) out.ratio_max = std::max(out.ratio_max, row.propagator_diff / denom);
  }
  return out;
}

std::vector<StrongConvergenceRow> strong_convergence_check(
    const std::vector<std::pair<int, MatrixXcd>>& Un_seq, const MatrixXcd& U0,
    const std::vector<VectorXcd>& probes, const HilbertScale& anchor) {
  std::vector<StrongConvergenceRow> rows;
  for (const auto& [n, Un] : Un_seq) {
    StrongConvergenceRow row;
    row.n = n;
    MatrixXcd D = Un - U0;
    row.opnorm = anchor.opnorm_plus_minus_map(D);
    for (const auto& psi : probes) row.probe_distance.push_back(anchor.norm(D * psi));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qgbc
