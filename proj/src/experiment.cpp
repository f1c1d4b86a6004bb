#include "qgbc/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace qgbc {

namespace {
using nlohmann::json;
using cd = std::complex<double>;

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(errc::config_invalid, path + ": " + what);
}

std::ofstream open_out(const RunOptions& opts, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  std::ofstream f(opts.out_dir / name);
  if (!f) fail(errc::io_error, "cannot open " + (opts.out_dir / name).string());
  return f;
}

}  // namespace

void write_matrix_text(std::ostream& f, const std::string& name, const MatrixXcd& A) {
  f << "# " << name << " " << A.rows() << " " << A.cols() << "\n";
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j) != cd(0.0))
        f << i << " " << j << " " << csv_num(A(i, j).real()) << " " << csv_num(A(i, j).imag())
          << "\n";
}

void write_matrix_binary(const std::filesystem::path& path, const MatrixXcd& A) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open " + path.string());
  const std::int64_t dims[2] = {A.rows(), A.cols()};
  f.write(reinterpret_cast<const char*>(dims), sizeof dims);
  f.write(reinterpret_cast<const char*>(A.data()), sizeof(cd) * A.size());
  if (!f) fail(errc::io_error, "short write to " + path.string());
}

MatrixXcd read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(errc::io_error, "cannot open " + path.string());
  std::int64_t dims[2];
  f.read(reinterpret_cast<char*>(dims), sizeof dims);
  MatrixXcd A(dims[0], dims[1]);
  f.read(reinterpret_cast<char*>(A.data()), sizeof(cd) * A.size());
  if (!f) fail(errc::io_error, "short read from " + path.string());
  return A;
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MetricGraph graph_from_config(const json& cfg) {
  if (cfg.contains("graph_file")) {
    std::ifstream f(cfg.at("graph_file").get<std::string>());
    if (!f) fail(errc::io_error, "cannot read graph_file");
    json g = json::parse(f, nullptr, true, true);
    return build_circuit(g);
  }
  require(cfg.contains("graph"), "/graph", "missing graph document");
  return build_circuit(cfg.at("graph"));
}

std::map<int, double> chi_map_from_config(const json& node, const MetricGraph& g,
                                          const BoundaryLayout& layout) {
  std::map<int, double> out;
  if (node.is_null()) return out;
  for (const auto& [key, val] : node.items()) {
    // key format: vertex/edge/endpoint
    std::stringstream ss(key);
    std::string vid, eid, side;
    std::getline(ss, vid, '/');
    std::getline(ss, eid, '/');
    std::getline(ss, side, '/');
    const int e = g.edge_index(eid);
    require(e >= 0, "/boundary/chi", "unknown edge in key " + key);
    const endpoint end = side == "tail" ? endpoint::tail : endpoint::head;
    require(side == "tail" || side == "head", "/boundary/chi", "bad endpoint in key " + key);
    const int point = BoundaryLayout::point_id(e, end);
    require(layout.points[point].junction == g.vertex_index(vid), "/boundary/chi",
            "endpoint " + key + " is not in that vertex's junction");
    out[point] = val.get<double>();
  }
  return out;
}

std::map<std::string, double> delta_map_from_config(const json& cfg) {
  std::map<std::string, double> out;
  if (!cfg.contains("boundary") || !cfg.at("boundary").contains("delta")) return out;
  for (const auto& [vid, val] : cfg.at("boundary").at("delta").items()) out[vid] = val.get<double>();
  return out;
}

QuasiDeltaParams boundary_from_config(const json& cfg, const MetricGraph& g,
                                      const BoundaryLayout& layout) {
  QuasiDeltaParams params;
  if (!cfg.contains("boundary")) return params;
  const json& b = cfg.at("boundary");
  if (b.contains("delta"))
    for (const auto& [vid, val] : b.at("delta").items()) {
      const int v = g.vertex_index(vid);
      require(v >= 0, "/boundary/delta", "unknown vertex " + vid);
      params.delta[v] = val.get<double>();
    }
  if (b.contains("chi"))
    for (const auto& [point, val] : chi_map_from_config(b.at("chi"), g, layout)) params.chi[point] = val;
  return params;
}

namespace {

double mesh_h(const json& cfg) {
  if (cfg.contains("mesh") && cfg.at("mesh").contains("h")) return cfg.at("mesh").at("h").get<double>();
  return 0.05;
}

}  // namespace

int run_spectrum(const json& cfg, const RunOptions& opts) {
  require(cfg.contains("spectrum"), "/spectrum", "missing block");
  const json& blk = cfg.at("spectrum");
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  QuasiDeltaParams params = boundary_from_config(cfg, g, layout);
  BoundaryUnitary bc = quasi_delta_unitary(layout, params);
  Mesh mesh = make_mesh(g, mesh_h(cfg));

  EdgeProfile a = zero_profile(), th = zero_profile();
  if (blk.contains("chi_bar")) {
    ThetaProfile prof = theta_profile(g, layout, chi_map_from_config(blk.at("chi_bar"), g, layout));
    a = prof.potential_fn();
    th = prof.theta_fn();
  }
  FormMatrices fm = assemble(g, mesh, bc, a, th);
  const double u = blk.value("u", 0.0);
  const double v = blk.value("v", 0.0);
  ReducedOperator op = reduce(fm, u, v);
  const int k = blk.value("k", 5);
  Eigenpairs ep = spectrum(op, std::min<int>(k, fm.reduced));

  auto f = open_out(opts, "spectrum.csv");
  const bool has_ref = blk.contains("reference") && blk.at("reference").value("kind", "") == "dirichlet_interval";
  if (has_ref) {
    const double L = blk.at("reference").value("length", 1.0);
    f << "n,lambda,reference,rel_err\n";
    for (int n = 0; n < ep.values.size(); ++n) {
      const double ref = (n + 1) * (n + 1) * M_PI * M_PI / (L * L);
      f << (n + 1) << "," << csv_num(ep.values(n)) << "," << csv_num(ref) << ","
        << csv_num(std::abs(ep.values(n) - ref) / ref) << "\n";
    }
  } else {
    f << "n,lambda\n";
    for (int n = 0; n < ep.values.size(); ++n) f << (n + 1) << "," << csv_num(ep.values(n)) << "\n";
  }
  return 0;
}

int run_cayley(const json& cfg, const RunOptions& opts) {
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  QuasiDeltaParams params = boundary_from_config(cfg, g, layout);
  BoundaryUnitary closed = quasi_delta_unitary(layout, params);
  MatrixXcd C_spectral = partial_cayley(closed.U);
  const double dev = (C_spectral - closed.C).cwiseAbs().maxCoeff();

  auto f = open_out(opts, "cayley.txt");
  write_matrix_text(f, "U", closed.U);
  write_matrix_text(f, "P", closed.P);
  write_matrix_text(f, "C_closed_form", closed.C);
  write_matrix_text(f, "C_spectral", C_spectral);
  write_matrix_binary(opts.out_dir / "cayley.bin", closed.C);
  auto r = open_out(opts, "result.json");
  json res{{"max_deviation", dev}, {"gap", closed.gap}};
  r << res.dump(2) << "\n";
  return dev < 1e-10 ? 0 : 4;
}

namespace {

CoefficientSignal schedule_from_config(const json& blk, double T) {
  if (blk.contains("schedule")) {
    const json& s = blk.at("schedule");
    std::vector<double> times, values;
    for (const auto& p : s) {
      times.push_back(p.at(0).get<double>());
      values.push_back(p.at(1).get<double>());
    }
    return CoefficientSignal::piecewise_linear(times, values);
  }
  return CoefficientSignal::constant(blk.value("u0", 0.0), 0.0, T);
}

}  // namespace

int run_propagate(const json& cfg, const RunOptions& opts) {
  require(cfg.contains("propagate"), "/propagate", "missing block");
  const json& blk = cfg.at("propagate");
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  const double T = blk.value("T", 1.0);
  const double dt = blk.value("dt", 1e-3);

  std::map<int, double> chi_bar;
  if (blk.contains("chi_bar")) chi_bar = chi_map_from_config(blk.at("chi_bar"), g, layout);
  InductionSystem sys =
      build_induction(g, delta_map_from_config(cfg), chi_bar, blk.value("r", 1.0), mesh_h(cfg));
  sys.u = schedule_from_config(blk, T);
  sys.m = family_lower_bound(sys, sys.u.max_abs() * -1.0, sys.u.max_abs(), -sys.r, sys.r, 3);

  ReducedOperator H0 = sys.frozen(sys.u(0.0));
  Eigenpairs ep = spectrum(H0, std::min(sys.dim(), blk.value("initial_index", 0) + 2));
  VectorXcd psi0 = ep.vectors.col(blk.value("initial_index", 0));
  VectorXcd target = psi0;
  if (blk.contains("target_index")) {
    Eigenpairs ep2 = spectrum(H0, std::min(sys.dim(), blk.value("target_index", 0) + 1));
    target = ep2.vectors.col(blk.value("target_index", 0));
  }

  FormLinearHamiltonian H = sys.hamiltonian();
  HilbertScale scale = make_scale(H0, sys.m);
  Trajectory traj = propagate_trajectory(H, psi0, sys.u.t_begin(), sys.u.t_end(), dt,
                                         std::max(1, blk.value("dump_every", 16)));
  auto f = open_out(opts, "trajectory.csv");
  f << "t,re_overlap,im_overlap,norm,norm_plus,norm_minus,fidelity\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const cd ov = target.dot(sys.Mr * traj.states[k]);
    f << csv_num(traj.times[k]) << "," << csv_num(ov.real()) << "," << csv_num(ov.imag()) << ","
      << csv_num(scale.norm(traj.states[k])) << "," << csv_num(scale.norm_plus(traj.states[k]))
      << "," << csv_num(scale.norm_minus(traj.states[k])) << ","
      << csv_num(std::abs(ov) / (scale.norm(target) * scale.norm(traj.states[k]))) << "\n";
  }
  return 0;
}

int run_stability_sweep(const json& cfg, const RunOptions& opts) {
  require(cfg.contains("stability-sweep"), "/stability-sweep", "missing block");
  const json& blk = cfg.at("stability-sweep");
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  std::map<int, double> chi_bar;
  if (blk.contains("chi_bar")) chi_bar = chi_map_from_config(blk.at("chi_bar"), g, layout);

  const double T = blk.value("T", 1.0);
  const double u0 = blk.value("u0", 1.0);
  const double r = blk.value("r", 1.0);
  const double dt = blk.value("dt", 2e-3);
  InductionSystem sys = build_induction(g, delta_map_from_config(cfg), chi_bar, r, mesh_h(cfg));

  // Auxiliary control: piecewise-constant v on `v_pieces` uniform pieces with
  // seeded random values in (0, r), or a constant v.
  CoefficientSignal v = [&]() {
    if (blk.contains("v_const")) return CoefficientSignal::constant(blk.at("v_const").get<double>(), 0.0, T);
    const int np = blk.value("v_pieces", 4);
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> dist(0.1 * r, 0.9 * r);
    std::vector<double> breaks(np + 1), vals(np);
    for (int i = 0; i <= np; ++i) breaks[i] = T * i / np;
    for (int i = 0; i < np; ++i) vals[i] = dist(rng);
    return CoefficientSignal::piecewise_constant(breaks, vals);
  }();

  sys.m = family_lower_bound(sys, u0 - r * T, u0 + r * T, -r, r, 3);

  // Base member: frozen magnetic part at u0, electric channel v(t).
  FormLinearHamiltonian H0;
  H0.H0 = sys.K0 + u0 * sys.S1r + u0 * u0 * sys.S2r;
  H0.H0 = (0.5 * (H0.H0 + H0.H0.adjoint())).eval();
  H0.Hi = {sys.Vr};
  H0.f = {v};
  H0.Mr = sys.Mr;
  H0.m = sys.m;
  HilbertScale anchor = make_scale(sys.frozen(u0, v(0.0)), sys.m);

  std::vector<int> n_list;
  for (const auto& n : blk.value("n_list", std::vector<int>{2, 4, 8, 16, 32})) n_list.push_back(n);

  CoefficientSignal u0sig = CoefficientSignal::constant(u0, 0.0, T);
  SweepResult sweep = convergence_sweep(
      H0, u0sig, r, n_list,
      [&](int n) {
        SweepMember mem;
        mem.u = lift_to_induction(v, u0, n);
        mem.H = sys.hamiltonian_for(mem.u);
        mem.H.m = sys.m;
        return mem;
      },
      anchor, dt, opts.threads);

  auto f = open_out(opts, "sweep.csv");
  f << "n,l1_u,l1_u2,bound_u,bound_u2,propagator_diff\n";
  for (const auto& row : sweep.rows)
    f << row.n << "," << csv_num(row.l1_u) << "," << csv_num(row.l1_u2) << ","
      << csv_num(row.bound_u) << "," << csv_num(row.bound_u2) << ","
      << csv_num(row.propagator_diff) << "\n";

  // Full two-sided reports of the base member against each refinement.
  auto pf = open_out(opts, "pairs.csv");
  pf << "j,k,s,t,lhs,rhs_integral,ratio,c,m,M,quadrature_ok\n";
  bool pairs_ok = true;
  for (int n : n_list) {
    SweepMember mem;
    mem.u = lift_to_induction(v, u0, n);
    FormLinearHamiltonian Hn = sys.hamiltonian_for(mem.u);
    Hn.m = sys.m;
    StabilityReport sr = stability_pair(H0, Hn, 0.0, T, anchor, dt);
    pairs_ok = pairs_ok && sr.quadrature_ok;
    pf << 0 << "," << n << "," << csv_num(sr.s) << "," << csv_num(sr.t) << ","
       << csv_num(sr.lhs) << "," << csv_num(sr.rhs_integral) << "," << csv_num(sr.ratio) << ","
       << csv_num(sr.c) << "," << csv_num(sr.m) << "," << csv_num(sr.M) << ","
       << (sr.quadrature_ok ? 1 : 0) << "\n";
  }

  auto rj = open_out(opts, "result.json");
  json res{{"fitted_slope", sweep.fitted_slope},
           {"ratio_max", sweep.ratio_max},
           {"pairs_quadrature_ok", pairs_ok}};
  rj << res.dump(2) << "\n";

  bool bounds_ok = true;
  for (const auto& row : sweep.rows)
    bounds_ok = bounds_ok && row.l1_u <= row.bound_u + 1e-10 && row.l1_u2 <= row.bound_u2 + 1e-10;
  return bounds_ok ? 0 : 4;
}

int run_control_search(const json& cfg, const RunOptions& opts) {
  require(cfg.contains("control-search"), "/control-search", "missing block");
  const json& blk = cfg.at("control-search");
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  std::map<int, double> chi_bar;
  if (blk.contains("chi_bar")) chi_bar = chi_map_from_config(blk.at("chi_bar"), g, layout);

  const double r = blk.value("r", 1.0);
  const double T = blk.value("T", 8.0);
  BoundaryControlSystem bcs;
  bcs.induction = build_induction(g, delta_map_from_config(cfg), chi_bar, r, mesh_h(cfg));
  bcs.chi_bar = chi_bar;
  bcs.u0 = blk.value("u0", 0.0);
  bcs.u1 = blk.value("u1", bcs.u0);

  SearchOptions sopt;
  sopt.pieces = blk.value("pieces", 24);
  sopt.levels = blk.value("levels", 9);
  sopt.restarts = blk.value("restarts", 4);
  sopt.budget = blk.value("budget", 200000L);
  sopt.seed = opts.seed;
  sopt.positive_only = blk.value("proof_faithful", false);

  ReducedOperator H0 = bcs.induction.frozen(bcs.u0);
  const json& tgt = blk.at("target");
  require(tgt.value("kind", "") == "eigenstate", "/control-search/target", "only eigenstate targets here");
  const int ti = tgt.value("index", 1);
  Eigenpairs ep = spectrum(H0, ti + 1);
  VectorXcd psi0 = ep.vectors.col(blk.value("initial_index", 0));
  VectorXcd psiT = ep.vectors.col(ti);

  ControlResult res = boundary_control_run(bcs, psi0, psiT, blk.value("epsilon", 0.1), T,
                                           blk.value("sawtooth_n", 16), blk.value("hold_q", 0.0),
                                           blk.value("hold_p", 0.0), blk.value("dt", 2e-3), sopt);

  auto f = open_out(opts, "schedule.csv");
  f << "t,u,du\n";
  const auto& breaks = res.schedule.breakpoints();
  for (size_t j = 0; j + 1 < breaks.size(); ++j) {
    const double mid = 0.5 * (breaks[j] + breaks[j + 1]);
    f << csv_num(breaks[j]) << "," << csv_num(res.schedule(breaks[j] + 1e-12)) << ","
      << csv_num(res.schedule.derivative_inside(mid)) << "\n";
  }
  f << csv_num(breaks.back()) << "," << csv_num(res.schedule(breaks.back())) << ",0\n";

  auto rj = open_out(opts, "result.json");
  json res_json{{"fidelity", res.fidelity},
                {"weak_distance", res.weak_distance},
                {"strong_distance", res.strong_distance},
                {"epsilon_met", res.epsilon_met},
                {"weak_distance_free", res.weak_distance_free},
                {"gauge_consistency", res.gauge_consistency},
                {"evaluations", res.trace.evaluations},
                {"budget_exhausted", res.trace.budget_exhausted},
                {"best_fidelity_trace", res.trace.best_fidelity}};
  rj << res_json.dump(2) << "\n";
  return res.trace.budget_exhausted ? 4 : 0;
}

int run_check_assumptions(const json& cfg, const RunOptions& opts) {
  require(cfg.contains("check-assumptions"), "/check-assumptions", "missing block");
  const json& blk = cfg.at("check-assumptions");
  MetricGraph g = graph_from_config(cfg);
  BoundaryLayout layout = boundary_index(g);
  std::map<int, double> chi_bar;
  if (blk.contains("chi_bar")) chi_bar = chi_map_from_config(blk.at("chi_bar"), g, layout);
  const double r = blk.value("r", 1.0);
  const double T = blk.value("T", 1.0);
  const double u0 = blk.value("u0", 0.0);
  InductionSystem sys = build_induction(g, delta_map_from_config(cfg), chi_bar, r, mesh_h(cfg));
  sys.m = family_lower_bound(sys, u0 - r * T, u0 + r * T, -r, r, 3);

  std::vector<FormLinearHamiltonian> family;
  for (int n : blk.value("n_list", std::vector<int>{1, 2, 4})) {
    CoefficientSignal v = CoefficientSignal::constant(blk.value("v_const", 0.5 * r), 0.0, T);
    CoefficientSignal un = lift_to_induction(v, u0, n);
    FormLinearHamiltonian H = sys.hamiltonian_for(un);
    H.m = sys.m;
    family.push_back(H);
  }
  AssumptionReport rep = check_assumptions(family);
  auto rj = open_out(opts, "result.json");
  json res{{"m", rep.m}, {"c", rep.c}, {"M", rep.M}, {"quadrature_ok", rep.quadrature_ok}};
  rj << res.dump(2) << "\n";
  return rep.quadrature_ok ? 0 : 4;
}

int run(const std::string& command, const json& cfg, const RunOptions& opts) {
  if (command == "spectrum") return run_spectrum(cfg, opts);
  if (command == "cayley") return run_cayley(cfg, opts);
  if (command == "propagate") return run_propagate(cfg, opts);
  if (command == "stability-sweep") return run_stability_sweep(cfg, opts);
  if (command == "control-search") return run_control_search(cfg, opts);
  if (command == "check-assumptions") return run_check_assumptions(cfg, opts);
  fail(errc::config_invalid, "unknown command " + command);
}

}  // namespace qgbc
