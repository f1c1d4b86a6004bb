#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qgbc/experiment.hpp"

namespace {

int exit_code_for(qgbc::errc c) {
  using qgbc::errc;
  switch (c) {
    case errc::config_invalid:
      return 2;
    case errc::io_error:
      return 3;
    case errc::a1_violation:
    case errc::a3_unbounded:
    case errc::a4_divergent:
    case errc::no_gap:
    case errc::budget_exhausted:
      return 4;
    default:
      return 5;
  }
}

int log_level() {
  const char* env = std::getenv("QGBC_LOG");
  if (!env) return 1;  // warn
  std::string s(env);
  if (s == "debug") return 3;
  if (s == "info") return 2;
  if (s == "error") return 0;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qgbc - quantum graph dynamics and boundary control experiments\n"
      "\n"
      "Exit codes:\n"
      "  0  success\n"
      "  2  CONFIG_INVALID (bad or missing configuration)\n"
      "  3  IO_ERROR (unreadable input or unwritable output)\n"
      "  4  assertion flag raised (A1_VIOLATION, A3_UNBOUNDED, A4_DIVERGENT,\n"
      "     NO_GAP, BUDGET_EXHAUSTED, or a failed run-level check)\n"
      "  5  internal numerical failure (e.g. EIGENSOLVE_FAIL)\n"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  int threads = 1;

  for (const std::string name : {"spectrum", "cayley", "propagate", "stability-sweep",
                                 "control-search", "check-assumptions"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment JSON document")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "RNG seed (fixed seed => identical outputs)");
    sub->add_option("--threads", threads, "worker threads for sweep rows");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream f(config_path);
    if (!f) throw qgbc::error(qgbc::errc::io_error, "cannot read " + config_path);
    nlohmann::json cfg = nlohmann::json::parse(f, nullptr, true, true);
    qgbc::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed = seed;
    opts.threads = threads;
    if (log_level() >= 2) std::cerr << "[qgbc] running " << command << "\n";
    return qgbc::run(command, cfg, opts);
  } catch (const qgbc::error& e) {
    if (log_level() >= 0) std::cerr << "[qgbc] " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    if (log_level() >= 0) std::cerr << "[qgbc] CONFIG_INVALID: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    if (log_level() >= 0) std::cerr << "[qgbc] internal: " << e.what() << "\n";
    return 5;
  }
}
