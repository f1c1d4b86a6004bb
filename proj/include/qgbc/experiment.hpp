#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qgbc/control.hpp"

namespace qgbc {

struct RunOptions {
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Parses helpers shared by the CLI and the tests.
MetricGraph graph_from_config(const nlohmann::json& cfg);
QuasiDeltaParams boundary_from_config(const nlohmann::json& cfg, const MetricGraph& g,
                                      const BoundaryLayout& layout);
std::map<int, double> chi_map_from_config(const nlohmann::json& node, const MetricGraph& g,
                                          const BoundaryLayout& layout);
std::map<std::string, double> delta_map_from_config(const nlohmann::json& cfg);

// Subcommand drivers. Each validates its block, writes artifacts under
// opts.out_dir and returns 0, or throws qgbc::error.
int run_spectrum(const nlohmann::json& cfg, const RunOptions& opts);
int run_cayley(const nlohmann::json& cfg, const RunOptions& opts);
int run_propagate(const nlohmann::json& cfg, const RunOptions& opts);
int run_stability_sweep(const nlohmann::json& cfg, const RunOptions& opts);
int run_control_search(const nlohmann::json& cfg, const RunOptions& opts);
int run_check_assumptions(const nlohmann::json& cfg, const RunOptions& opts);

// Dispatch by subcommand name; used by the CLI binary.
int run(const std::string& command, const nlohmann::json& cfg, const RunOptions& opts);

// Formats a double with full round-trip precision (deterministic CSVs).
std::string csv_num(double v);

// Debug exports: sparse text triplets (row col re im) and a raw binary dump
// (two int64 dims, then column-major re/im doubles).
void write_matrix_text(std::ostream& out, const std::string& name, const MatrixXcd& A);
void write_matrix_binary(const std::filesystem::path& path, const MatrixXcd& A);
MatrixXcd read_matrix_binary(const std::filesystem::path& path);

}  // namespace qgbc
