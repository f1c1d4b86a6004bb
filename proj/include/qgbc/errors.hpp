#pragma once

#include <stdexcept>
#include <string>

namespace qgbc {

// Error codes carried by every exception thrown from the library. The CLI
// maps these to process exit codes; see tools/qgbc.cpp.
enum class errc {
  duplicate_assignment,
  dangling_endpoint,
  nonpositive_length,
  disconnected,
  param_mismatch,
  no_gap,
  mesh_bc_mismatch,
  eigensolve_fail,
  not_positive,
  out_of_domain,
  at_breakpoint,
  not_piecewise_constant,
  a1_violation,
  a3_unbounded,
  a4_divergent,
  budget_exhausted,
  config_invalid,
  io_error,
};

const char* errc_name(errc c);

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace qgbc
