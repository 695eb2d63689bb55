#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/config.hpp"
#include "sps/errors.hpp"
#include "sps/params.hpp"

namespace sps {

/// Output of one subcommand: the main JSON report and every file to be
/// written below the output directory (relative path, contents). Nothing
/// here touches the file system.
struct RunResult {
  std::string report;
  std::vector<std::pair<std::string, std::string>> files;
  bool passed = true;
};

RunResult run_params(const RunConfig& config);

/// Profile CSV and summary for t (profile.t from the config when absent).
RunResult run_profile(const RunConfig& config, std::optional<double> t = std::nullopt);

struct LinearRequest {
  int k = 0;
  Sign sign = Sign::minus;
  double t = 0.0;
  /// Builtin right-hand side name (see rhs_builtin_names) or, when
  /// rhs_csv is set, ignored.
  std::string rhs = "power";
  /// CSV text with columns r,b sampled on the configured grid.
  std::optional<std::string> rhs_csv;
};

std::vector<std::string> rhs_builtin_names();
RunResult run_solve_linear(const RunConfig& config, const LinearRequest& request);

/// Builds the pair for the configured kappas. Missing t or R are chosen by
/// choose_parameters with the given values held fixed.
RunResult run_construct(const RunConfig& config);

/// One construction per t (subdirectory t_<value>) plus a combined decay
/// report. An empty list falls back to verify.decay_t.
RunResult run_sweep(const RunConfig& config, const std::vector<double>& t_list);

/// Full certification suite. The verdict maps each check to
/// {pass, metric, tolerance}; `timestamp` goes into the metadata block and
/// is the only run-dependent field.
RunResult run_verify_all(const RunConfig& config, const std::string& timestamp);

/// {"error": {"code", "name", "message"}}.
std::string error_json(ErrorCode code, const std::string& message);

}  // namespace sps
