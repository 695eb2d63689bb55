#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sps/fixed_point.hpp"

namespace sps {

struct GridConfig {
  double r_min = 1e-6;
  int nodes = 2048;

  bool operator==(const GridConfig&) const = default;
};

struct FixedPointConfig {
  std::optional<double> R;
  std::optional<double> delta;
  std::optional<double> t;
  double tol = 1e-8;
  int max_iter = 200;

  bool operator==(const FixedPointConfig&) const = default;
};

struct OutputConfig {
  std::string out_dir = "out";
  bool emit_csv = true;
  bool emit_json = true;

  bool operator==(const OutputConfig&) const = default;
};

struct VerifyConfig {
  double rho = 0.1;
  std::vector<double> decay_t{1e2, 1e3, 1e4};
  std::vector<double> residual_t{0.0, 1.0, 1e2, 1e4};
  std::vector<double> stability_t{0.0, 1.0, 10.0, 1e2, 1e3, 1e4};
  std::vector<double> inequality_p{1.1, 1.5, 2.0};
  std::vector<int> inequality_dims{1, 2, 3, 5};
  std::uint64_t inequality_samples = 100000;
  int random_params = 50;

  bool operator==(const VerifyConfig&) const = default;
};

struct RunConfig {
  int n_dim = 3;
  double p = 1.6;
  GridConfig grid;
  double profile_t = 0.0;
  KappaSpec kappa1{KappaFamily::power, 0.5, 0.5, {}};
  KappaSpec kappa2{KappaFamily::power, 0.5, 0.5, {}};
  FixedPointConfig fixed_point;
  OutputConfig output;
  VerifyConfig verify;
  std::uint64_t seed = 1;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON document. Missing fields take the defaults
/// above; unknown keys, wrong types and out-of-range values throw
/// Error(config) whose message starts with the dotted field path. N and p may sit at the top level or inside "params"; a
/// top-level "t" is the construction t (same as fixed_point.t).
RunConfig parse_config(const std::string& text);

/// Canonical JSON with every default written out (absent optionals as
/// null). parse_config(echo_config(c)) == c.
std::string echo_config(const RunConfig& config);

}  // namespace sps
