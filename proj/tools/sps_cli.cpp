// Command-line front end. Talks to the library only through sps.h.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sps/sps.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<long long> seed;
  std::optional<double> t;
  std::optional<double> R;
  int k = 0;
  std::string sign = "minus";
  std::string rhs = "power";
  std::vector<double> t_list;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Errors that happen before the library is reached use the same document
// shape as sps_last_error_json().
std::string cli_error_json(int code, const std::string& message) {
  json doc{{"error", {{"code", code}, {"name", sps_status_name(code)}, {"message", message}}}};
  return doc.dump(2) + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int report_error(const std::string& error_doc, const std::string& out_dir) {
  std::cerr << error_doc;
  if (!out_dir.empty()) {
    try {
      write_text(fs::path(out_dir) / "error.json", error_doc);
    } catch (const std::exception&) {
      // The message already went to stderr.
    }
  }
  return kExitError;
}

// Applies command-line overrides on top of the config document.
std::string effective_config(const Options& o, const std::string& sub) {
  json doc = json::object();
  if (!o.config_path.empty()) {
    try {
      doc = json::parse(read_file(o.config_path));
    } catch (const json::parse_error&) {
      // Let the library report the syntax error with its own message.
      return read_file(o.config_path);
    }
  }
  if (!doc.is_object()) return doc.dump();
  if (!o.out_dir.empty()) doc["output"]["out_dir"] = o.out_dir;
  if (o.seed) doc["seed"] = *o.seed;
  if (sub == "construct") {
    if (o.t) doc["fixed_point"]["t"] = *o.t;
    if (o.R) doc["fixed_point"]["R"] = *o.R;
  }
  return doc.dump();
}

int run(const std::string& sub, const Options& o) {
  std::string text;
  try {
    text = effective_config(o, sub);
  } catch (const std::exception& e) {
    return report_error(cli_error_json(SPS_ERR_IO, e.what()), o.out_dir);
  }
  sps_config* cfg = nullptr;
  if (sps_config_parse(text.c_str(), &cfg) != SPS_OK) {
    return report_error(sps_last_error_json(), o.out_dir);
  }
  const std::string out_dir = sps_config_out_dir(cfg);

  sps_result* res = nullptr;
  sps_status st = SPS_OK;
  if (sub == "params") {
    st = sps_run_params(cfg, &res);
  } else if (sub == "profile") {
    st = sps_run_profile(cfg, o.t ? 1 : 0, o.t.value_or(0.0), &res);
  } else if (sub == "solve-linear") {
    if (o.sign != "plus" && o.sign != "minus") {
      sps_config_free(cfg);
      return report_error(cli_error_json(SPS_ERR_INVALID_ARGUMENT, "--sign must be plus or minus"),
                          out_dir);
    }
    std::string csv;
    const bool is_file = fs::is_regular_file(o.rhs);
    if (is_file) {
      try {
        csv = read_file(o.rhs);
      } catch (const std::exception& e) {
        sps_config_free(cfg);
        return report_error(cli_error_json(SPS_ERR_IO, e.what()), out_dir);
      }
    }
    st = sps_run_solve_linear(cfg, o.k, o.sign == "plus" ? SPS_SIGN_PLUS : SPS_SIGN_MINUS,
                              o.t.value_or(0.0), o.rhs.c_str(), is_file ? csv.c_str() : nullptr,
                              &res);
  } else if (sub == "construct") {
    st = sps_run_construct(cfg, &res);
  } else if (sub == "sweep") {
    st = sps_run_sweep(cfg, o.t_list.data(), o.t_list.size(), &res);
  } else if (sub == "verify-all") {
    st = sps_run_verify_all(cfg, utc_timestamp().c_str(), &res);
  }
  sps_config_free(cfg);
  if (st != SPS_OK) return report_error(sps_last_error_json(), out_dir);

  try {
    for (std::size_t i = 0; i < sps_result_file_count(res); ++i) {
      const char* path = nullptr;
      const char* contents = nullptr;
      std::size_t size = 0;
      sps_result_file(res, i, &path, &contents, &size);
      write_text(fs::path(out_dir) / path, std::string(contents, size));
    }
  } catch (const std::exception& e) {
    sps_result_free(res);
    return report_error(cli_error_json(SPS_ERR_IO, e.what()), out_dir);
  }
  if (!o.quiet) std::cout << sps_result_report(res);
  const bool passed = sps_result_passed(res) != 0;
  sps_result_free(res);
  return passed ? 0 : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular positive solutions of a gradient-coupled elliptic system"};
  app.fallthrough();
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", o.out_dir, "Output directory (overrides output.out_dir)");
  app.add_option("--seed", o.seed, "Seed (overrides the config)");
  app.add_flag("--quiet", o.quiet, "Do not print the report");

  app.add_subcommand("params", "Derived constants, identities and mode exponents");
  auto* profile = app.add_subcommand("profile", "Profile w_t on the grid");
  profile->add_option("--t", o.t, "Profile parameter (default profile.t)");

  auto* linear = app.add_subcommand("solve-linear", "Solve one linearized mode equation");
  linear->add_option("--k", o.k, "Mode index")->check(CLI::NonNegativeNumber);
  linear->add_option("--sign", o.sign, "Drift sign: plus or minus");
  linear->add_option("--t", o.t, "Profile parameter");
  linear->add_option("--rhs", o.rhs, "Builtin right-hand side or CSV file with columns r,b");

  auto* construct = app.add_subcommand("construct", "Build the solution pair");
  construct->add_option("--t", o.t, "Fix t instead of searching");
  construct->add_option("--R", o.R, "Fix the ball radius");

  auto* sweep = app.add_subcommand("sweep", "Constructions over several t and a decay report");
  sweep->add_option("--t", o.t_list, "Comma-separated t values")->delimiter(',');

  app.add_subcommand("verify-all", "Run the full certification suite");

  CLI11_PARSE(app, argc, argv);
  return run(app.get_subcommands().front()->get_name(), o);
}
