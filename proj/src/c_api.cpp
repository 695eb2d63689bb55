#include "sps/sps.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "sps/config.hpp"
#include "sps/errors.hpp"
#include "sps/profile.hpp"
#include "sps/runner.hpp"

struct sps_config {
  sps::RunConfig cfg;
};

struct sps_result {
  sps::RunResult res;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_json;

void clear_error() {
  g_error.clear();
  g_error_json.clear();
}

sps_status set_error(sps::ErrorCode code, const std::string& msg) {
  g_error = msg;
  g_error_json = sps::error_json(code, msg);
  return static_cast<sps_status>(code);
}

// Runs body and converts every exception into a status code.
template <class F>
sps_status guarded(F&& body) {
  clear_error();
  try {
    body();
    return SPS_OK;
  } catch (const sps::Error& e) {
    return set_error(e.code(), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(sps::ErrorCode::internal, "out of memory");
  } catch (const std::exception& e) {
    return set_error(sps::ErrorCode::internal, e.what());
  } catch (...) {
    return set_error(sps::ErrorCode::internal, "unknown error");
  }
}

sps_status null_argument(const char* what) {
  return set_error(sps::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

template <class F>
sps_status run_into(sps_result** out, F&& make) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new sps_result{make()}; });
}

}  // namespace

extern "C" {

const char* sps_version(void) { return "1.0.0"; }

const char* sps_status_name(int status) {
  return sps::error_code_name(static_cast<sps::ErrorCode>(status));
}

const char* sps_last_error(void) { return g_error.c_str(); }
const char* sps_last_error_json(void) { return g_error_json.c_str(); }

sps_status sps_derive_params(int n_dim, double p, sps_params* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto q = sps::derive_params(n_dim, p);
    *out = sps_params{q.n_dim, q.p, q.xi, q.beta, q.sigma, q.c_beta};
  });
}

sps_status sps_profile_value(int n_dim, double p, double t, double r, double* w, double* w_prime) {
  return guarded([&] {
    const sps::ProfileSpec spec{sps::derive_params(n_dim, p), t};
    sps::validate(spec);
    if (!(r > 0.0 && r <= 1.0)) {
      throw sps::Error(sps::ErrorCode::invalid_argument, "r must lie in (0, 1]");
    }
    if (w) *w = sps::w_value(spec, r);
    if (w_prime) *w_prime = sps::w_prime(spec, r);
  });
}

sps_status sps_config_parse(const char* json_text, sps_config** out) {
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const bool empty = !json_text || !*json_text;
    *out = new sps_config{empty ? sps::RunConfig{} : sps::parse_config(json_text)};
  });
}

void sps_config_free(sps_config* config) { delete config; }

sps_status sps_config_echo(const sps_config* config, char** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    const std::string text = sps::echo_config(config->cfg);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

const char* sps_config_out_dir(const sps_config* config) {
  return config ? config->cfg.output.out_dir.c_str() : "";
}

sps_status sps_config_set_out_dir(sps_config* config, const char* dir) {
  if (!config) return null_argument("config");
  if (!dir || !*dir) return set_error(sps::ErrorCode::config, "output.out_dir: must not be empty");
  return guarded([&] { config->cfg.output.out_dir = dir; });
}

sps_status sps_run_params(const sps_config* config, sps_result** out) {
  if (!config) return null_argument("config");
  return run_into(out, [&] { return sps::run_params(config->cfg); });
}

sps_status sps_run_profile(const sps_config* config, int has_t, double t, sps_result** out) {
  if (!config) return null_argument("config");
  return run_into(out, [&] {
    return sps::run_profile(config->cfg, has_t ? std::optional<double>(t) : std::nullopt);
  });
}

sps_status sps_run_solve_linear(const sps_config* config, int k, sps_sign sign, double t,
                                const char* rhs_name, const char* rhs_csv, sps_result** out) {
  if (!config) return null_argument("config");
  return run_into(out, [&] {
    sps::LinearRequest req;
    req.k = k;
    req.sign = sign == SPS_SIGN_PLUS ? sps::Sign::plus : sps::Sign::minus;
    req.t = t;
    if (rhs_name) req.rhs = rhs_name;
    if (rhs_csv) req.rhs_csv = std::string(rhs_csv);
    return sps::run_solve_linear(config->cfg, req);
  });
}

sps_status sps_run_construct(const sps_config* config, sps_result** out) {
  if (!config) return null_argument("config");
  return run_into(out, [&] { return sps::run_construct(config->cfg); });
}

sps_status sps_run_sweep(const sps_config* config, const double* t_list, size_t n_t,
                         sps_result** out) {
  if (!config) return null_argument("config");
  if (n_t > 0 && !t_list) return null_argument("t_list");
  return run_into(out, [&] {
    return sps::run_sweep(config->cfg, std::vector<double>(t_list, t_list + n_t));
  });
}

sps_status sps_run_verify_all(const sps_config* config, const char* timestamp, sps_result** out) {
  if (!config) return null_argument("config");
  return run_into(out, [&] { return sps::run_verify_all(config->cfg, timestamp ? timestamp : ""); });
}

void sps_result_free(sps_result* result) { delete result; }

int sps_result_passed(const sps_result* result) { return result && result->res.passed ? 1 : 0; }

const char* sps_result_report(const sps_result* result) {
  return result ? result->res.report.c_str() : "";
}

size_t sps_result_file_count(const sps_result* result) {
  return result ? result->res.files.size() : 0;
}

sps_status sps_result_file(const sps_result* result, size_t i, const char** path,
                           const char** contents, size_t* size) {
  if (!result) return null_argument("result");
  clear_error();
  if (i >= result->res.files.size()) {
    return set_error(sps::ErrorCode::invalid_argument, "file index out of range");
  }
  const auto& f = result->res.files[i];
  if (path) *path = f.first.c_str();
  if (contents) *contents = f.second.c_str();
  if (size) *size = f.second.size();
  return SPS_OK;
}

void sps_string_free(char* s) { std::free(s); }

}  // extern "C"
