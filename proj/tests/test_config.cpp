#include "doctest.h"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "sps/errors.hpp"
#include "sps/grid.hpp"
#include "sps/runner.hpp"

using namespace sps;
using nlohmann::json;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  FAIL("expected a config error for " << text);
  return {};
}

const std::string* find_file(const RunResult& r, const std::string& path) {
  for (const auto& f : r.files) {
    if (f.first == path) return &f.second;
  }
  return nullptr;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

RunConfig small_config() {
  auto c = parse_config(R"({"grid": {"nodes": 256}})");
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  const auto c = parse_config("{}");
  CHECK(c == RunConfig{});
  CHECK(c.n_dim == 3);
  CHECK(c.p == 1.6);
  CHECK(c.grid.nodes == 2048);
  CHECK(c.kappa1.c == 0.5);
  CHECK_FALSE(c.fixed_point.R.has_value());
  CHECK(c.verify.inequality_samples == 100000);
}

TEST_CASE("field paths in error messages") {
  CHECK(config_error(R"({"p": 2.5})").rfind("params.p: must be < 2", 0) == 0);
  CHECK(config_error(R"({"params": {"N": 2, "p": 1.5}})").rfind("params.N", 0) == 0);
  CHECK(config_error(R"({"grid": {"nodes": "many"}})").rfind("grid.nodes", 0) == 0);
  CHECK(config_error(R"({"grid": {"nodes": 4}})").rfind("grid.nodes", 0) == 0);
  CHECK(config_error(R"({"grid": {"spacing": 1}})").rfind("grid.spacing: unknown key", 0) == 0);
  CHECK(config_error(R"({"colour": 1})").rfind("colour: unknown key", 0) == 0);
  CHECK(config_error(R"({"kappa1": {"family": "gauss"}})").rfind("kappa1.family", 0) == 0);
  CHECK(config_error(R"({"kappa2": {"c": -1}})").rfind("kappa2", 0) == 0);
  CHECK(config_error(R"({"seed": -3})").rfind("seed", 0) == 0);
  CHECK(config_error(R"({"t": 10, "fixed_point": {"t": 100}})").rfind("t: conflicts", 0) == 0);
  CHECK(config_error(R"({"verify": {"inequality_samples": 10}})")
            .rfind("verify.inequality_samples", 0) == 0);
  CHECK(!config_error("{").empty());
  CHECK(!config_error("[1, 2]").empty());
}

TEST_CASE("nested params, aliases and tables") {
  const auto c = parse_config(
      R"({"params": {"N": 5, "p": 1.4}, "t": 1000,
          "kappa1": {"family": "table", "table": [[0, 0], [0.5, 0.3], [1, 0.1]]}})");
  CHECK(c.n_dim == 5);
  CHECK(c.p == 1.4);
  CHECK(c.fixed_point.t == 1000.0);
  CHECK(c.kappa1.family == KappaFamily::table);
  CHECK(c.kappa1.table.size() == 3);
  CHECK(config_error(R"({"kappa1": {"family": "table", "table": [[0, 0.2]]}})").rfind("kappa1", 0) == 0);
}

TEST_CASE("echo round trip") {
  RunConfig c;
  c.n_dim = 4;
  c.p = 1.7;
  c.fixed_point.R = 0.125;
  c.kappa2 = KappaSpec{KappaFamily::ramp, 0.3, 0.25, {}};
  c.verify.decay_t = {1e3, 1e5};
  c.seed = 1234567890123ULL;
  const auto text = echo_config(c);
  CHECK(parse_config(text) == c);
  CHECK(echo_config(parse_config(text)) == text);
  CHECK(json::parse(text)["fixed_point"]["delta"].is_null());
}

TEST_CASE("params report") {
  const auto r = run_params(RunConfig{});
  const auto doc = json::parse(r.report);
  CHECK(r.passed);
  CHECK(doc["params"]["xi"].get<double>() == doctest::Approx(1.2));
  CHECK(doc["params"]["beta"].get<double>() == doctest::Approx(3.0));
}

TEST_CASE("profile outputs") {
  const auto r = run_profile(small_config(), 100.0);
  const auto* csv = find_file(r, "profile.csv");
  REQUIRE(csv != nullptr);
  CHECK(first_line(*csv) == "r,w,w_prime,scaled_w,scaled_wprime,residual");
  CHECK(std::count(csv->begin(), csv->end(), '\n') == 258);
  CHECK(find_file(r, "report.json") != nullptr);
  CHECK(json::parse(r.report)["t"].get<double>() == 100.0);
}

TEST_CASE("linear solve outputs and CSV right-hand sides") {
  const auto c = small_config();
  LinearRequest req;
  req.k = 2;
  req.sign = Sign::plus;
  req.t = 10.0;
  const auto r = run_solve_linear(c, req);
  const auto* csv = find_file(r, "solution.csv");
  REQUIRE(csv != nullptr);
  CHECK(first_line(*csv) == "r,a,a_prime,residual");
  const auto doc = json::parse(r.report);
  CHECK(doc["k"] == 2);
  CHECK(doc["norm_Y_rhs"].get<double>() == doctest::Approx(1.0));

  // The same right-hand side fed back as CSV gives the same solution.
  const auto g = make_grid(c.grid.r_min, c.grid.nodes);
  const double s = 0.5;
  (void)s;
  std::ostringstream os;
  os << "r,b\n";
  const auto rhs_doc = json::parse(r.report);
  for (std::size_t j = 0; j < g->size(); ++j) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", (*g)[j], std::pow((*g)[j], -2.0 / 3.0 - 2.0));
    os << buf;
  }
  LinearRequest from_csv = req;
  from_csv.rhs_csv = os.str();
  const auto r2 = run_solve_linear(c, from_csv);
  CHECK(json::parse(r2.report)["norm_X"].get<double>() ==
        doctest::Approx(rhs_doc["norm_X"].get<double>()).epsilon(1e-12));

  LinearRequest bad = req;
  bad.rhs = "nonesuch";
  CHECK_THROWS_AS(run_solve_linear(c, bad), Error);
  bad.rhs_csv = "r,b\n0.5,1\n";
  CHECK_THROWS_AS(run_solve_linear(c, bad), Error);
  CHECK(rhs_builtin_names().size() >= 5);
}

TEST_CASE("sweep writes one directory per t") {
  auto c = parse_config(R"({"grid": {"nodes": 512}, "fixed_point": {"R": 0.001953125}})");
  const auto r = run_sweep(c, {1e2, 1e4});
  CHECK(find_file(r, "t_100/solution.csv") != nullptr);
  CHECK(find_file(r, "t_10000/report.json") != nullptr);
  CHECK(find_file(r, "report.json") != nullptr);
  CHECK(find_file(r, "config.json") != nullptr);
}

TEST_CASE("error documents") {
  const auto doc = json::parse(error_json(ErrorCode::config, "grid.nodes: must be an integer"));
  CHECK(doc["error"]["code"] == 3);
  CHECK(doc["error"]["name"] == "config");
  CHECK(doc["error"]["message"] == "grid.nodes: must be an integer");
}
