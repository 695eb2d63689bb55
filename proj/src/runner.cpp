#include "sps/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "sps/linear_system.hpp"
#include "sps/mode_solver.hpp"
#include "sps/profile.hpp"
#include "sps/verify.hpp"

namespace sps {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV with a header row and one row per grid node.
std::string csv_columns(const std::vector<std::string>& header,
                        const std::vector<const std::vector<double>*>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += "\n";
  const std::size_t n = columns.front()->size();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ",";
      out += fmt17((*columns[c])[j]);
    }
    out += "\n";
  }
  return out;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

GridPtr config_grid(const RunConfig& c) { return make_grid(c.grid.r_min, c.grid.nodes); }

void add_outputs(RunResult& res, const RunConfig& c, const std::string& prefix, json report,
                 std::vector<std::pair<std::string, std::string>> csv) {
  if (c.output.emit_csv) {
    for (auto& f : csv) res.files.emplace_back(prefix + f.first, std::move(f.second));
  }
  res.report = dump(report);
  if (c.output.emit_json) res.files.emplace_back(prefix + "report.json", res.report);
}

std::string t_label(double t) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "t_%g", t);
  return buf;
}

json params_json(const Params& q) {
  return {{"N", q.n_dim}, {"p", q.p}, {"xi", q.xi}, {"beta", q.beta}, {"sigma", q.sigma},
          {"c_beta", q.c_beta}};
}

json certificate_json(const ParameterCertificate& c) {
  return {{"R", c.R},
          {"delta", c.delta},
          {"t", c.t},
          {"c_linear", c.c_linear},
          {"c_nonlinear", c.c_nonlinear},
          {"c_measured", c.c_measured},
          {"into_lhs", c.into_lhs},
          {"contraction_lhs", c.contraction_lhs},
          {"into_margin", c.into_margin},
          {"contraction_margin", c.contraction_margin},
          {"probe_into", c.probe_into},
          {"probe_contraction", c.probe_contraction},
          {"candidates_tested", c.candidates_tested}};
}

json iteration_json(const IterationReport& r) {
  json its = json::array();
  for (const auto& it : r.iterations) {
    its.push_back({{"index", it.index},
                   {"norm_X_phi", it.norm_X_phi},
                   {"norm_X_psi", it.norm_X_psi},
                   {"step_norm", it.step_norm},
                   {"ratio", it.ratio}});
  }
  return {{"iterations", its},
          {"converged", r.converged},
          {"empirical_contraction", r.empirical_contraction},
          {"fixed_point_defect", r.fixed_point_defect},
          {"R", r.R},
          {"delta", r.delta},
          {"t", r.t}};
}

struct NamedRhs {
  const char* name;
  std::function<double(double, double)> f;  // (r, sigma)
};

// The first five carry the full r^(-sigma-2) singularity and form the
// stability family; the rest are milder or oscillating data.
const std::vector<NamedRhs>& named_rhs() {
  static const std::vector<NamedRhs> list{
      {"power", [](double r, double s) { return std::pow(r, -s - 2.0); }},
      {"power_cut", [](double r, double s) { return std::pow(r, -s - 2.0) * (1.0 - r); }},
      {"power_lift", [](double r, double s) { return std::pow(r, -s - 2.0) * (1.0 + r); }},
      {"power_cut2", [](double r, double s) { return std::pow(r, -s - 2.0) * (1.0 - r) * (1.0 - r); }},
      {"power_cos", [](double r, double s) { return std::pow(r, -s - 2.0) * std::cos(3.0 * r); }},
      {"mild", [](double r, double s) { return std::pow(r, -s - 1.0); }},
      {"constant", [](double, double) { return 1.0; }},
      {"oscillating",
       [](double r, double s) { return std::pow(r, -s - 2.0) * std::cos(2.0 * std::log(r)); }},
  };
  return list;
}

RadialField unit_rhs(const NamedRhs& n, const GridPtr& grid, double sigma) {
  auto field = sample_field(grid, [&](double r) { return n.f(r, sigma); });
  return scaled(1.0 / norm_Y(field, sigma), field);
}

// Right-hand sides with norm_Y = 1: the stability family, or every builtin.
std::vector<RadialField> rhs_family(const GridPtr& grid, double sigma, bool all = false) {
  std::vector<RadialField> out;
  const auto& list = named_rhs();
  const std::size_t n = all ? list.size() : 5;
  for (std::size_t i = 0; i < n; ++i) out.push_back(unit_rhs(list[i], grid, sigma));
  return out;
}

RadialField builtin_rhs(const std::string& name, const GridPtr& grid, double sigma) {
  if (name == "zero") return zero_field(grid, false);
  for (const auto& n : named_rhs()) {
    if (name == n.name) return unit_rhs(n, grid, sigma);
  }
  throw Error(ErrorCode::invalid_argument, "unknown builtin right-hand side '" + name + "'");
}

RadialField csv_rhs(const std::string& text, const GridPtr& grid) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io, "rhs CSV is empty");
  if (line.rfind("r,", 0) != 0) {
    throw Error(ErrorCode::io, "rhs CSV must start with a header 'r,<column>'");
  }
  RadialField out = zero_field(grid, false);
  std::size_t j = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (j >= grid->size()) throw Error(ErrorCode::io, "rhs CSV has more rows than grid nodes");
    double r = 0.0, b = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &r, &b) != 2) {
      throw Error(ErrorCode::io, "rhs CSV row " + std::to_string(j + 1) + " is malformed");
    }
    if (std::abs(r - (*grid)[j]) > 1e-12 * (*grid)[j]) {
      throw Error(ErrorCode::grid_mismatch,
                  "rhs CSV row " + std::to_string(j + 1) + " is not at grid node r = " +
                      fmt17((*grid)[j]));
    }
    out.values[j++] = b;
  }
  if (j != grid->size()) throw Error(ErrorCode::io, "rhs CSV has fewer rows than grid nodes");
  return out;
}

struct Construction {
  SolutionPair pair;
  IterationReport iteration;
  std::optional<ParameterCertificate> certificate;
  double R = 0.0;
  double delta = 0.0;
  double t = 0.0;
};

Construction construct(const RunConfig& c, const Params& q, const GridPtr& grid,
                       std::optional<double> t_override = std::nullopt,
                       std::optional<double> R_override = std::nullopt) {
  const auto& fp = c.fixed_point;
  Construction out;
  const std::optional<double> t = t_override ? t_override : fp.t;
  const std::optional<double> R = R_override ? R_override : fp.R;
  if (t && R) {
    out.t = *t;
    out.R = *R;
    out.delta = fp.delta.value_or(0.0);
  } else {
    SearchOptions opt;
    opt.t = t;
    opt.R = R;
    opt.delta = fp.delta;
    opt.seed = c.seed;
    out.certificate = choose_parameters(q, c.kappa1, c.kappa2, grid, opt);
    out.t = out.certificate->t;
    out.R = out.certificate->R;
    out.delta = out.certificate->delta;
  }
  const auto prob = make_problem(q, out.t, c.kappa1, c.kappa2, grid);
  std::tie(out.pair, out.iteration) = picard(prob, out.R, fp.tol, fp.max_iter, out.delta);
  return out;
}

std::pair<json, std::string> construction_outputs(const Construction& k, const RunConfig& c,
                                                  const Params& q) {
  const auto res = system_residual(q, k.pair, c.kappa1, c.kappa2);
  json rep;
  rep["params"] = params_json(q);
  rep["chosen"] = {{"R", k.R},
                   {"delta", k.delta},
                   {"t", k.t},
                   {"source", k.certificate ? "choose_parameters" : "config"}};
  rep["certificate"] = k.certificate ? certificate_json(*k.certificate) : json(nullptr);
  rep["iteration"] = iteration_json(k.iteration);
  rep["system_residual"] = {{"weighted_u", res.weighted_u}, {"weighted_v", res.weighted_v}};
  const auto& p = k.pair;
  const auto nodes = p.u.grid->nodes();
  const std::vector<double> r(nodes.begin(), nodes.end());
  const std::string csv =
      csv_columns({"r", "w", "phi", "psi", "u", "v", "u_prime", "v_prime"},
                  {&r, &p.w.values, &p.phi.values, &p.psi.values, &p.u.values, &p.v.values,
                   &p.u.deriv, &p.v.deriv});
  return {rep, csv};
}

}  // namespace

std::vector<std::string> rhs_builtin_names() {
  std::vector<std::string> out{"zero"};
  for (const auto& n : named_rhs()) out.emplace_back(n.name);
  return out;
}

std::string error_json(ErrorCode code, const std::string& message) {
  json doc{{"error",
            {{"code", static_cast<int>(code)}, {"name", error_code_name(code)}, {"message", message}}}};
  return dump(doc);
}

RunResult run_params(const RunConfig& c) {
  const Params q = derive_params(c.n_dim, c.p);
  json rep;
  rep["params"] = params_json(q);
  json ids = json::array();
  double worst = 0.0;
  for (const auto& id : params_identities(q)) {
    ids.push_back({{"name", id.name}, {"lhs", id.lhs}, {"rhs", id.rhs}, {"rel_error", id.rel_error}});
    worst = std::max(worst, id.rel_error);
  }
  rep["identities"] = ids;
  RunResult res;
  res.passed = worst <= 1e-12;
  try {
    const auto cert = sign_certificate(q);
    rep["sign_certificate"] = {{"direct", cert.direct},
                               {"closed_form", cert.closed_form},
                               {"rel_difference", cert.rel_difference},
                               {"passed", cert.passed}};
  } catch (const Error& e) {
    rep["sign_certificate"] = {{"passed", false}, {"message", e.what()}};
    res.passed = false;
  }
  json modes = json::array();
  for (int k = 0; k <= 5; ++k) {
    for (Sign s : {Sign::minus, Sign::plus}) {
      const auto m = mode_exponents(q, k, s);
      modes.push_back({{"k", k},
                       {"sign", sign_name(s)},
                       {"lambda_k", m.lambda_k},
                       {"gamma_plus", m.gamma_plus},
                       {"gamma_minus", m.gamma_minus}});
    }
  }
  rep["mode_exponents"] = modes;
  rep["passed"] = res.passed;
  add_outputs(res, c, "", rep, {});
  return res;
}

RunResult run_profile(const RunConfig& c, std::optional<double> t_opt) {
  const Params q = derive_params(c.n_dim, c.p);
  const double t = t_opt.value_or(c.profile_t);
  const ProfileSpec spec{q, t};
  validate(spec);
  const auto grid = config_grid(c);
  const auto w = profile_field(spec, grid);
  const auto res = scalar_residual(spec, grid);
  const auto res_fd = scalar_residual_fd(spec, grid);

  const std::size_t n = grid->size();
  std::vector<double> r(n), scaled_w(n), scaled_wp(n);
  double identity_error = 0.0;
  double closed_form_error = 0.0;
  bool monotone = true;
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = (*grid)[j];
    scaled_w[j] = std::pow(r[j], q.sigma) * w.values[j];
    scaled_wp[j] = std::pow(r[j], q.sigma + 1.0) * w.deriv[j];
    const double exact = -std::pow(t * std::pow(r[j], q.xi - 1.0) + q.beta, -1.0 / (q.p - 1.0));
    identity_error = std::max(identity_error, std::abs(scaled_wp[j] - exact) / std::abs(exact));
    if (j > 0 && scaled_wp[j - 1] > scaled_wp[j] + 1e-14 * std::abs(scaled_wp[j])) monotone = false;
    if (t == 0.0 && j + 1 < n) {
      const double cf = w0_closed_form(q, r[j]);
      closed_form_error = std::max(closed_form_error, std::abs(w.values[j] - cf) / std::abs(cf));
    }
  }
  json rep;
  rep["params"] = params_json(q);
  rep["t"] = t;
  try {
    const auto lim = sigma_limit_constant(spec);
    rep["C_estimate"] = lim.estimate;
    rep["C_bracket"] = lim.bracket;
  } catch (const Error& e) {
    rep["C_estimate"] = nullptr;
    rep["C_bracket"] = nullptr;
    rep["C_error"] = e.what();
  }
  rep["weighted_residual"] = res.weighted;
  rep["weighted_residual_fd"] = res_fd.weighted;
  json checks;
  checks["scalar_residual"] = {{"pass", res.weighted <= 1e-8}, {"metric", res.weighted},
                               {"tolerance", 1e-8}};
  checks["scaled_derivative_identity"] = {
      {"pass", identity_error <= 1e-13}, {"metric", identity_error}, {"tolerance", 1e-13}};
  checks["scaled_derivative_monotone"] = {{"pass", monotone}, {"metric", monotone ? 0.0 : 1.0},
                                          {"tolerance", 0.0}};
  if (t == 0.0) {
    checks["closed_form"] = {{"pass", closed_form_error <= 1e-9},
                             {"metric", closed_form_error},
                             {"tolerance", 1e-9}};
  }
  RunResult out;
  for (const auto& [name, chk] : checks.items()) out.passed = out.passed && chk["pass"].get<bool>();
  rep["checks"] = checks;
  add_outputs(out, c, "", rep,
              {{"profile.csv",
                csv_columns({"r", "w", "w_prime", "scaled_w", "scaled_wprime", "residual"},
                            {&r, &w.values, &w.deriv, &scaled_w, &scaled_wp, &res.residual.values})}});
  return out;
}

RunResult run_solve_linear(const RunConfig& c, const LinearRequest& req) {
  const Params q = derive_params(c.n_dim, c.p);
  const auto grid = config_grid(c);
  if (req.k < 0) throw Error(ErrorCode::invalid_argument, "--k must be >= 0");
  const RadialField b = req.rhs_csv ? csv_rhs(*req.rhs_csv, grid) : builtin_rhs(req.rhs, grid, q.sigma);
  const ModeSpec spec{q, req.k, req.sign, req.t};
  const auto sol = solve_mode(spec, b);
  const auto residual = mode_residual(spec, sol.a, b);
  const double nx = norm_X(sol.a, q.sigma);
  const double ny = norm_Y(b, q.sigma);
  json rep;
  rep["params"] = params_json(q);
  rep["k"] = req.k;
  rep["sign"] = sign_name(req.sign);
  rep["t"] = req.t;
  rep["rhs"] = req.rhs_csv ? "csv" : req.rhs;
  rep["method"] = solve_method_name(sol.method);
  rep["norm_X"] = nx;
  rep["norm_Y_rhs"] = ny;
  rep["ratio"] = ny > 0.0 ? json(nx / ny) : json(nullptr);
  rep["weighted_residual"] = weighted_mode_residual(spec, sol.a, b);
  const auto nodes = grid->nodes();
  const std::vector<double> r(nodes.begin(), nodes.end());
  RunResult out;
  add_outputs(out, c, "", rep,
              {{"solution.csv", csv_columns({"r", "a", "a_prime", "residual"},
                                            {&r, &sol.a.values, &sol.a.deriv, &residual})}});
  return out;
}

RunResult run_construct(const RunConfig& c) {
  const Params q = derive_params(c.n_dim, c.p);
  const auto grid = config_grid(c);
  const auto k = construct(c, q, grid);
  auto [rep, csv] = construction_outputs(k, c, q);
  RunResult out;
  out.passed = k.iteration.converged;
  add_outputs(out, c, "", rep, {{"solution.csv", std::move(csv)}});
  out.files.emplace_back("config.json", echo_config(c));
  return out;
}

RunResult run_sweep(const RunConfig& c, const std::vector<double>& t_in) {
  const Params q = derive_params(c.n_dim, c.p);
  const auto grid = config_grid(c);
  const std::vector<double> t_list = t_in.empty() ? c.verify.decay_t : t_in;
  double R = 0.0;
  std::optional<ParameterCertificate> cert;
  if (c.fixed_point.R) {
    R = *c.fixed_point.R;
  } else {
    SearchOptions opt;
    opt.seed = c.seed;
    opt.delta = c.fixed_point.delta;
    cert = choose_parameters(q, c.kappa1, c.kappa2, grid, opt);
    R = cert->R;
  }
  RunResult out;
  for (double t : t_list) {
    const auto k = construct(c, q, grid, t, R);
    auto [rep, csv] = construction_outputs(k, c, q);
    RunResult sub;
    add_outputs(sub, c, t_label(t) + "/", rep, {{"solution.csv", std::move(csv)}});
    for (auto& f : sub.files) out.files.push_back(std::move(f));
  }
  const auto decay = decay_in_t(q, c.kappa1, c.kappa2, grid, c.verify.rho, t_list, R,
                                c.fixed_point.tol, c.fixed_point.max_iter);
  json entries = json::array();
  for (const auto& e : decay.entries) {
    entries.push_back({{"t", e.t},
                       {"directory", t_label(e.t)},
                       {"certified", e.certified},
                       {"iterations", e.iterations},
                       {"sup_u", e.sup_u},
                       {"sup_v", e.sup_v},
                       {"sup_w", e.sup_w},
                       {"profile_bound", e.profile_bound},
                       {"r_contribution", e.r_contribution},
                       {"below_bound", e.below_bound}});
  }
  json rep;
  rep["params"] = params_json(q);
  rep["rho"] = decay.rho;
  rep["R"] = decay.R;
  rep["R_certificate"] = cert ? certificate_json(*cert) : json(nullptr);
  rep["entries"] = entries;
  rep["strictly_decreasing"] = decay.strictly_decreasing;
  rep["all_below_bound"] = decay.all_below_bound;
  out.passed = decay.strictly_decreasing && decay.all_below_bound;
  RunResult top;
  add_outputs(top, c, "", rep, {});
  out.report = top.report;
  for (auto& f : top.files) out.files.push_back(std::move(f));
  out.files.emplace_back("config.json", echo_config(c));
  return out;
}

namespace {

class Verdict {
 public:
  void add(const std::string& name, bool pass, double metric, double tolerance) {
    checks_[name] = {{"pass", pass}, {"metric", metric}, {"tolerance", tolerance}};
    passed_ = passed_ && pass;
  }
  // A check that could not run: recorded as failed with the reason in details.
  void fail(const std::string& name, double tolerance, const std::string& reason, json& details) {
    add(name, false, std::numeric_limits<double>::quiet_NaN(), tolerance);
    details[name] = {{"error", reason}};
  }
  bool passed() const { return passed_; }
  json& checks() { return checks_; }

 private:
  json checks_ = json::object();
  bool passed_ = true;
};

std::vector<Params> random_params(std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> n_dist(3, 10);
  std::uniform_real_distribution<double> u_dist(0.01, 0.99);
  std::vector<Params> out;
  for (int i = 0; i < count; ++i) {
    const int n = n_dist(rng);
    const double lo = static_cast<double>(n) / (n - 1);
    out.push_back(derive_params(n, lo + (2.0 - lo) * u_dist(rng)));
  }
  return out;
}

void check_params(Verdict& v, json& d, const RunConfig& c, const Params& q) {
  std::mt19937_64 rng(c.seed);
  auto list = random_params(rng, c.verify.random_params);
  list.insert(list.begin(), q);
  double id_err = 0.0, cert_err = 0.0;
  bool cert_ok = true;
  for (const auto& p : list) {
    for (const auto& id : params_identities(p)) id_err = std::max(id_err, id.rel_error);
    try {
      const auto cert = sign_certificate(p);
      cert_err = std::max(cert_err, cert.rel_difference);
      cert_ok = cert_ok && cert.passed && cert.direct < 0.0;
    } catch (const Error&) {
      cert_ok = false;
    }
  }
  v.add("params_identities", id_err <= 1e-10, id_err, 1e-10);
  v.add("sign_certificate", cert_ok && cert_err <= 1e-10, cert_err, 1e-10);
  d["params_identities"] = {{"parameter_sets", list.size()}};

  std::mt19937_64 rng2(c.seed + 1);
  const auto kernel_list = random_params(rng2, 20);
  double poly_err = 0.0;
  bool straddle = true;
  for (const auto& p : kernel_list) {
    for (int k = 1; k <= 50; ++k) {
      const auto m = mode_exponents(p, k, Sign::minus);
      straddle = straddle && m.gamma_minus + p.sigma <= -1.0 && m.gamma_plus + p.sigma > 0.0;
      for (double g : {m.gamma_plus, m.gamma_minus}) {
        poly_err = std::max(poly_err,
                            std::abs(characteristic_value(p, k, Sign::minus, g)) / (1.0 + m.lambda_k));
      }
    }
  }
  v.add("kernel_exponents", straddle && poly_err <= 1e-10, poly_err, 1e-10);
}

void check_profile(Verdict& v, json& d, const RunConfig& c, const Params& q, const GridPtr& grid) {
  const auto w0 = profile_field(ProfileSpec{q, 0.0}, grid);
  double cf_err = 0.0;
  for (std::size_t j = 0; j + 1 < grid->size(); ++j) {
    const double cf = w0_closed_form(q, (*grid)[j]);
    cf_err = std::max(cf_err, std::abs(w0.values[j] - cf) / std::abs(cf));
  }
  v.add("profile_closed_form", cf_err <= 1e-9, cf_err, 1e-9);

  double res = 0.0, id_err = 0.0;
  bool monotone = true;
  json per_t = json::array();
  for (double t : c.verify.residual_t) {
    const ProfileSpec spec{q, t};
    const double wr = scalar_residual(spec, grid).weighted;
    res = std::max(res, wr);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid->size(); ++j) {
      const double r = (*grid)[j];
      const double s = std::pow(r, q.sigma + 1.0) * w_prime(spec, r);
      const double exact = -std::pow(t * std::pow(r, q.xi - 1.0) + q.beta, -1.0 / (q.p - 1.0));
      id_err = std::max(id_err, std::abs(s - exact) / std::abs(exact));
      // Going outward the scaled derivative moves away from -C_beta.
      if (s < prev - 1e-14 * std::abs(prev) || s < -q.c_beta * (1.0 + 1e-14)) monotone = false;
      prev = s;
    }
    per_t.push_back({{"t", t}, {"weighted_residual", wr}});
  }
  d["scalar_residual"] = per_t;
  v.add("scalar_residual", res <= 1e-8, res, 1e-8);
  v.add("scaled_derivative_identity", id_err <= 1e-13, id_err, 1e-13);
  v.add("scaled_derivative_monotone", monotone, monotone ? 0.0 : 1.0, 0.0);

  json lb = json::array();
  double worst = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (double t : {0.0, 1e3}) {
    try {
      const auto r = profile_lower_bound(q, t, default_z_cut(q, t), c.grid.r_min);
      worst = std::min(worst, r.min_margin);
      lb.push_back({{"t", t}, {"z_cut", r.z_cut}, {"c_star", r.c_star}, {"min_margin", r.min_margin},
                    {"r_at_min", r.r_at_min}, {"r_lo", r.r_lo}});
    } catch (const Error& e) {
      ok = false;
      lb.push_back({{"t", t}, {"error", e.what()}});
    }
  }
  d["profile_lower_bound"] = lb;
  v.add("profile_lower_bound", ok && worst >= 0.0, ok ? worst : -1.0, 0.0);
}

void check_linear(Verdict& v, json& d, const RunConfig& c, const Params& q, const GridPtr& grid) {
  const auto family = rhs_family(grid, q.sigma);
  // Random combinations of the family for the cross-validation.
  std::mt19937_64 rng(c.seed + 2);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  double agree = 0.0;
  for (int i = 0; i < 5; ++i) {
    RadialField b = zero_field(grid, false);
    for (const auto& m : family) b = combine(1.0, b, coef(rng), m);
    b = scaled(1.0 / norm_Y(b, q.sigma), b);
    for (int k : {1, 2, 5}) {
      for (Sign s : {Sign::minus, Sign::plus}) {
        const ModeSpec spec{q, k, s, 0.0};
        const auto a = solve_mode_t0(spec, b).a;
        const auto a_bvp = solve_mode_bvp(spec, b).a;
        agree = std::max(agree, norm_X(combine(1.0, a_bvp, -1.0, a), q.sigma));
      }
    }
  }
  v.add("mode_bvp_vs_t0", agree <= 1e-5, agree, 1e-5);

  double spread = 0.0;
  json modes = json::array();
  for (int k : {0, 1}) {
    for (Sign s : {Sign::minus, Sign::plus}) {
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double t : c.verify.stability_t) {
        for (const auto& b : family) {
          const auto a = solve_mode(ModeSpec{q, k, s, t}, b).a;
          const double ratio = norm_X(a, q.sigma);  // norm_Y(b) = 1
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
        }
      }
      spread = std::max(spread, hi / lo);
      modes.push_back({{"k", k}, {"sign", sign_name(s)}, {"min_ratio", lo}, {"max_ratio", hi}});
    }
  }
  d["stability_modes"] = modes;
  v.add("stability_modes", spread < 10.0, spread, 10.0);

  // Spread along t alone, member by member, over every builtin shape.
  double t_spread = 0.0;
  for (const auto& b : rhs_family(grid, q.sigma, true)) {
    for (int k : {0, 1}) {
      for (Sign s : {Sign::minus, Sign::plus}) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double t : c.verify.stability_t) {
          const double ratio = norm_X(solve_mode(ModeSpec{q, k, s, t}, b).a, q.sigma);
          lo = std::min(lo, ratio);
          hi = std::max(hi, ratio);
        }
        t_spread = std::max(t_spread, hi / lo);
      }
    }
  }
  v.add("stability_t_uniformity", t_spread < 10.0, t_spread, 10.0);

  std::vector<CoupledRHS> pairs;
  for (std::size_t i = 0; i < family.size(); ++i) {
    pairs.push_back({family[i], family[(i + 1) % family.size()]});
  }
  const auto sweep = stability_sweep(q, c.verify.stability_t, pairs);
  d["stability_coupled"] = {{"min_ratio", sweep.min_ratio}, {"max_ratio", sweep.max_ratio}};
  v.add("stability_coupled", sweep.spread < 10.0, sweep.spread, 10.0);
}

void check_construction(Verdict& v, json& d, const RunConfig& c, const Params& q,
                        const GridPtr& grid) {
  Construction k;
  try {
    k = construct(c, q, grid);
  } catch (const Error& e) {
    for (const char* name : {"construction", "picard_contraction", "system_residual",
                             "positivity", "blowup_bracket", "decay_in_t"}) {
      v.fail(name, 0.0, e.what(), d);
    }
    return;
  }
  const auto& it = k.iteration;
  const double last = it.iterations.empty() ? 0.0 : it.iterations.back().step_norm;
  d["construction"] = {{"chosen", {{"R", k.R}, {"delta", k.delta}, {"t", k.t}}},
                       {"certificate", k.certificate ? certificate_json(*k.certificate) : json(nullptr)},
                       {"iteration", iteration_json(it)}};
  v.add("construction", it.converged && last <= 1e-8 && it.iterations.size() <= 50, last, 1e-8);
  v.add("picard_contraction", it.empirical_contraction <= 0.9, it.empirical_contraction, 0.9);

  const auto res = system_residual(q, k.pair, c.kappa1, c.kappa2);
  const double wr = std::max(res.weighted_u, res.weighted_v);
  v.add("system_residual", wr <= 1e-4, wr, 1e-4);

  // With kappa = 0 the pair is (w, w) and the residual must be the scalar one.
  const KappaSpec none{KappaFamily::power, 0.0, 1.0, {}};
  const auto w = profile_field(ProfileSpec{q, k.t}, grid);
  SolutionPair clean{zero_field(grid), zero_field(grid), w, w, w, k.t, k.R};
  const double r0 = system_residual(q, clean, none, none).weighted_u;
  const double rs = scalar_residual_fd(ProfileSpec{q, k.t}, grid).weighted;
  const double gap = std::abs(r0 - rs);
  v.add("system_residual_kappa0", gap <= 1e-12 * std::max(rs, 1e-300) + 1e-300 || gap == 0.0, gap,
        1e-12);

  try {
    const auto pos = positivity_and_blowup(q, k.pair);
    d["positivity"] = {{"min_u", pos.min_u},
                       {"min_v", pos.min_v},
                       {"limit_constant", pos.limit_constant},
                       {"limit_bracket", pos.limit_bracket},
                       {"window_top", pos.window_top},
                       {"c_low", pos.c_low},
                       {"c_high", pos.c_high},
                       {"c_low_actual", pos.c_low_actual},
                       {"min_scaled_u", pos.min_scaled_u},
                       {"max_scaled_u", pos.max_scaled_u},
                       {"min_scaled_v", pos.min_scaled_v},
                       {"max_scaled_v", pos.max_scaled_v},
                       {"sup_deviation", pos.sup_deviation}};
    v.add("positivity", true, std::min(pos.min_u, pos.min_v), 0.0);
    v.add("blowup_bracket", pos.in_bracket && pos.deviation_ok && pos.c_low_actual_positive,
          pos.sup_deviation, k.R);
  } catch (const Error& e) {
    v.fail("positivity", 0.0, e.what(), d);
    v.fail("blowup_bracket", k.R, e.what(), d);
  }

  try {
    const auto dec = decay_in_t(q, c.kappa1, c.kappa2, grid, c.verify.rho, c.verify.decay_t, k.R,
                                c.fixed_point.tol, c.fixed_point.max_iter);
    json entries = json::array();
    double worst = 0.0;
    for (const auto& e : dec.entries) {
      const double cap = e.profile_bound + e.r_contribution;
      worst = std::max(worst, std::max(e.sup_u, e.sup_v) / cap);
      entries.push_back({{"t", e.t}, {"certified", e.certified}, {"sup_u", e.sup_u},
                         {"sup_v", e.sup_v}, {"sup_w", e.sup_w}, {"profile_bound", e.profile_bound},
                         {"r_contribution", e.r_contribution}, {"below_bound", e.below_bound}});
    }
    d["decay_in_t"] = {{"rho", dec.rho}, {"R", dec.R}, {"entries", entries},
                       {"strictly_decreasing", dec.strictly_decreasing}};
    v.add("decay_in_t", dec.strictly_decreasing && dec.all_below_bound, worst, 1.0);
  } catch (const Error& e) {
    v.fail("decay_in_t", 1.0, e.what(), d);
  }
}

void check_inequalities(Verdict& v, json& d, const RunConfig& c) {
  const auto& vc = c.verify;
  const auto rep = inequality_suite(vc.inequality_p, vc.inequality_dims, vc.inequality_samples, c.seed);
  double change = 0.0, homog = 0.0, p2 = 0.0;
  bool zero = true, finite = true, any_p2 = false;
  json cases = json::array();
  for (const auto& cs : rep.cases) {
    zero = zero && cs.zero_cases_exact;
    if (cs.p == 2.0) {
      any_p2 = true;
      p2 = std::max(p2, cs.p2_identity_error);
    }
    json sups = json::object();
    for (const auto& st : cs.stats) {
      change = std::max(change, st.relative_change);
      homog = std::max(homog, st.homogeneity_error);
      finite = finite && st.finite;
      sups[st.name] = {{"sup", st.sup}, {"sup_doubled", st.sup_doubled},
                                        {"skipped", st.skipped}};
    }
    cases.push_back({{"p", cs.p}, {"dim", cs.dim}, {"ratios", sups}});
  }
  d["inequalities"] = cases;
  v.add("inequality_zero_cases", zero, zero ? 0.0 : 1.0, 0.0);
  if (any_p2) v.add("inequality_p2_identity", p2 <= 1e-12, p2, 1e-12);
  v.add("inequality_sup_stability", finite && change < 0.05, change, 0.05);
  v.add("inequality_homogeneity", homog <= 1e-10, homog, 1e-10);
}

}  // namespace

RunResult run_verify_all(const RunConfig& c, const std::string& timestamp) {
  const Params q = derive_params(c.n_dim, c.p);
  const auto grid = config_grid(c);
  Verdict v;
  json details = json::object();
  check_params(v, details, c, q);
  check_profile(v, details, c, q, grid);
  check_linear(v, details, c, q, grid);
  check_construction(v, details, c, q, grid);
  check_inequalities(v, details, c);

  json verdict = v.checks();
  verdict["metadata"] = {{"timestamp", timestamp}, {"seed", c.seed}, {"all_passed", v.passed()}};
  RunResult out;
  out.passed = v.passed();
  out.report = dump(verdict);
  if (c.output.emit_json) {
    out.files.emplace_back("verdict.json", out.report);
    out.files.emplace_back("details.json", dump(details));
  }
  out.files.emplace_back("config.json", echo_config(c));
  return out;
}

}  // namespace sps
