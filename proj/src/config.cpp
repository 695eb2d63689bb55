#include "sps/config.hpp"

#include <cmath>
#include <set>

#include "json.hpp"
#include "sps/errors.hpp"

namespace sps {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
  throw Error(ErrorCode::config, path + ": " + reason);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_number(*v, path(key));
  }

  std::optional<double> optional_number(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, path(key));
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    return as_integer(*v, path(key));
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(path(key), "must be a boolean");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(path(key), "must be a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(join(path_, key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "must be finite");
    return d;
  }

  static long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "must be an integer");
    return v.get<long long>();
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(ObjectReader& r, const std::string& key,
                                const std::vector<double>& fallback) {
  const json* v = r.find(key);
  if (!v) return fallback;
  if (!v->is_array() || v->empty()) fail(r.path(key), "must be a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    out.push_back(ObjectReader::as_number((*v)[i], r.path(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> int_list(ObjectReader& r, const std::string& key, const std::vector<int>& fallback) {
  const json* v = r.find(key);
  if (!v) return fallback;
  if (!v->is_array() || v->empty()) fail(r.path(key), "must be a non-empty array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const auto path = r.path(key) + "[" + std::to_string(i) + "]";
    const long long d = ObjectReader::as_integer((*v)[i], path);
    if (d < 1 || d > 64) fail(path, "must lie in [1, 64]");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

void check_params(int n, double p, const std::string& base) {
  if (n < 3) fail(join(base, "N"), "must be >= 3");
  if (!(p < 2.0 - 1e-12)) fail(join(base, "p"), "must be < 2");
  const double lo = static_cast<double>(n) / (n - 1);
  if (!(p > lo + 1e-12)) fail(join(base, "p"), "must be > N/(N-1) = " + std::to_string(lo));
}

KappaSpec read_kappa(const json* v, const std::string& path, const KappaSpec& fallback) {
  if (!v) return fallback;
  ObjectReader r(*v, path);
  KappaSpec k;
  const std::string family = r.string("family", kappa_family_name(fallback.family));
  try {
    k.family = parse_kappa_family(family);
  } catch (const Error&) {
    fail(r.path("family"), "must be one of power, ramp, table");
  }
  k.c = r.number("c", fallback.c);
  k.alpha = r.number("alpha", fallback.alpha);
  if (const json* t = r.find("table")) {
    if (!t->is_array()) fail(r.path("table"), "must be an array of [r, value] pairs");
    for (std::size_t i = 0; i < t->size(); ++i) {
      const auto ip = r.path("table") + "[" + std::to_string(i) + "]";
      const auto& e = (*t)[i];
      if (!e.is_array() || e.size() != 2) fail(ip, "must be an [r, value] pair");
      k.table.emplace_back(ObjectReader::as_number(e[0], ip + "[0]"),
                           ObjectReader::as_number(e[1], ip + "[1]"));
    }
  }
  r.finish();
  if (k.family == KappaFamily::table && k.table.empty()) {
    fail(r.path("table"), "required for the table family");
  }
  try {
    validate(k);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return k;
}

json kappa_json(const KappaSpec& k) {
  json t = json::array();
  for (const auto& [r, v] : k.table) t.push_back({r, v});
  return json{{"family", kappa_family_name(k.family)}, {"c", k.c}, {"alpha", k.alpha}, {"table", t}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void require(bool ok, const std::string& path, const std::string& reason) {
  if (!ok) fail(path, reason);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("<root>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  ObjectReader root(doc, "");

  std::string params_path;
  const json* nested = root.find("params");
  const json* top_n = root.find("N");
  const json* top_p = root.find("p");
  if (nested) {
    if (top_n || top_p) fail("params", "N and p given both at the top level and in params");
    ObjectReader pr(*nested, "params");
    cfg.n_dim = static_cast<int>(pr.integer("N", cfg.n_dim));
    cfg.p = pr.number("p", cfg.p);
    pr.finish();
  } else {
    if (top_n) cfg.n_dim = static_cast<int>(ObjectReader::as_integer(*top_n, "params.N"));
    if (top_p) cfg.p = ObjectReader::as_number(*top_p, "params.p");
  }
  check_params(cfg.n_dim, cfg.p, "params");

  if (const json* g = root.find("grid")) {
    ObjectReader r(*g, "grid");
    cfg.grid.r_min = r.number("r_min", cfg.grid.r_min);
    cfg.grid.nodes = static_cast<int>(r.integer("nodes", cfg.grid.nodes));
    r.finish();
  }
  require(cfg.grid.r_min > 0.0 && cfg.grid.r_min < 1.0, "grid.r_min", "must lie in (0, 1)");
  require(cfg.grid.nodes >= 16 && cfg.grid.nodes <= (1 << 22), "grid.nodes",
          "must lie in [16, 4194304]");

  if (const json* pf = root.find("profile")) {
    ObjectReader r(*pf, "profile");
    cfg.profile_t = r.number("t", cfg.profile_t);
    r.finish();
  }
  require(cfg.profile_t >= 0.0, "profile.t", "must be >= 0");

  cfg.kappa1 = read_kappa(root.find("kappa1"), "kappa1", cfg.kappa1);
  cfg.kappa2 = read_kappa(root.find("kappa2"), "kappa2", cfg.kappa2);

  const std::optional<double> top_t = root.optional_number("t");
  if (const json* fp = root.find("fixed_point")) {
    ObjectReader r(*fp, "fixed_point");
    cfg.fixed_point.R = r.optional_number("R");
    cfg.fixed_point.delta = r.optional_number("delta");
    cfg.fixed_point.t = r.optional_number("t");
    cfg.fixed_point.tol = r.number("tol", cfg.fixed_point.tol);
    cfg.fixed_point.max_iter = static_cast<int>(r.integer("max_iter", cfg.fixed_point.max_iter));
    r.finish();
  }
  if (top_t) {
    if (cfg.fixed_point.t && *cfg.fixed_point.t != *top_t) {
      fail("t", "conflicts with fixed_point.t");
    }
    cfg.fixed_point.t = top_t;
  }
  const auto& fpc = cfg.fixed_point;
  require(!fpc.R || *fpc.R > 0.0, "fixed_point.R", "must be > 0");
  require(!fpc.delta || (*fpc.delta > 0.0 && *fpc.delta <= 1.0), "fixed_point.delta",
          "must lie in (0, 1]");
  require(!fpc.t || *fpc.t >= 0.0, "fixed_point.t", "must be >= 0");
  require(fpc.tol > 0.0, "fixed_point.tol", "must be > 0");
  require(fpc.max_iter >= 1, "fixed_point.max_iter", "must be >= 1");

  if (const json* o = root.find("output")) {
    ObjectReader r(*o, "output");
    cfg.output.out_dir = r.string("out_dir", cfg.output.out_dir);
    cfg.output.emit_csv = r.boolean("emit_csv", cfg.output.emit_csv);
    cfg.output.emit_json = r.boolean("emit_json", cfg.output.emit_json);
    r.finish();
  }
  require(!cfg.output.out_dir.empty(), "output.out_dir", "must not be empty");

  if (const json* v = root.find("verify")) {
    ObjectReader r(*v, "verify");
    auto& vc = cfg.verify;
    vc.rho = r.number("rho", vc.rho);
    vc.decay_t = number_list(r, "decay_t", vc.decay_t);
    vc.residual_t = number_list(r, "residual_t", vc.residual_t);
    vc.stability_t = number_list(r, "stability_t", vc.stability_t);
    vc.inequality_p = number_list(r, "inequality_p", vc.inequality_p);
    vc.inequality_dims = int_list(r, "inequality_dims", vc.inequality_dims);
    const long long ns = r.integer("inequality_samples", static_cast<long long>(vc.inequality_samples));
    require(ns >= 1000, r.path("inequality_samples"), "must be >= 1000");
    vc.inequality_samples = static_cast<std::uint64_t>(ns);
    const long long rp = r.integer("random_params", vc.random_params);
    require(rp >= 1 && rp <= 10000, r.path("random_params"), "must lie in [1, 10000]");
    vc.random_params = static_cast<int>(rp);
    r.finish();
  }
  const auto& vc = cfg.verify;
  require(vc.rho > 0.0 && vc.rho < 1.0, "verify.rho", "must lie in (0, 1)");
  for (std::size_t i = 1; i < vc.decay_t.size(); ++i) {
    require(vc.decay_t[i] > vc.decay_t[i - 1], "verify.decay_t", "must be strictly increasing");
  }
  require(vc.decay_t.front() > 0.0, "verify.decay_t", "must be positive");
  for (double t : vc.residual_t) require(t >= 0.0, "verify.residual_t", "must be >= 0");
  for (double t : vc.stability_t) require(t >= 0.0, "verify.stability_t", "must be >= 0");
  for (double p : vc.inequality_p) {
    require(p > 1.0 && p <= 2.0, "verify.inequality_p", "entries must lie in (1, 2]");
  }

  if (const json* s = root.find("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) {
      fail("seed", "must be a non-negative integer");
    }
    cfg.seed = s->get<std::uint64_t>();
  }
  root.finish();
  return cfg;
}

std::string echo_config(const RunConfig& c) {
  json doc;
  doc["N"] = c.n_dim;
  doc["p"] = c.p;
  doc["grid"] = {{"r_min", c.grid.r_min}, {"nodes", c.grid.nodes}};
  doc["profile"] = {{"t", c.profile_t}};
  doc["kappa1"] = kappa_json(c.kappa1);
  doc["kappa2"] = kappa_json(c.kappa2);
  doc["fixed_point"] = {{"R", optional_json(c.fixed_point.R)},
                        {"delta", optional_json(c.fixed_point.delta)},
                        {"t", optional_json(c.fixed_point.t)},
                        {"tol", c.fixed_point.tol},
                        {"max_iter", c.fixed_point.max_iter}};
  doc["output"] = {{"out_dir", c.output.out_dir},
                   {"emit_csv", c.output.emit_csv},
                   {"emit_json", c.output.emit_json}};
  const auto& v = c.verify;
  doc["verify"] = {{"rho", v.rho},
                   {"decay_t", v.decay_t},
                   {"residual_t", v.residual_t},
                   {"stability_t", v.stability_t},
                   {"inequality_p", v.inequality_p},
                   {"inequality_dims", v.inequality_dims},
                   {"inequality_samples", v.inequality_samples},
                   {"random_params", v.random_params}};
  doc["seed"] = c.seed;
  return doc.dump(2) + "\n";
}

}  // namespace sps
