// Acceptance checks, one line per criterion. Usage: acceptance <path to sps_cli>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "sps/fixed_point.hpp"
#include "sps/linear_system.hpp"
#include "sps/mode_solver.hpp"
#include "sps/profile.hpp"
#include "sps/verify.hpp"

using namespace sps;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %-28s %s  %s\n", id, name, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(long double a, long double b, std::initializer_list<long double> terms) {
  long double s = std::max(std::abs(a), std::abs(b));
  for (auto t : terms) s = std::max(s, std::abs(t));
  return s == 0 ? 0.0 : static_cast<double>(std::abs(a - b) / s);
}

std::pair<int, double> random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.01, 0.99);
  const int n = 3 + static_cast<int>(rng() % 8);
  const double lo = n / (n - 1.0);
  return {n, lo + (2.0 - lo) * u(rng)};
}

void identities() {
  std::mt19937_64 rng(101);
  double worst = 0.0, cert_worst = 0.0;
  bool cert_negative = true;
  for (int i = 0; i < 50; ++i) {
    const auto [n, p] = random_params(rng);
    const auto q = derive_params(n, p);
    // Extended precision recomputation of the eight identities from the raw definitions.
    const long double N = n, P = p;
    const long double xi = (P - 1) * (N - 1), beta = (P - 1) / (xi - 1), s = (2 - P) / (P - 1);
    const long double cb = std::pow(beta, -1 / (P - 1));
    double own = 0.0;
    own = std::max(own, rel(s + 1, 1 / (P - 1), {s}));
    own = std::max(own, rel((s + 1) * P, s + 2, {s}));
    own = std::max(own, rel(beta * (xi - 1), P - 1, {}));
    own = std::max(own, rel(N - 2 - s, 1 / beta, {N - 2, s}));
    own = std::max(own, rel(s + 2 - N - P / beta, (xi - 1) * (-1 - P) / (P - 1), {s, N, P / beta}));
    own = std::max(own, rel((N - 1) * P - s - 2, (xi - 1) * P / (P - 1), {(N - 1) * P, s}));
    own = std::max(own, rel(N - 3 - s - P / beta, -xi, {N, s, P / beta}));
    own = std::max(own, rel(beta * std::pow(cb, P - 1), 1, {}));
    worst = std::max(worst, own);
    for (const auto& id : params_identities(q)) worst = std::max(worst, id.rel_error);
    // Library constants against the raw ones.
    worst = std::max(worst, rel(q.sigma, s, {}));
    worst = std::max(worst, rel(q.beta, beta, {}));
    worst = std::max(worst, rel(q.c_beta, cb, {}));

    const long double g = -s - 1;
    const long double direct = g * g + (N - 2 + P / beta) * g - (N - 1);
    const long double closed = 2 * P * (1 - xi) / ((P - 1) * (P - 1));
    const auto cert = sign_certificate(q);
    cert_worst = std::max(cert_worst, rel(direct, closed, {g * g, (N - 2 + P / beta) * g, N - 1}));
    cert_worst = std::max(cert_worst, rel(cert.direct, direct, {g * g, N - 1}));
    cert_negative = cert_negative && closed < 0 && cert.direct < 0 && cert.passed;
  }
  report(1, "identity suite", worst <= 1e-10 && cert_worst <= 1e-10 && cert_negative,
         fmt("max identity rel err %.2e, certificate rel err %.2e (tol 1e-10)", worst, cert_worst));
}

void profile_oracle() {
  const auto q = derive_params(3, 1.6);
  const auto r = oracle::raw(3, 1.6);
  const auto g = make_grid();
  const auto w0 = profile_field({q, 0.0}, g);
  double closed_err = 0.0;
  for (std::size_t j = 0; j + 1 < g->size(); ++j) {
    const double cf = oracle::w0_closed(r, (*g)[j]);
    closed_err = std::max(closed_err, std::abs(w0.values[j] - cf) / cf);
  }
  // Nodal values for t > 0 against a separate quadrature on a stride of nodes.
  double quad_err = 0.0;
  double residual = 0.0;
  for (double t : {0.0, 1.0, 1e2, 1e4}) {
    const auto w = profile_field({q, t}, g);
    for (std::size_t j = 0; j + 1 < g->size(); j += 97) {
      const double ref = oracle::w_direct(r, t, (*g)[j]);
      quad_err = std::max(quad_err, std::abs(w.values[j] - ref) / ref);
    }
    residual = std::max(residual, scalar_residual({q, t}, g).weighted);
    // Residual from the raw closed-form derivatives, evaluated at the same nodes.
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      const double x = (*g)[j];
      const double wp = w.deriv[j];
      const double res = -oracle::w_second_raw(r, t, x) - (r.n - 1) * wp / x - std::pow(std::abs(wp), r.p);
      num = std::max(num, std::pow(x, r.sigma + 2) * std::abs(res));
      den = std::max(den, std::pow(x, r.sigma + 2) * std::pow(std::abs(wp), r.p));
    }
    residual = std::max(residual, num / den);
  }
  report(2, "profile oracle", closed_err <= 1e-9 && quad_err <= 1e-9 && residual <= 1e-8,
         fmt("closed form rel err %.2e, quadrature rel err %.2e (tol 1e-9); residual %.2e (tol 1e-8)",
             closed_err, quad_err, residual));
}

void scaled_derivative() {
  const auto q = derive_params(3, 1.6);
  const auto r = oracle::raw(3, 1.6);
  const auto g = make_grid();
  double id_err = 0.0;
  bool monotone = true;
  double closest = 1e300;
  for (double t : {0.0, 1.0, 1e2, 1e4}) {
    const auto w = profile_field({q, t}, g);
    double prev = 0.0;
    for (std::size_t j = g->size(); j-- > 0;) {
      const double x = (*g)[j];
      const double scaled = std::pow(x, r.sigma + 1) * w.deriv[j];
      const double other = std::pow(t * std::pow(x, r.xi - 1) + r.beta, -1 / (r.p - 1));
      id_err = std::max(id_err, std::abs(scaled + other) / other);
      // Decreasing toward -C_beta as r decreases, never past it.
      if (j + 1 < g->size() && scaled > prev * (1 - 1e-14)) monotone = false;
      if (scaled < -r.cb * (1 + 1e-14)) monotone = false;
      prev = scaled;
    }
    closest = std::min(closest, std::abs(prev + r.cb) / r.cb);
  }
  report(3, "scaled-derivative identity", id_err <= 1e-13 && monotone,
         fmt("identity rel err %.2e (tol 1e-13), monotone %g, nearest approach to -C_beta %.2e", id_err,
             monotone ? 1.0 : 0.0, closest));
}

void mode_oracles() {
  const auto prm = derive_params(3, 1.6);
  const auto q = oracle::raw(3, 1.6);
  const auto g = make_grid();
  double k0_err = 0.0, t0_err = 0.0, bvp_err = 0.0;
  for (Sign s : {Sign::plus, Sign::minus}) {
    for (double t : {0.0, 10.0, 1e3}) {
      auto m = oracle::k0_case(g, prm, s, t);
      const auto sol = solve_k0({prm, 0, s, t}, m.rhs);
      if (s == Sign::plus) oracle::add_plus_anchor_term(m.expected, q, t, sol.anchor);
      k0_err = std::max(k0_err, oracle::x_distance(sol.a, m.expected, prm.sigma));
    }
    for (int k : {1, 2, 5}) {
      const auto m = oracle::mode_case(g, prm, k, s, 0.0);
      t0_err = std::max(t0_err, oracle::x_distance(solve_mode_t0({prm, k, s, 0.0}, m.rhs).a,
                                                   m.expected, prm.sigma));
    }
  }
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const double c0 = 1.0 + 0.5 * u(rng), c1 = u(rng), c2 = u(rng), f = 2.0 + 3.0 * (u(rng) + 1);
    const int k = 1 + static_cast<int>(rng() % 5);
    const Sign s = (rng() & 1) ? Sign::plus : Sign::minus;
    const auto b = oracle::field(g, [&](double r) {
      return std::pow(r, -prm.sigma - 2) * (c0 + c1 * r + c2 * std::cos(f * r));
    });
    const auto ref = solve_mode_t0({prm, k, s, 0.0}, b);
    const auto bvp = solve_mode_bvp({prm, k, s, 0.0}, b);
    bvp_err = std::max(bvp_err, oracle::x_distance(ref.a, bvp.a, prm.sigma) / norm_X(ref.a, prm.sigma));
  }
  report(4, "mode-solver oracles", k0_err <= 1e-6 && t0_err <= 1e-6 && bvp_err <= 1e-5,
         fmt("k=0 err %.2e, t=0 modes err %.2e (tol 1e-6); BVP vs t=0 rel %.2e (tol 1e-5)", k0_err,
             t0_err, bvp_err));
}

std::vector<RadialField> stability_family(const GridPtr& g, double sigma) {
  const std::vector<std::function<double(double)>> shapes = {
      [](double) { return 1.0; },
      [](double r) { return 1.0 - r; },
      [](double r) { return 1.0 + r; },
      [](double r) { return (1.0 - r) * (1.0 - r); },
      [](double r) { return std::cos(3.0 * r); },
  };
  std::vector<RadialField> out;
  for (const auto& m : shapes) {
    auto b = oracle::field(g, [&](double r) { return std::pow(r, -sigma - 2) * m(r); });
    double y = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      y = std::max(y, std::pow((*g)[j], sigma + 2) * std::abs(b.values[j]));
    }
    for (auto& v : b.values) v /= y;
    out.push_back(std::move(b));
  }
  return out;
}

double x_norm(const RadialField& a, double sigma) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double r = (*a.grid)[j];
    m = std::max(m, std::pow(r, sigma) * std::abs(a.values[j]) + std::pow(r, sigma + 1) * std::abs(a.deriv[j]));
  }
  return m;
}

void stability() {
  const auto prm = derive_params(3, 1.6);
  const auto g = make_grid();
  const auto fam = stability_family(g, prm.sigma);
  const std::vector<double> ts{0.0, 1.0, 10.0, 1e2, 1e3, 1e4};
  std::string detail;
  bool pass = true;
  auto spread_of = [&](const std::function<double(double, const RadialField&, std::size_t)>& ratio) {
    double lo = 1e300, hi = 0.0;
    for (double t : ts) {
      for (std::size_t i = 0; i < fam.size(); ++i) {
        const double v = ratio(t, fam[i], i);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    return hi / lo;
  };
  for (int k : {0, 1, 2}) {
    for (Sign s : {Sign::minus, Sign::plus}) {
      const double sp = spread_of([&](double t, const RadialField& b, std::size_t) {
        return x_norm(solve_mode({prm, k, s, t}, b).a, prm.sigma);
      });
      pass = pass && sp < 10.0;
      detail += fmt("k=%g", k) + sign_name(s) + fmt(" %.2f, ", sp);
    }
  }
  const double coupled = spread_of([&](double t, const RadialField& f, std::size_t i) {
    const auto& gg = fam[(i + 1) % fam.size()];
    const auto sol = solve_coupled(prm, t, {f, gg});
    return (x_norm(sol.phi, prm.sigma) + x_norm(sol.psi, prm.sigma)) / 2.0;
  });
  pass = pass && coupled < 10.0;
  detail += fmt("coupled %.2f (max/min, tol 10)", coupled);
  report(5, "t-uniform stability", pass, detail);
}

void kernel_exponents() {
  std::mt19937_64 rng(606);
  bool order = true;
  double poly = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto [n, p] = random_params(rng);
    const auto q = derive_params(n, p);
    const auto r = oracle::raw(n, p);
    const double b = r.n - 2 + r.p / r.beta;
    for (int k = 1; k <= 50; ++k) {
      const auto m = mode_exponents(q, k, Sign::minus);
      const double lam = k * (k + r.n - 2);
      order = order && m.gamma_minus + r.sigma <= -1.0 && m.gamma_plus + r.sigma > 0.0;
      for (double gm : {m.gamma_plus, m.gamma_minus}) {
        const double scale = std::max({gm * gm, std::abs(b * gm), lam});
        poly = std::max(poly, std::abs(gm * gm + b * gm - lam) / scale);
      }
    }
  }
  report(6, "kernel exponents", order && poly <= 1e-10,
         fmt("root ordering %g, characteristic rel residual %.2e (tol 1e-10)", order ? 1.0 : 0.0, poly));
}

struct Construction {
  ParameterCertificate cert;
  bool ok = false;
};

Construction construction() {
  const auto prm = derive_params(3, 1.6);
  const auto r = oracle::raw(3, 1.6);
  const auto g = make_grid();
  const KappaSpec kappa{KappaFamily::power, 0.5, 0.5, {}};
  Construction out;
  try {
    SearchOptions opt;
    opt.seed = 1;
    out.cert = choose_parameters(prm, kappa, kappa, g, opt);
    const auto& c = out.cert;
    const auto prob = make_problem(prm, c.t, kappa, kappa, g);
    const auto [pair, rep] = picard(prob, c.R, 1e-8, 50, c.delta);
    const double contraction = empirical_contraction(prob, c.R, 16, 1);
    const double step = rep.iterations.back().step_norm;
    const auto res = system_residual(prm, pair, kappa, kappa);
    const double residual = std::max(res.weighted_u, res.weighted_v);
    bool positive = true;
    for (std::size_t j = 0; j + 1 < g->size(); ++j) {
      positive = positive && pair.u.values[j] > 0.0 && pair.v.values[j] > 0.0;
    }
    // r^sigma w_t <= C_beta/sigma everywhere and |r^sigma phi| <= R, so near
    // r_min the scaled solution sits in [r^sigma w_t - R, C_beta/sigma + R].
    bool bracket = true;
    for (std::size_t j = 0; j < g->size() && (*g)[j] <= 100 * (*g)[0]; ++j) {
      const double x = (*g)[j];
      const double lo = std::pow(x, r.sigma) * oracle::w_direct(r, c.t, x) - c.R;
      const double hi = r.cb / r.sigma + c.R;
      for (double val : {pair.u.values[j], pair.v.values[j]}) {
        const double sv = std::pow(x, r.sigma) * val;
        bracket = bracket && sv >= lo && sv <= hi;
      }
    }
    out.ok = rep.converged && step <= 1e-8 && contraction <= 0.9 && residual <= 1e-4 && positive &&
             bracket;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "R=%g delta=%g t=%g; %zu iterations, step %.2e (tol 1e-8), contraction %.2e (tol "
                  "0.9), residual %.2e (tol 1e-4), positive %d, bracket %d",
                  c.R, c.delta, c.t, rep.iterations.size(), step, contraction, residual, positive, bracket);
    report(7, "fixed-point construction", out.ok, buf);
  } catch (const std::exception& e) {
    report(7, "fixed-point construction", false, e.what());
  }
  return out;
}

void decay(const Construction& con) {
  const auto prm = derive_params(3, 1.6);
  const auto r = oracle::raw(3, 1.6);
  const auto g = make_grid();
  const KappaSpec kappa{KappaFamily::power, 0.5, 0.5, {}};
  const double rho = 0.1;
  const double R = con.ok ? con.cert.R : 0x1.0p-9;
  bool decreasing = true, below = true;
  double prev = 1e300;
  std::string detail = fmt("R=%g: ", R);
  try {
    for (double t : {1e2, 1e3, 1e4}) {
      const auto pair = picard(make_problem(prm, t, kappa, kappa, g), R, 1e-8, 50).first;
      double sup = 0.0;
      for (std::size_t j = 0; j < g->size(); ++j) {
        if ((*g)[j] >= rho) sup = std::max({sup, pair.u.values[j], pair.v.values[j]});
      }
      const double bound = std::pow(t, -r.sigma - 1) * (std::pow(rho, 2 - r.n) - 1) / (r.n - 2) +
                           R * std::pow(rho, -r.sigma);
      decreasing = decreasing && sup < prev;
      below = below && sup <= bound;
      prev = sup;
      detail += fmt("t=%g sup %.3e bound %.3e ", t, sup, bound);
    }
  } catch (const std::exception& e) {
    decreasing = false;
    detail += e.what();
  }
  report(8, "decay in t", decreasing && below, detail);
}

void inequalities() {
  const std::vector<double> ps{1.1, 1.5, 2.0};
  const auto rep = inequality_suite(ps, {1, 2, 3, 5}, 100000, 1);
  bool zero = true, finite = true, stable = true;
  double p2 = 0.0, worst_change = 0.0;
  for (const auto& c : rep.cases) {
    zero = zero && c.zero_cases_exact;
    if (c.p == 2.0) p2 = std::max(p2, c.p2_identity_error);
    for (const auto& s : c.stats) {
      finite = finite && s.finite && std::isfinite(s.sup);
      stable = stable && s.relative_change < 0.05;
      worst_change = std::max(worst_change, s.relative_change);
    }
  }
  // Fresh samples: the p = 2 remainder is |y|^2 exactly, and the zero cases vanish.
  std::mt19937_64 rng(77);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> le(-6.0, 6.0);
  for (int dim : {1, 2, 3, 5}) {
    for (int i = 0; i < 2000; ++i) {
      std::vector<double> x(dim), y(dim), z(dim), zero_v(dim, 0.0);
      const double sx = std::pow(10.0, le(rng)), sy = std::pow(10.0, le(rng));
      for (int d = 0; d < dim; ++d) {
        x[d] = sx * nd(rng);
        y[d] = sy * nd(rng);
        z[d] = nd(rng);
      }
      p2 = std::max(p2, std::abs(inequality_ratios(2.0, x, y, z).remainder - 1.0));
      for (double p : ps) {
        zero = zero && remainder_lhs(p, x, zero_v) == 0.0 && difference_lhs(p, x, y, y) == 0.0 &&
               power_difference_lhs(p, x, y, y) == 0.0;
      }
    }
  }
  report(9, "inequality suite", zero && finite && stable && p2 <= 1e-12,
         fmt("p=2 identity err %.2e (tol 1e-12), worst sup change on doubling %.2f%% (tol 5%%), zero "
             "cases exact %g",
             p2, 100 * worst_change, zero ? 1.0 : 0.0));
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string kept, line;
    std::istringstream lines(ss.str());
    while (std::getline(lines, line)) {
      if (line.find("\"timestamp\"") == std::string::npos) kept += line + "\n";
    }
    out[fs::relative(e.path(), dir).string()] = kept;
  }
  return out;
}

void determinism(const char* cli) {
  if (!cli) {
    report(10, "determinism", false, "no CLI path given");
    return;
  }
  const fs::path dir = fs::temp_directory_path() / ("sps_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"N": 3, "p": 1.6, "seed": 7})" << "\n";
  const fs::path out = dir / "out";
  const std::string base = "\"" + std::string(cli) + "\" --quiet --config \"" + cfg.string() +
                           "\" --out \"" + out.string() + "\" verify-all";
  const int s1 = std::system(base.c_str());
  const auto first = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
  // Second run single-threaded so the comparison also covers the thread count.
  const int s2 = std::system(("SPS_THREADS=1 " + base).c_str());
  const auto second = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
  fs::remove_all(dir);
  const bool ran = WIFEXITED(s1) && WIFEXITED(s2) && WEXITSTATUS(s1) <= 1 && WEXITSTATUS(s2) <= 1;
  const bool same = !first.empty() && first == second;
  report(10, "determinism", ran && same,
         fmt("%g files compared, identical %g", static_cast<double>(first.size()), same ? 1.0 : 0.0) +
             fmt(", exit codes %g and %g", WEXITSTATUS(s1), WEXITSTATUS(s2)));
}

}  // namespace

int main(int argc, char** argv) {
  identities();
  profile_oracle();
  scaled_derivative();
  mode_oracles();
  stability();
  kernel_exponents();
  const auto con = construction();
  decay(con);
  inequalities();
  determinism(argc > 1 ? argv[1] : nullptr);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
