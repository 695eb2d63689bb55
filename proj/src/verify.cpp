#include "sps/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "parallel.hpp"
#include "sps/errors.hpp"
#include "sps/profile.hpp"

namespace sps {

namespace {

std::string node_text(const RadialGrid& g, std::size_t j) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "node %zu (r = %.17g)", j, g[j]);
  return buf;
}

// -u'' - (N-1) u'/r - (1 + kappa) |v'|^p, scaled by the right-hand side.
std::pair<RadialField, double> one_residual(const Params& params, const RadialField& u,
                                            const RadialField& v, const KappaSpec& kappa) {
  const auto& g = *u.grid;
  const auto upp = fd_second_derivative(u);
  RadialField res;
  res.grid = u.grid;
  res.values.resize(u.size());
  std::vector<double> rhs(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double r = g[j];
    rhs[j] = (1.0 + kappa_value(kappa, r)) * std::pow(std::abs(v.deriv[j]), params.p);
    res.values[j] = -upp.values[j] - (params.n_dim - 1) * u.deriv[j] / r - rhs[j];
  }
  const double scale = norm_Y(rhs, g, params.sigma);
  const double weighted = norm_Y(res, params.sigma) / (scale > 0.0 ? scale : 1.0);
  return {std::move(res), weighted};
}

}  // namespace

SystemResidual system_residual(const Params& params, const SolutionPair& pair,
                               const KappaSpec& kappa1, const KappaSpec& kappa2) {
  require_same_grid(pair.u, pair.v);
  if (!pair.u.has_deriv() || !pair.v.has_deriv()) {
    throw Error(ErrorCode::missing_derivative, "system_residual: pair carries no derivatives");
  }
  SystemResidual out;
  std::tie(out.residual_u, out.weighted_u) = one_residual(params, pair.u, pair.v, kappa1);
  std::tie(out.residual_v, out.weighted_v) = one_residual(params, pair.v, pair.u, kappa2);
  return out;
}

PositivityReport positivity_and_blowup(const Params& params, const SolutionPair& pair) {
  require_same_grid(pair.u, pair.w);
  const auto& g = *pair.u.grid;
  const double s = params.sigma;
  // The last node is the boundary r = 1 where u = v = 0.
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    if (!(pair.u.values[j] > 0.0)) {
      throw Error(ErrorCode::positivity_violation, "u is not positive at " + node_text(g, j));
    }
    if (!(pair.v.values[j] > 0.0)) {
      throw Error(ErrorCode::positivity_violation, "v is not positive at " + node_text(g, j));
    }
  }
  PositivityReport rep;
  rep.min_u = *std::min_element(pair.u.values.begin(), pair.u.values.end() - 1);
  rep.min_v = *std::min_element(pair.v.values.begin(), pair.v.values.end() - 1);

  const auto lim = sigma_limit_constant(ProfileSpec{params, pair.t});
  rep.limit_constant = lim.estimate;
  rep.limit_bracket = lim.bracket;
  rep.window_top = 100.0 * g.r_min();

  const double dphi = pair.phi.has_deriv() ? norm_X(pair.phi, s) : 0.0;
  const double dpsi = pair.psi.has_deriv() ? norm_X(pair.psi, s) : 0.0;
  const double actual = std::max(dphi, dpsi);

  double w_min = std::numeric_limits<double>::infinity();
  rep.min_scaled_u = rep.min_scaled_v = std::numeric_limits<double>::infinity();
  rep.max_scaled_u = rep.max_scaled_v = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double rs = std::pow(g[j], s);
    rep.sup_deviation = std::max({rep.sup_deviation, rs * std::abs(pair.u.values[j] - pair.w.values[j]),
                                  rs * std::abs(pair.v.values[j] - pair.w.values[j])});
    if (g[j] > rep.window_top) continue;
    w_min = std::min(w_min, rs * pair.w.values[j]);
    rep.min_scaled_u = std::min(rep.min_scaled_u, rs * pair.u.values[j]);
    rep.max_scaled_u = std::max(rep.max_scaled_u, rs * pair.u.values[j]);
    rep.min_scaled_v = std::min(rep.min_scaled_v, rs * pair.v.values[j]);
    rep.max_scaled_v = std::max(rep.max_scaled_v, rs * pair.v.values[j]);
  }
  const double top = lim.estimate + lim.bracket;
  rep.c_low = w_min - pair.R_ball;
  rep.c_high = top + pair.R_ball;
  rep.c_low_actual = w_min - actual;
  const double lo = std::min(rep.min_scaled_u, rep.min_scaled_v);
  const double hi = std::max(rep.max_scaled_u, rep.max_scaled_v);
  rep.in_bracket = lo >= rep.c_low && lo >= rep.c_low_actual && hi <= rep.c_high &&
                   hi <= top + actual;
  rep.deviation_ok = rep.sup_deviation <= pair.R_ball;
  rep.c_low_positive = rep.c_low > 0.0;
  rep.c_low_actual_positive = rep.c_low_actual > 0.0;
  return rep;
}

DecayReport decay_in_t(const Params& params, const KappaSpec& kappa1, const KappaSpec& kappa2,
                       const GridPtr& grid, double rho, const std::vector<double>& t_list,
                       double R, double tol, int max_iter) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "decay_in_t: rho must lie in (0, 1)");
  }
  if (t_list.empty()) throw Error(ErrorCode::invalid_argument, "decay_in_t: empty t list");
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] > 0.0) || (i > 0 && !(t_list[i] > t_list[i - 1]))) {
      throw Error(ErrorCode::invalid_argument, "decay_in_t: t list must be positive and increasing");
    }
  }
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "decay_in_t: R must be positive");

  const auto& g = *grid;
  const double s = params.sigma;
  DecayReport rep;
  rep.rho = rho;
  rep.R = R;
  rep.entries.resize(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    auto& e = rep.entries[i];
    e.t = t_list[i];
    SearchOptions opt;
    opt.t = e.t;
    opt.R = R;
    try {
      choose_parameters(params, kappa1, kappa2, grid, opt);
      e.certified = true;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::search_exhausted) throw;
    }
    const auto prob = make_problem(params, e.t, kappa1, kappa2, grid);
    const auto [pair, it] = picard(prob, R, tol, max_iter);
    e.iterations = static_cast<int>(it.iterations.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g[j] < rho) continue;
      e.sup_u = std::max(e.sup_u, pair.u.values[j]);
      e.sup_v = std::max(e.sup_v, pair.v.values[j]);
      e.sup_w = std::max(e.sup_w, pair.w.values[j]);
    }
    e.profile_bound = std::pow(e.t, -s - 1.0) * (std::pow(rho, 2.0 - params.n_dim) - 1.0) /
                      (params.n_dim - 2.0);
    e.r_contribution = R * std::pow(rho, -s);
    const double cap = std::min(e.profile_bound, 2.0 * e.sup_w) + e.r_contribution;
    e.below_bound = e.sup_u <= cap && e.sup_v <= cap && e.sup_w <= e.profile_bound;
  }
  rep.strictly_decreasing = true;
  rep.all_below_bound = true;
  for (std::size_t i = 0; i < rep.entries.size(); ++i) {
    const auto& e = rep.entries[i];
    rep.all_below_bound = rep.all_below_bound && e.below_bound;
    if (i > 0) {
      const auto& prev = rep.entries[i - 1];
      rep.strictly_decreasing =
          rep.strictly_decreasing && e.sup_u < prev.sup_u && e.sup_v < prev.sup_v;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pointwise inequalities.

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2_sum(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] + b[i]) * (a[i] + b[i]);
  return s;
}

double norm2_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// (1+q)^e - 1 - e q, by its binomial series near q = 0. `one_plus_q` is
// passed separately so the caller can supply it without cancellation.
double binomial_remainder(double e, double q, double one_plus_q) {
  if (std::abs(q) < 0.25) {
    double term = e * (e - 1.0) / 2.0 * q * q;
    double sum = 0.0;
    for (int k = 2; k < 80 && term != 0.0; ++k) {
      sum += term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      term *= (e - k) / (k + 1.0) * q;
    }
    return sum;
  }
  return std::pow(one_plus_q, e) - 1.0 - e * q;
}

// |x+y|^p - |x|^p - p |x|^(p-2) x.y with its sign.
double remainder_signed(double p, std::span<const double> x, std::span<const double> y) {
  const double xx = dot(x, x);
  const double yy = dot(y, y);
  if (xx == 0.0) return std::pow(yy, p / 2.0);
  const double a = 2.0 * dot(x, y) / xx;
  const double b = yy / xx;
  const double q = a + b;
  const double one_plus_q = q < -0.5 ? norm2_sum(x, y) / xx : 1.0 + q;
  return std::pow(xx, p / 2.0) * (binomial_remainder(p / 2.0, q, one_plus_q) + p / 2.0 * b);
}

double ratio_or_nan(double num, double den) {
  return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double remainder_lhs(double p, std::span<const double> x, std::span<const double> y) {
  return std::abs(remainder_signed(p, x, y));
}

double difference_lhs(double p, std::span<const double> x, std::span<const double> y,
                      std::span<const double> z) {
  return std::abs(remainder_signed(p, x, y) - remainder_signed(p, x, z));
}

double power_difference_lhs(double p, std::span<const double> x, std::span<const double> y,
                            std::span<const double> z) {
  const double a = norm2_sum(x, y);
  const double b = norm2_sum(x, z);
  // a - b = (y - z).(2x + y + z), formed without subtracting a and b.
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (y[i] - z[i]) * (2.0 * x[i] + y[i] + z[i]);
  if (b == 0.0 || d / b < -0.5) return std::abs(std::pow(a, p / 2.0) - std::pow(b, p / 2.0));
  return std::abs(std::pow(b, p / 2.0) * std::expm1(p / 2.0 * std::log1p(d / b)));
}

InequalityRatios inequality_ratios(double p, std::span<const double> x, std::span<const double> y,
                                   std::span<const double> z) {
  const double ny = std::sqrt(dot(y, y));
  const double nz = std::sqrt(dot(z, z));
  const double nx = std::sqrt(dot(x, x));
  const double dyz = std::sqrt(norm2_diff(y, z));
  const double q = p - 1.0;
  InequalityRatios r{};
  r.remainder = ratio_or_nan(remainder_lhs(p, x, y), std::pow(ny, p));
  r.difference = ratio_or_nan(difference_lhs(p, x, y, z), (std::pow(ny, q) + std::pow(nz, q)) * dyz);
  r.power_difference = ratio_or_nan(power_difference_lhs(p, x, y, z),
                       (std::pow(nx, q) + std::pow(ny, q) + std::pow(nz, q)) * dyz);
  return r;
}

namespace {

constexpr std::size_t kChunk = 4096;
constexpr const char* kInequalityNames[3] = {"remainder", "difference", "power_difference"};
constexpr double kLogLo = -6.0;
constexpr double kLogHi = 6.0;
constexpr int kStrata = 12;  // one per decade

struct ChunkResult {
  double sup[3] = {0.0, 0.0, 0.0};
  double sup_head[3] = {0.0, 0.0, 0.0};  // over global indices below the split
  std::size_t skipped[3] = {0, 0, 0};
  bool finite = true;
  double p2_error = 0.0;
};

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void random_direction(std::mt19937_64& rng, std::vector<double>& out) {
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& c : out) {
      // Box-Muller keeps the stream independent of the library's normal sampler.
      const double u1 = 1.0 - uniform01(rng);
      const double u2 = uniform01(rng);
      c = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      n2 += c * c;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& c : out) c *= inv;
}

// Sample i draws the three norms from the decade cell (i mod 12, i/12 mod 12,
// i/144 mod 12), so every magnitude combination is visited evenly.
void draw_sample(std::mt19937_64& rng, std::size_t i, double scale, std::vector<double>& x,
                 std::vector<double>& y, std::vector<double>& z) {
  const std::size_t cells[3] = {i % kStrata, (i / kStrata) % kStrata,
                                (i / (kStrata * kStrata)) % kStrata};
  std::vector<double>* vecs[3] = {&x, &y, &z};
  const double width = (kLogHi - kLogLo) / kStrata;
  for (int v = 0; v < 3; ++v) {
    random_direction(rng, *vecs[v]);
    const double lg = kLogLo + width * (cells[v] + uniform01(rng));
    const double norm = scale * std::pow(10.0, lg);
    for (auto& c : *vecs[v]) c *= norm;
  }
}

std::uint64_t chunk_seed(std::uint64_t seed, double p, int dim, std::size_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(p)),
                    static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(p) >> 32),
                    static_cast<std::uint32_t>(dim), static_cast<std::uint32_t>(chunk)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

// Per-chunk maxima over the global sample sequence 0..total-1. A sample's
// draws depend only on its chunk, so any prefix is reproduced exactly.
std::vector<ChunkResult> sample_chunks(double p, int dim, std::size_t total, std::size_t split,
                                       std::uint64_t seed, double scale) {
  const std::size_t n_chunks = (total + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(n_chunks);
  detail::parallel_for(n_chunks, [&](std::size_t c) {
    std::mt19937_64 rng(chunk_seed(seed, p, dim, c));
    std::vector<double> x(dim), y(dim), z(dim);
    auto& res = results[c];
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      draw_sample(rng, i, scale, x, y, z);
      const auto r = inequality_ratios(p, x, y, z);
      const double vals[3] = {r.remainder, r.difference, r.power_difference};
      for (int k = 0; k < 3; ++k) {
        if (std::isnan(vals[k])) {
          ++res.skipped[k];
          continue;
        }
        if (!std::isfinite(vals[k])) res.finite = false;
        res.sup[k] = std::max(res.sup[k], vals[k]);
        if (i < split) res.sup_head[k] = std::max(res.sup_head[k], vals[k]);
      }
      if (p == 2.0 && !std::isnan(r.remainder)) {
        res.p2_error = std::max(res.p2_error, std::abs(r.remainder - 1.0));
      }
    }
  });
  return results;
}

bool zero_cases_hold(double p, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(chunk_seed(seed ^ 0x5a5a5a5aULL, p, dim, 0));
  std::vector<double> x(dim), y(dim), z(dim), zero(dim, 0.0);
  for (std::size_t i = 0; i < 1000; ++i) {
    draw_sample(rng, i, 1.0, x, y, z);
    if (remainder_lhs(p, x, zero) != 0.0) return false;
    if (difference_lhs(p, x, y, y) != 0.0) return false;
    if (power_difference_lhs(p, x, y, y) != 0.0) return false;
  }
  return true;
}

}  // namespace

InequalityReport inequality_suite(const std::vector<double>& p_list, const std::vector<int>& dims,
                                  std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1000) {
    throw Error(ErrorCode::invalid_argument, "inequality_suite: n_samples must be >= 1000");
  }
  for (double p : p_list) {
    if (!(p > 1.0 && p <= 2.0)) {
      throw Error(ErrorCode::invalid_argument, "inequality_suite: p must lie in (1, 2]");
    }
  }
  for (int d : dims) {
    if (d < 1) throw Error(ErrorCode::invalid_argument, "inequality_suite: dimension must be >= 1");
  }

  InequalityReport rep;
  rep.passed = true;
  for (double p : p_list) {
    for (int d : dims) {
      InequalityCase c;
      c.p = p;
      c.dim = d;
      const auto chunks = sample_chunks(p, d, 2 * n_samples, n_samples, seed, 1.0);
      const auto rescaled = sample_chunks(p, d, n_samples, n_samples, seed, 1e3);
      for (int k = 0; k < 3; ++k) {
        InequalityStats st;
        st.name = kInequalityNames[k];
        st.finite = true;
        double sup_scaled = 0.0;
        for (const auto& ch : rescaled) sup_scaled = std::max(sup_scaled, ch.sup[k]);
        for (const auto& ch : chunks) {
          st.sup = std::max(st.sup, ch.sup_head[k]);
          st.sup_doubled = std::max(st.sup_doubled, ch.sup[k]);
          st.skipped += ch.skipped[k];
          st.finite = st.finite && ch.finite;
        }
        st.finite = st.finite && std::isfinite(st.sup_doubled);
        st.relative_change =
            st.sup_doubled > 0.0 ? (st.sup_doubled - st.sup) / st.sup_doubled : 0.0;
        st.stable = st.relative_change < 0.05;
        st.homogeneity_error = st.sup > 0.0 ? std::abs(sup_scaled - st.sup) / st.sup : 0.0;
        rep.passed = rep.passed && st.finite && st.stable && st.homogeneity_error <= 1e-10;
        c.stats.push_back(st);
      }
      for (const auto& ch : chunks) c.p2_identity_error = std::max(c.p2_identity_error, ch.p2_error);
      c.zero_cases_exact = zero_cases_hold(p, d, seed);
      rep.passed = rep.passed && c.zero_cases_exact && (p != 2.0 || c.p2_identity_error <= 1e-12);
      rep.cases.push_back(std::move(c));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

double default_z_cut(const Params& params, double t) {
  if (t <= 0.0) return 0.5;
  return 0.5 * std::min(1.0, std::pow(t, -1.0 / (params.xi - 1.0)));
}

LowerBoundReport profile_lower_bound(const Params& params, double t, double z_cut, double r_min,
                                     int samples) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorCode::invalid_argument, "profile_lower_bound: t must be finite and >= 0");
  }
  const double z_max = 2.0 * default_z_cut(params, t);
  if (!(z_cut > 0.0 && z_cut <= z_max)) {
    throw Error(ErrorCode::invalid_argument,
                "profile_lower_bound: z_cut must lie in (0, min(1, t^(-1/(xi-1)))]");
  }
  if (samples < 2) throw Error(ErrorCode::invalid_argument, "profile_lower_bound: samples < 2");

  LowerBoundReport rep;
  rep.t = t;
  rep.z_cut = z_cut;
  rep.samples = samples;
  rep.c_star = std::pow(1.0 + params.beta, -1.0 / (params.p - 1.0)) / params.sigma;
  rep.r_lo = std::min(r_min, 1e-8 * z_cut);

  const ProfileSpec spec{params, t};
  const double s = params.sigma;
  const double span = std::log(z_cut / rep.r_lo);
  std::vector<double> r(samples), margin(samples);
  detail::parallel_for(static_cast<std::size_t>(samples), [&](std::size_t k) {
    r[k] = rep.r_lo * std::exp(span * static_cast<double>(k) / samples);
    const double lhs = std::pow(r[k], s) * w_value(spec, r[k]);
    const double rhs = rep.c_star * (1.0 - std::pow(r[k] / z_cut, s));
    margin[k] = lhs - rhs;
  });
  const auto it = std::min_element(margin.begin(), margin.end());
  rep.min_margin = *it;
  rep.r_at_min = r[static_cast<std::size_t>(it - margin.begin())];
  if (rep.min_margin < 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "lower bound fails at sample %td (r = %.17g), margin %.3e",
                  it - margin.begin(), rep.r_at_min, rep.min_margin);
    throw Error(ErrorCode::bound_violation, buf);
  }
  return rep;
}

}  // namespace sps
