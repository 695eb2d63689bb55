#include "sps/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "sps/errors.hpp"
#include "sps/linear_system.hpp"
#include "sps/profile.hpp"

namespace sps {

const char* kappa_family_name(KappaFamily f) {
  switch (f) {
    case KappaFamily::power: return "power";
    case KappaFamily::ramp: return "ramp";
    case KappaFamily::table: return "table";
  }
  return "unknown";
}

KappaFamily parse_kappa_family(const std::string& name) {
  if (name == "power") return KappaFamily::power;
  if (name == "ramp") return KappaFamily::ramp;
  if (name == "table") return KappaFamily::table;
  throw Error(ErrorCode::invalid_argument, "unknown kappa family '" + name + "'");
}

void validate(const KappaSpec& kappa) {
  if (!(kappa.c >= 0.0) || !std::isfinite(kappa.c)) {
    throw Error(ErrorCode::invalid_argument, "kappa c must be finite and >= 0");
  }
  if (kappa.family != KappaFamily::table) {
    if (!(kappa.alpha > 0.0) || !std::isfinite(kappa.alpha)) {
      throw Error(ErrorCode::invalid_argument, "kappa alpha must be finite and > 0");
    }
    return;
  }
  const auto& tab = kappa.table;
  if (tab.empty()) throw Error(ErrorCode::invalid_argument, "kappa table is empty");
  if (tab.front().first != 0.0 || tab.front().second != 0.0) {
    throw Error(ErrorCode::invalid_argument, "kappa table must start at (0, 0)");
  }
  for (std::size_t i = 0; i < tab.size(); ++i) {
    if (!(tab[i].second >= 0.0) || !std::isfinite(tab[i].second)) {
      throw Error(ErrorCode::invalid_argument, "kappa table values must be finite and >= 0");
    }
    if (i > 0 && !(tab[i].first > tab[i - 1].first)) {
      throw Error(ErrorCode::invalid_argument, "kappa table radii must be strictly increasing");
    }
  }
}

double kappa_value(const KappaSpec& kappa, double r) {
  switch (kappa.family) {
    case KappaFamily::power: return kappa.c * std::pow(r, kappa.alpha);
    case KappaFamily::ramp: return kappa.c * std::min(r / kappa.alpha, 1.0);
    case KappaFamily::table: {
      const auto& tab = kappa.table;
      if (r >= tab.back().first) return tab.back().second;
      auto it = std::upper_bound(tab.begin(), tab.end(), r,
                                 [](double x, const auto& e) { return x < e.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double w = (r - lo.first) / (hi.first - lo.first);
      return lo.second + w * (hi.second - lo.second);
    }
  }
  return 0.0;
}

double kappa_sup(const KappaSpec& kappa, double delta) {
  if (kappa.family != KappaFamily::table) return kappa_value(kappa, delta);
  double best = kappa_value(kappa, delta);
  for (const auto& [r, v] : kappa.table) {
    if (r <= delta) best = std::max(best, v);
  }
  return best;
}

FixedPointProblem make_problem(const Params& params, double t, const KappaSpec& kappa1,
                               const KappaSpec& kappa2, const GridPtr& grid) {
  validate(kappa1);
  validate(kappa2);
  FixedPointProblem prob;
  prob.params = params;
  prob.t = t;
  prob.kappa1 = kappa1;
  prob.kappa2 = kappa2;
  prob.w = profile_field({params, t}, grid);
  return prob;
}

namespace {

// |1 - x|^p - 1 + p x, with a binomial series for small |x|.
double remainder_factor(double p, double x) {
  if (std::abs(x) < 1e-3) {
    // sum_{k>=2} binom(p, k) (-x)^k
    double coef = p;
    double pw = -x;
    double sum = 0.0;
    for (int k = 2; k < 12; ++k) {
      coef *= (p - (k - 1)) / k;
      pw *= -x;
      sum += coef * pw;
    }
    return sum;
  }
  return std::pow(std::abs(1.0 - x), p) - 1.0 + p * x;
}

std::vector<double> remainder(double p, std::span<const double> wp, std::span<const double> zp) {
  std::vector<double> out(wp.size());
  for (std::size_t j = 0; j < wp.size(); ++j) {
    // w' < 0: |w' + z'|^p = |w'|^p |1 - x|^p with x = z'/|w'|.
    const double aw = std::abs(wp[j]);
    const double x = zp[j] / aw;
    out[j] = std::pow(aw, p) * remainder_factor(p, x);
  }
  return out;
}

RadialField values_field(const GridPtr& grid, std::vector<double> v) {
  RadialField f;
  f.grid = grid;
  f.values = std::move(v);
  return f;
}

// kappa |w' + z'|^p + I(z)
RadialField source(const FixedPointProblem& prob, const KappaSpec& kappa, const RadialField& z) {
  const auto& g = *z.grid;
  const double p = prob.params.p;
  auto rem = remainder(p, prob.w.deriv, z.deriv);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double k = kappa_value(kappa, g[j]);
    if (k != 0.0) rem[j] += k * std::pow(std::abs(prob.w.deriv[j] + z.deriv[j]), p);
  }
  return values_field(z.grid, std::move(rem));
}

double pair_distance(const RadialField& a1, const RadialField& b1, const RadialField& a2,
                     const RadialField& b2, double sigma) {
  return norm_X(combine(1.0, a1, -1.0, a2), sigma) + norm_X(combine(1.0, b1, -1.0, b2), sigma);
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RadialField random_field(const GridPtr& grid, double sigma, std::mt19937_64& rng) {
  double coef[4];
  for (double& c : coef) c = 2.0 * unit_uniform(rng) - 1.0;
  // r^-sigma (1 - r^k), k = 1..3, and (1 - r)^2: all admissible, zero at r = 1.
  return sample_field(
      grid,
      [&](double r) {
        const double rs = std::pow(r, -sigma);
        double v = coef[3] * (1 - r) * (1 - r);
        for (int k = 1; k <= 3; ++k) v += coef[k - 1] * rs * (1 - std::pow(r, k));
        return v;
      },
      [&](double r) {
        const double rs = std::pow(r, -sigma);
        double d = -2.0 * coef[3] * (1 - r);
        for (int k = 1; k <= 3; ++k) {
          d += coef[k - 1] * (-sigma * rs / r * (1 - std::pow(r, k)) - k * rs * std::pow(r, k - 1));
        }
        return d;
      });
}

RadialField scaled_to(const RadialField& f, double sigma, double target) {
  const double n = norm_X(f, sigma);
  return n > 0.0 ? scaled(target / n, f) : f;
}

}  // namespace

RadialField nonlinearity_I(const FixedPointProblem& prob, const RadialField& zeta) {
  require_same_grid(zeta, prob.w);
  if (!zeta.has_deriv()) throw Error(ErrorCode::missing_derivative, "I(zeta) needs zeta'");
  return values_field(zeta.grid, remainder(prob.params.p, prob.w.deriv, zeta.deriv));
}

RadialField nonlinearity_I(const Params& params, double t, const RadialField& zeta) {
  if (!zeta.has_deriv()) throw Error(ErrorCode::missing_derivative, "I(zeta) needs zeta'");
  std::vector<double> wp(zeta.size());
  for (std::size_t j = 0; j < wp.size(); ++j) wp[j] = w_prime({params, t}, (*zeta.grid)[j]);
  return values_field(zeta.grid, remainder(params.p, wp, zeta.deriv));
}

MapResult apply_T(const FixedPointProblem& prob, const RadialField& phi, const RadialField& psi) {
  require_same_grid(phi, prob.w);
  require_same_grid(psi, prob.w);
  if (!phi.has_deriv() || !psi.has_deriv()) {
    throw Error(ErrorCode::missing_derivative, "apply_T needs phi' and psi'");
  }
  CoupledRHS rhs{source(prob, prob.kappa1, psi), source(prob, prob.kappa2, phi)};
  const auto sol = solve_coupled(prob.params, prob.t, rhs);
  MapResult out;
  out.phi_hat = sol.phi;
  out.psi_hat = sol.psi;
  out.norm_Y_f = norm_Y(rhs.f, prob.params.sigma);
  out.norm_Y_g = norm_Y(rhs.g, prob.params.sigma);
  return out;
}

std::pair<RadialField, RadialField> random_ball_pair(const GridPtr& grid, double sigma, double R,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto a = random_field(grid, sigma, rng);
  auto b = random_field(grid, sigma, rng);
  const double ua = 0.1 + 0.9 * unit_uniform(rng);
  const double ub = 0.1 + 0.9 * unit_uniform(rng);
  return {scaled_to(a, sigma, ua * R), scaled_to(b, sigma, ub * R)};
}

std::pair<SolutionPair, IterationReport> picard(const FixedPointProblem& prob, double R,
                                                double tol, int max_iter, double delta) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_argument, "picard tol must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::invalid_argument, "picard max_iter must be >= 1");
  if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "picard ball radius must be > 0");
  const double sigma = prob.params.sigma;
  const auto& grid = prob.w.grid;
  RadialField phi = zero_field(grid);
  RadialField psi = zero_field(grid);

  IterationReport rep;
  rep.R = R;
  rep.delta = delta;
  rep.t = prob.t;
  double prev_step = 0.0;
  for (int i = 1; i <= max_iter; ++i) {
    auto next = apply_T(prob, phi, psi);
    const double step = pair_distance(next.phi_hat, next.psi_hat, phi, psi, sigma);
    phi = std::move(next.phi_hat);
    psi = std::move(next.psi_hat);
    IterationRecord rec;
    rec.index = i;
    rec.norm_X_phi = norm_X(phi, sigma);
    rec.norm_X_psi = norm_X(psi, sigma);
    rec.step_norm = step;
    rec.ratio = prev_step > 0.0 ? step / prev_step : 0.0;
    rep.iterations.push_back(rec);
    if (rec.norm_X_phi > R || rec.norm_X_psi > R) {
      std::ostringstream os;
      os.precision(6);
      os << "iterate " << i << " left the ball of radius " << R << " (|phi|_X = "
         << rec.norm_X_phi << ", |psi|_X = " << rec.norm_X_psi << ")";
      throw Error(ErrorCode::ball_escape, os.str());
    }
    prev_step = step;
    if (step <= tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    std::ostringstream os;
    os << "no convergence to " << tol << " within " << max_iter << " iterations (last step "
       << rep.iterations.back().step_norm << ")";
    throw Error(ErrorCode::max_iterations, os.str());
  }
  for (const auto& rec : rep.iterations) {
    rep.empirical_contraction = std::max(rep.empirical_contraction, rec.ratio);
  }
  const auto again = apply_T(prob, phi, psi);
  rep.fixed_point_defect = pair_distance(again.phi_hat, again.psi_hat, phi, psi, sigma);

  SolutionPair sol;
  sol.w = prob.w;
  sol.u = combine(1.0, prob.w, 1.0, phi);
  sol.v = combine(1.0, prob.w, 1.0, psi);
  sol.u.deriv_kind = sol.v.deriv_kind = DerivKind::quadrature;
  sol.phi = std::move(phi);
  sol.psi = std::move(psi);
  sol.t = prob.t;
  sol.R_ball = R;
  return {std::move(sol), std::move(rep)};
}

double empirical_contraction(const FixedPointProblem& prob, double R, int n_pairs,
                             std::uint64_t seed) {
  if (n_pairs < 1) throw Error(ErrorCode::invalid_argument, "n_pairs must be >= 1");
  const double sigma = prob.params.sigma;
  std::vector<double> ratios(static_cast<std::size_t>(n_pairs), 0.0);
  detail::parallel_for(ratios.size(), [&](std::size_t i) {
    const auto x1 = random_ball_pair(prob.w.grid, sigma, R, seed * 1000003ULL + 2 * i);
    const auto x2 = random_ball_pair(prob.w.grid, sigma, R, seed * 1000003ULL + 2 * i + 1);
    const double din = pair_distance(x1.first, x1.second, x2.first, x2.second, sigma);
    if (din == 0.0) return;
    const auto t1 = apply_T(prob, x1.first, x1.second);
    const auto t2 = apply_T(prob, x2.first, x2.second);
    ratios[i] = pair_distance(t1.phi_hat, t1.psi_hat, t2.phi_hat, t2.psi_hat, sigma) / din;
  });
  return *std::max_element(ratios.begin(), ratios.end());
}

namespace {

double linear_constant(const Params& params, double t, const GridPtr& grid) {
  auto unit = [&](auto shape) {
    auto f = sample_field(grid, [&](double r) { return std::pow(r, -params.sigma - 2.0) * shape(r); });
    return scaled(1.0 / norm_Y(f, params.sigma), f);
  };
  std::vector<CoupledRHS> fam;
  fam.push_back({unit([](double) { return 1.0; }), unit([](double) { return 1.0; })});
  fam.push_back({unit([](double) { return 1.0; }), unit([](double) { return -1.0; })});
  fam.push_back({unit([](double r) { return 1.0 - r; }), unit([](double r) { return r; })});
  return stability_sweep(params, {t}, fam).max_ratio;
}

double nonlinear_constant(const FixedPointProblem& prob, double R, std::uint64_t seed) {
  const double sigma = prob.params.sigma;
  const auto& grid = prob.w.grid;
  double best = 0.0;
  auto probe = [&](const RadialField& z) {
    const double nx = norm_X(z, sigma);
    if (nx == 0.0) return;
    best = std::max(best, norm_Y(nonlinearity_I(prob, z), sigma) / std::pow(nx, prob.params.p));
  };
  for (double sgn : {1.0, -1.0}) {
    auto z = sample_field(
        grid, [&](double r) { return sgn * std::pow(r, -sigma) * (1 - r); },
        [&](double r) { return sgn * (-sigma * std::pow(r, -sigma - 1) * (1 - r) - std::pow(r, -sigma)); });
    probe(scaled_to(z, sigma, R));
  }
  for (int i = 0; i < 4; ++i) {
    const auto pr = random_ball_pair(grid, sigma, R, seed + 7919ULL * i);
    probe(scaled_to(pr.first, sigma, R));
    probe(scaled_to(pr.second, sigma, R));
  }
  return best;
}

}  // namespace

ParameterCertificate choose_parameters(const Params& params, const KappaSpec& kappa1,
                                       const KappaSpec& kappa2, const GridPtr& grid,
                                       const SearchOptions& options) {
  validate(kappa1);
  validate(kappa2);
  std::vector<double> ts, rs, ds;
  if (options.t) {
    ts.push_back(*options.t);
  } else {
    for (int m = options.t_exp_min; m <= options.t_exp_max; ++m) ts.push_back(std::pow(10.0, m));
  }
  if (options.R) {
    rs.push_back(*options.R);
  } else {
    for (int j = 1; j <= options.r_exp_max; ++j) rs.push_back(std::ldexp(1.0, -j));
  }
  if (options.delta) {
    ds.push_back(*options.delta);
  } else {
    for (int j = 1; j <= options.delta_exp_max; ++j) ds.push_back(std::ldexp(1.0, -j));
  }

  const double p = params.p;
  const double xm1 = params.xi - 1.0;
  ParameterCertificate best;
  double best_score = -std::numeric_limits<double>::infinity();
  int tested = 0;

  for (double t : ts) {
    if (!(t > 1.0)) continue;  // the estimates behind both inequalities need t > 1
    const auto prob = make_problem(params, t, kappa1, kappa2, grid);
    const double c_lin = linear_constant(params, t, grid);
    for (double R : rs) {
      const double c_nl = nonlinear_constant(prob, R, options.seed);
      const double c = c_lin * std::max({c_nl, std::pow(params.c_beta + R, p), 1.0});
      for (double delta : ds) {
        ++tested;
        const double ksup = kappa_sup(kappa1, delta) + kappa_sup(kappa2, delta);
        const double td = t * std::pow(delta, xm1);
        ParameterCertificate cert;
        cert.R = R;
        cert.delta = delta;
        cert.t = t;
        cert.c_linear = c_lin;
        cert.c_nonlinear = c_nl;
        cert.c_measured = c;
        cert.into_lhs = c * (std::pow(R, p) + ksup + std::pow(td, -p / (p - 1.0)));
        cert.contraction_lhs = c * (ksup + 2.0 * std::pow(R, p - 1.0) + 1.0 / td);
        cert.into_margin = R - cert.into_lhs;
        cert.contraction_margin = 0.5 - cert.contraction_lhs;
        const double score = std::min(cert.into_margin / R, 2.0 * cert.contraction_margin);
        if (score > best_score) {
          best_score = score;
          best = cert;
        }
        if (cert.into_margin < 0.0 || cert.contraction_margin < 0.0) continue;

        // Direct confirmation on probe pairs inside the ball.
        double into = 0.0;
        {
          const auto z = apply_T(prob, zero_field(grid), zero_field(grid));
          into = std::max(norm_X(z.phi_hat, params.sigma), norm_X(z.psi_hat, params.sigma));
        }
        for (int i = 0; i < options.probe_pairs; ++i) {
          const auto pr = random_ball_pair(grid, params.sigma, R, options.seed + 104729ULL * i);
          const auto z = apply_T(prob, pr.first, pr.second);
          into = std::max({into, norm_X(z.phi_hat, params.sigma), norm_X(z.psi_hat, params.sigma)});
        }
        cert.probe_into = into;
        cert.probe_contraction =
            empirical_contraction(prob, R, std::max(options.probe_pairs, 1), options.seed);
        best = cert;
        if (into <= R && cert.probe_contraction <= 0.5) {
          cert.candidates_tested = tested;
          return cert;
        }
      }
    }
  }
  std::ostringstream os;
  os.precision(6);
  os << "no (R, delta, t) on the search grid satisfies both inequalities (" << tested
     << " candidates); best: R = " << best.R << ", delta = " << best.delta << ", t = " << best.t
     << ", into margin " << best.into_margin << ", contraction margin "
     << best.contraction_margin;
  throw Error(ErrorCode::search_exhausted, os.str());
}

}  // namespace sps
