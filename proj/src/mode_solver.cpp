#include "sps/mode_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "sps/errors.hpp"
#include "sps/numerics.hpp"

namespace sps {

namespace {

// ln(t r^(xi-1) + beta), evaluated in log space.
double log_drift(const ModeSpec& spec, double log_r) {
  const auto& q = spec.params;
  if (spec.t == 0.0) return std::log(q.beta);
  const double a = std::log(spec.t) + (q.xi - 1.0) * log_r;
  const double b = std::log(q.beta);
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// p / (beta + t r^(xi-1))
double drift_ratio(const ModeSpec& spec, double r) {
  return spec.params.p * std::exp(-log_drift(spec, std::log(r)));
}

void validate_spec(const ModeSpec& spec) {
  if (spec.k < 0) throw Error(ErrorCode::invalid_argument, "mode index k must be >= 0");
  if (!std::isfinite(spec.t) || spec.t < 0.0) {
    throw Error(ErrorCode::invalid_argument, "mode parameter t must be finite and >= 0");
  }
}

void validate_rhs(const RadialField& b) {
  if (!b.grid) throw Error(ErrorCode::invalid_argument, "right-hand side has no grid");
  for (double v : b.values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "right-hand side is not finite");
  }
}

// Tail closure int_0^{r0} (tau/r0)^ell b(tau) tau^extra dtau with b a local
// power law b0 (tau/r0)^m fitted on the first two nodes. Data in Y cannot
// grow faster than r^(-sigma-2), so the fit is floored at min_m.
double power_tail(const RadialField& b, double ell, double extra, double min_m) {
  const auto& g = *b.grid;
  const double b0 = b.values[0];
  if (b0 == 0.0) return 0.0;
  const double m =
      std::max(numerics::local_power_exponent(g[0], b0, g[1], b.values[1], min_m), min_m);
  const double e = m + ell + extra + 1.0;
  if (!(e > 0.0)) {
    std::ostringstream os;
    os << "right-hand side too singular at the origin for the tail closure (exponent " << e << ")";
    throw Error(ErrorCode::quadrature, os.str());
  }
  return b0 * std::pow(g[0], extra + 1.0) / e;
}

ModeSolution make_solution(const ModeSpec& spec, const RadialField& b, SolveMethod method) {
  ModeSolution sol;
  sol.spec = spec;
  sol.rhs = b;
  sol.method = method;
  sol.a.grid = b.grid;
  return sol;
}

// a(r) = -int_r^1 a'(tau) dtau, integrated in ln tau.
std::vector<double> integrate_from_boundary(const RadialGrid& g, const std::vector<double>& ap) {
  std::vector<double> q(ap.size());
  for (std::size_t j = 0; j < ap.size(); ++j) q[j] = ap[j] * g[j];
  return numerics::cumulative_integral(q, g.log_step(), ap.size() - 1);
}

}  // namespace

const char* solve_method_name(SolveMethod m) {
  switch (m) {
    case SolveMethod::integrating_factor: return "integrating-factor";
    case SolveMethod::variation_of_parameters: return "variation-of-parameters";
    case SolveMethod::bvp_collocation: return "bvp-collocation";
  }
  return "unknown";
}

double log_mu(const ModeSpec& spec, double r) {
  const auto& q = spec.params;
  if (r == 1.0) return 0.0;
  const double lr = std::log(r);
  const double ratio_log = log_drift(spec, lr) - std::log(spec.t + q.beta);
  const double pp = q.p / (q.p - 1.0);
  if (spec.sign == Sign::minus) {
    return (q.n_dim - 1.0 + q.p / q.beta) * lr - pp * ratio_log;
  }
  return (q.n_dim - 1.0 - q.p / q.beta) * lr + pp * ratio_log;
}

double mu_factor(const ModeSpec& spec, double r) { return std::exp(log_mu(spec, r)); }

double log_mu_slope(const ModeSpec& spec, double r) {
  return spec.params.n_dim - 1.0 - sign_value(spec.sign) * drift_ratio(spec, r);
}

double plus_anchor_radius(const ModeSpec& spec, double r_min) {
  if (spec.t <= 1.0) return 1.0;
  const double log_r = -std::log(spec.t) / (spec.params.xi - 1.0);
  return std::clamp(std::exp(log_r), r_min, 1.0);
}

ModeSolution solve_k0(const ModeSpec& spec, const RadialField& b) {
  validate_spec(spec);
  validate_rhs(b);
  if (spec.k != 0) throw Error(ErrorCode::domain, "solve_k0 handles the k = 0 mode only");
  const auto& g = *b.grid;
  const std::size_t n = g.size();
  const double h = g.log_step();

  std::vector<double> logw(n), gq(n);
  for (std::size_t j = 0; j < n; ++j) {
    logw[j] = log_mu(spec, g[j]);
    gq[j] = b.values[j] * g[j];
  }

  std::size_t anchor = 0;
  double anchor_value = 0.0;
  double anchor_radius = 0.0;
  if (spec.sign == Sign::minus) {
    anchor_value = power_tail(b, log_mu_slope(spec, g[0]), 0.0, -spec.params.sigma - 2.0);
  } else {
    anchor_radius = plus_anchor_radius(spec, g.r_min());
    const double idx = std::round((std::log(anchor_radius) - g.log_node(0)) / h);
    anchor = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(n - 1)));
    anchor_radius = g[anchor];
  }

  auto J = numerics::weighted_cumulative(logw, gq, h, anchor, anchor_value);
  ModeSolution sol = make_solution(spec, b, SolveMethod::integrating_factor);
  sol.anchor = anchor_radius;
  sol.a.deriv.resize(n);
  for (std::size_t j = 0; j < n; ++j) sol.a.deriv[j] = -J[j];
  sol.a.deriv_kind = DerivKind::quadrature;
  sol.a.values = integrate_from_boundary(g, sol.a.deriv);
  return sol;
}

ModeSolution solve_mode_t0(const ModeSpec& spec, const RadialField& b) {
  validate_spec(spec);
  validate_rhs(b);
  if (spec.t != 0.0) throw Error(ErrorCode::domain, "solve_mode_t0 requires t = 0");
  if (spec.k == 0) throw Error(ErrorCode::domain, "solve_mode_t0 requires k >= 1");
  const auto& q = spec.params;
  const auto ex = mode_exponents(q, spec.k, spec.sign);
  const double gp = ex.gamma_plus;
  const double gm = ex.gamma_minus;
  const double delta = gm - gp;

  const auto& g = *b.grid;
  const std::size_t n = g.size();
  const double h = g.log_step();
  std::vector<double> lp(n), lm(n), gq(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = g.log_node(j);
    lp[j] = -gp * s;
    lm[j] = -gm * s;
    gq[j] = b.values[j] * g[j] * g[j];
  }
  // A(r) = int_r^1 (tau/r)^-gamma+ b tau dtau, B(r) = int_0^r (tau/r)^-gamma- b tau dtau.
  const auto A = numerics::weighted_cumulative_from_end(lp, gq, h);
  const double tail = power_tail(b, -gm, 1.0, -q.sigma - 2.0);
  const auto B = numerics::weighted_cumulative(lm, gq, h, 0, tail);
  const double b_one = B[n - 1];

  ModeSolution sol = make_solution(spec, b, SolveMethod::variation_of_parameters);
  sol.a.values.resize(n);
  sol.a.deriv.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = g[j];
    const double rgp = std::pow(r, gp);
    const double u1 = rgp * b_one - A[j];
    sol.a.values[j] = (u1 - B[j]) / delta;
    sol.a.deriv[j] = (gp * u1 - gm * B[j]) / (delta * r);
  }
  sol.a.values[n - 1] = 0.0;
  sol.a.deriv_kind = DerivKind::quadrature;
  sol.bound_constant =
      (2.0 / (-q.sigma - gm) + 1.0 / (q.sigma + gp)) / std::abs(delta);
  return sol;
}

ModeSolution solve_mode_bvp(const ModeSpec& spec, const RadialField& b) {
  validate_spec(spec);
  validate_rhs(b);
  if (spec.k == 0) throw Error(ErrorCode::domain, "solve_mode_bvp requires k >= 1");
  const auto& q = spec.params;
  const auto& g = *b.grid;
  const std::size_t n = g.size();
  const std::size_t last = n - 1;
  const double h = g.log_step();
  const double lam = spec.lambda();
  const double sgn = sign_value(spec.sign);

  auto coeff_c = [&](double r) { return q.n_dim - 2.0 - sgn * drift_ratio(spec, r); };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * 7);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  // Inner closure: frozen-coefficient Euler exponents at r_0. The admissible
  // solution carries no r^gamma- component below r_0, which gives
  //   a_s - gamma+ a = -b0 r0^2 / (m + 2 - gamma-).
  {
    const double c0 = coeff_c(g[0]);
    const double disc = std::sqrt(c0 * c0 + 4.0 * lam);
    const double gp = 0.5 * (-c0 + disc);
    const double gm = 0.5 * (-c0 - disc);
    static const std::array<double, 5> offs{0, 1, 2, 3, 4};
    const auto w = numerics::fornberg_weights(0.0, offs, 1);
    for (int i = 0; i < 5; ++i) trip.emplace_back(0, i, w[1][i] / h);
    trip.emplace_back(0, 0, -gp);
    const double tail = power_tail(b, -gm, 1.0, -q.sigma - 2.0);
    rhs[0] = -tail;
  }

  static const std::array<double, 6> six{0, 1, 2, 3, 4, 5};
  const auto w_first = numerics::fornberg_weights(1.0, six, 2);
  const auto w_last = numerics::fornberg_weights(4.0, six, 2);
  for (std::size_t j = 1; j < last; ++j) {
    const double r = g[j];
    const double c = coeff_c(r);
    const auto row = static_cast<Eigen::Index>(j);
    auto add = [&](std::size_t col, double d1, double d2) {
      trip.emplace_back(row, static_cast<Eigen::Index>(col), -d2 / (h * h) - c * d1 / h);
    };
    if (j == 1) {
      for (std::size_t i = 0; i < 6; ++i) add(i, w_first[1][i], w_first[2][i]);
    } else if (j + 1 == last) {
      for (std::size_t i = 0; i < 6; ++i) add(last - 5 + i, w_last[1][i], w_last[2][i]);
    } else {
      static constexpr std::array<double, 5> d1{1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
      static constexpr std::array<double, 5> d2{-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                                                -1.0 / 12};
      for (std::size_t i = 0; i < 5; ++i) add(j - 2 + i, d1[i], d2[i]);
    }
    trip.emplace_back(row, row, lam);
    rhs[row] = r * r * b.values[j];
  }
  trip.emplace_back(static_cast<Eigen::Index>(last), static_cast<Eigen::Index>(last), 1.0);

  Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  mat.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success) {
    std::ostringstream os;
    os << "mode BVP matrix is singular (k = " << spec.k << ", t = " << spec.t
       << ", nodes = " << n << ", r_min = " << g.r_min() << "): " << lu.lastErrorMessage();
    throw Error(ErrorCode::singular_matrix, os.str());
  }
  const Eigen::VectorXd sol_vec = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol_vec.allFinite()) {
    throw Error(ErrorCode::singular_matrix, "mode BVP back-substitution failed");
  }

  ModeSolution sol = make_solution(spec, b, SolveMethod::bvp_collocation);
  sol.a.values.assign(sol_vec.data(), sol_vec.data() + n);
  const auto as = numerics::log_derivative(sol.a.values, h);
  sol.a.deriv.resize(n);
  for (std::size_t j = 0; j < n; ++j) sol.a.deriv[j] = as[j] / g[j];
  sol.a.deriv_kind = DerivKind::finite_difference;
  return sol;
}

ModeSolution solve_mode(const ModeSpec& spec, const RadialField& b) {
  if (spec.k == 0) return solve_k0(spec, b);
  if (spec.t == 0.0) return solve_mode_t0(spec, b);
  return solve_mode_bvp(spec, b);
}

std::vector<double> mode_residual(const ModeSpec& spec, const RadialField& a,
                                  const RadialField& b) {
  require_same_grid(a, b);
  if (!a.has_deriv()) throw Error(ErrorCode::missing_derivative, "mode residual needs a'");
  const auto& g = *a.grid;
  const auto& q = spec.params;
  const double lam = spec.lambda();
  const double sgn = sign_value(spec.sign);
  // Finite-difference solutions take a'' from a directly; differentiating
  // their a' a second time loses an order at the one-sided end stencils.
  const bool from_values = a.deriv_kind == DerivKind::finite_difference;
  const auto d1 = numerics::log_derivative(from_values ? a.values : a.deriv, g.log_step());
  const auto d2 = from_values ? numerics::log_second_derivative(a.values, g.log_step())
                              : std::vector<double>{};
  std::vector<double> res(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g[j];
    const double app = from_values ? (d2[j] - d1[j]) / (r * r) : d1[j] / r;
    res[j] = -app - (q.n_dim - 1.0) * a.deriv[j] / r + lam * a.values[j] / (r * r) +
             sgn * drift_ratio(spec, r) * a.deriv[j] / r - b.values[j];
  }
  return res;
}

double weighted_mode_residual(const ModeSpec& spec, const RadialField& a, const RadialField& b) {
  const auto res = mode_residual(spec, a, b);
  const double scale = norm_Y(b, spec.params.sigma);
  const double nr = norm_Y(res, *a.grid, spec.params.sigma);
  return scale > 0.0 ? nr / scale : nr;
}

KernelReport kernel_classification(const ModeSpec& spec) {
  validate_spec(spec);
  const auto& q = spec.params;
  KernelReport rep;
  rep.k = spec.k;
  rep.sign = spec.sign;
  const auto ex = mode_exponents(q, spec.k, spec.sign);
  rep.gamma_plus_t0 = ex.gamma_plus;
  rep.gamma_minus_t0 = ex.gamma_minus;
  const double lam = spec.lambda();
  const double c_inf = q.n_dim - 2.0;
  const double disc = std::sqrt(c_inf * c_inf + 4.0 * lam);
  rep.gamma_plus_inf = 0.5 * (-c_inf + disc);
  rep.gamma_minus_inf = 0.5 * (-c_inf - disc);
  rep.k0_exponent_t0 = q.sigma + 2.0 - q.n_dim + sign_value(spec.sign) * q.p / q.beta;
  rep.k0_exponent_inf = q.sigma + 2.0 - q.n_dim;

  std::ostringstream os;
  os.precision(6);
  if (spec.k >= 1) {
    const double lo0 = rep.gamma_minus_t0 + q.sigma;
    const double hi0 = rep.gamma_plus_t0 + q.sigma;
    const double loi = rep.gamma_minus_inf + q.sigma;
    const double hii = rep.gamma_plus_inf + q.sigma;
    rep.trivial_kernel = lo0 < 0.0 && hi0 > 0.0 && loi < 0.0 && hii > 0.0;
    os << "gamma-+sigma = " << lo0 << ", gamma++sigma = " << hi0
       << " (t=0); limits " << loi << ", " << hii << " (t->inf): "
       << (rep.trivial_kernel ? "exponents straddle -sigma, kernel trivial"
                              : "exponents do not straddle -sigma");
  } else if (spec.sign == Sign::minus) {
    rep.trivial_kernel = rep.k0_exponent_t0 < 0.0 && rep.k0_exponent_inf < 0.0;
    os << "r^(sigma+1)/mu ~ r^" << rep.k0_exponent_t0 << " (t=0), r^" << rep.k0_exponent_inf
       << " (t->inf): homogeneous a' = C/mu is inadmissible, C = 0, kernel trivial";
  } else {
    rep.trivial_kernel = rep.k0_exponent_t0 < 0.0;
    os << "r^(sigma+1)/mu ~ r^" << rep.k0_exponent_t0
       << ": homogeneous a' = C/mu is admissible; the inner anchor selects the solution";
  }
  rep.conclusion = os.str();
  return rep;
}

}  // namespace sps
