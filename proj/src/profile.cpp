#include "sps/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sps/errors.hpp"

namespace sps {

namespace {

// ln(t r^(xi-1) + beta) without forming r^(xi-1) for tiny r.
double log_drift(const ProfileSpec& spec, double log_r) {
  const auto& q = spec.params;
  if (spec.t == 0.0) return std::log(q.beta);
  const double a = std::log(spec.t) + (q.xi - 1.0) * log_r;
  const double b = std::log(q.beta);
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Integrand of w_t in s = ln y: exp(-sigma s - (sigma+1) ln(beta + t e^((xi-1)s))).
double log_integrand(const ProfileSpec& spec, double s) {
  return -spec.params.sigma * s - (spec.params.sigma + 1.0) * log_drift(spec, s);
}

double integrate_cell(const ProfileSpec& spec, double s0, double s1) {
  auto f = [&](double s) { return std::exp(log_integrand(spec, s)); };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, s0, s1, 0, 0.0);
}

}  // namespace

void validate(const ProfileSpec& spec) {
  if (!std::isfinite(spec.t) || spec.t < 0.0) {
    throw Error(ErrorCode::invalid_argument, "profile parameter t must be finite and >= 0");
  }
}

double w_value(const ProfileSpec& spec, double r) {
  validate(spec);
  if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::invalid_argument, "w_value needs 0 < r <= 1");
  if (r == 1.0) return 0.0;
  const double s0 = std::log(r);
  auto f = [&](double s) { return std::exp(log_integrand(spec, s)); };
  double err = 0.0;
  const double result = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, s0, 0.0, 12, 1e-13, &err);
  if (!std::isfinite(result) || err > 1e-12 * (1.0 + std::abs(result))) {
    std::ostringstream os;
    os.precision(6);
    os << "w_value quadrature at r = " << r << " missed tolerance (error " << err << ")";
    throw Error(ErrorCode::quadrature, os.str());
  }
  return result;
}

double w0_closed_form(const Params& q, double r) {
  return q.c_beta / q.sigma * std::expm1(-q.sigma * std::log(r));
}

double scaled_w_prime(const ProfileSpec& spec, double r) {
  return -std::exp(-(spec.params.sigma + 1.0) * log_drift(spec, std::log(r)));
}

double w_prime(const ProfileSpec& spec, double r) {
  const double lr = std::log(r);
  return -std::exp(-(spec.params.sigma + 1.0) * (lr + log_drift(spec, lr)));
}

double w_second(const ProfileSpec& spec, double r) {
  const auto& q = spec.params;
  const double lr = std::log(r);
  // w'' = (sigma+1) D^(-sigma-2) D',  D = t r^xi + beta r,  D' = t xi r^(xi-1) + beta.
  const double d_prime = spec.t * q.xi * std::exp((q.xi - 1.0) * lr) + q.beta;
  return (q.sigma + 1.0) * std::exp(-(q.sigma + 2.0) * (lr + log_drift(spec, lr))) * d_prime;
}

RadialField profile_field(const ProfileSpec& spec, const GridPtr& grid) {
  validate(spec);
  const auto& g = *grid;
  const std::size_t n = g.size();
  RadialField out;
  out.grid = grid;
  out.values.assign(n, 0.0);
  out.deriv.resize(n);
  for (std::size_t j = n - 1; j-- > 0;) {
    out.values[j] = out.values[j + 1] + integrate_cell(spec, g.log_node(j), g.log_node(j + 1));
  }
  for (std::size_t j = 0; j < n; ++j) out.deriv[j] = w_prime(spec, g[j]);
  out.deriv_kind = DerivKind::analytic;
  return out;
}

namespace {

ScalarResidual finish_residual(const ProfileSpec& spec, const GridPtr& grid,
                               const std::vector<double>& second) {
  const auto& q = spec.params;
  const auto& g = *grid;
  ScalarResidual out;
  out.residual.grid = grid;
  out.residual.values.resize(g.size());
  std::vector<double> source(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double r = g[j];
    const double wp = w_prime(spec, r);
    source[j] = std::pow(std::abs(wp), q.p);
    out.residual.values[j] = -second[j] - (q.n_dim - 1.0) * wp / r - source[j];
  }
  out.weighted = norm_Y(out.residual, q.sigma) / norm_Y(source, g, q.sigma);
  return out;
}

}  // namespace

ScalarResidual scalar_residual(const ProfileSpec& spec, const GridPtr& grid) {
  std::vector<double> second(grid->size());
  for (std::size_t j = 0; j < grid->size(); ++j) second[j] = w_second(spec, (*grid)[j]);
  return finish_residual(spec, grid, second);
}

ScalarResidual scalar_residual_fd(const ProfileSpec& spec, const GridPtr& grid) {
  const auto w = profile_field(spec, grid);
  return finish_residual(spec, grid, fd_second_derivative(w).values);
}

LimitEstimate sigma_limit_constant(const ProfileSpec& spec) {
  validate(spec);
  const auto& q = spec.params;
  const double xm1 = q.xi - 1.0;

  // Start where the correction t r^(xi-1)/beta is below 1e-3, but keep
  // r^-sigma representable.
  double log_start = std::log(1e-2);
  if (spec.t > 0.0) {
    log_start = std::min(log_start, (std::log(1e-3 * q.beta / spec.t)) / xm1);
  }
  const double log_floor = -600.0 / std::max(q.sigma, 1.0);
  log_start = std::max(log_start, log_floor + 12.0 * std::log(2.0));

  std::vector<double> exponents{q.sigma};
  for (int k = 1; k <= 6; ++k) exponents.push_back(k * xm1);
  std::sort(exponents.begin(), exponents.end());
  std::vector<double> unique;
  for (double e : exponents) {
    if (unique.empty() || e - unique.back() > 1e-9) unique.push_back(e);
  }
  if (unique.size() > 6) unique.resize(6);

  constexpr int kSamples = 12;
  const double ratio = 0.5;
  std::vector<double> seq(kSamples);
  for (int j = 0; j < kSamples; ++j) {
    const double lr = log_start + j * std::log(ratio);
    const double r = std::exp(lr);
    seq[j] = std::exp(q.sigma * lr) * w_value(spec, r);
  }

  std::vector<double> level_last{seq.back()};
  std::vector<double> cur = seq;
  for (double e : unique) {
    if (cur.size() < 2) break;
    const double qe = std::pow(ratio, e);
    std::vector<double> next(cur.size() - 1);
    for (std::size_t j = 0; j + 1 < cur.size(); ++j) {
      next[j] = (cur[j + 1] - qe * cur[j]) / (1.0 - qe);
    }
    cur = std::move(next);
    level_last.push_back(cur.back());
  }

  LimitEstimate out;
  out.estimate = level_last.back();
  out.r_start = std::exp(log_start);
  out.levels = static_cast<int>(level_last.size()) - 1;
  const std::size_t m = level_last.size();
  const double d_last = std::abs(level_last[m - 1] - level_last[m - 2]);
  const double d_prev = std::abs(level_last[m - 2] - level_last[m - 3]);
  // Quadrature noise (1e-13 relative) grows through the extrapolation levels.
  const double floor = 1e-10 * std::abs(out.estimate);
  if (d_last > floor && d_last > d_prev) {
    std::ostringstream os;
    os.precision(6);
    os << "Richardson levels fail to contract (" << d_prev << " -> " << d_last << ")";
    throw Error(ErrorCode::convergence, os.str());
  }
  out.bracket = 2.0 * d_last + floor;
  return out;
}

}  // namespace sps
