#pragma once

// Independent reference formulas used by the unit and acceptance tests. They
// recompute everything from the raw definitions with plain pow/log so they do
// not share code paths with the library.

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace oracle {

struct Raw {
  double n, p, xi, beta, sigma, cb;
};

inline Raw raw(int n, double p) {
  Raw q{};
  q.n = n;
  q.p = p;
  q.xi = (p - 1.0) * (n - 1.0);
  q.beta = (p - 1.0) / (q.xi - 1.0);
  q.sigma = (2.0 - p) / (p - 1.0);
  q.cb = std::pow(q.beta, -1.0 / (p - 1.0));
  return q;
}

// +-p a'/(beta r + t r^xi) with + for the plus operator.
inline double drift(const Raw& q, double sgn, double t, double r) {
  return sgn * q.p / (q.beta * r + t * std::pow(r, q.xi));
}

// b = -a'' - (N-1) a'/r + lambda a/r^2 +- p a'/(beta r + t r^xi)
inline double apply_mode(const Raw& q, double sgn, double t, double lam, double r, double a,
                         double ap, double app) {
  return -app - (q.n - 1.0) * ap / r + lam * a / (r * r) + drift(q, sgn, t, r) * ap;
}

// mu for the k = 0 operator, as a plain product of powers.
inline double mu(const Raw& q, double sgn, double t, double r) {
  const double ratio = (t * std::pow(r, q.xi - 1.0) + q.beta) / (t + q.beta);
  const double e = q.p / (q.p - 1.0);
  if (sgn < 0) return std::pow(r, q.n - 1.0 + q.p / q.beta) * std::pow(ratio, -e);
  return std::pow(r, q.n - 1.0 - q.p / q.beta) * std::pow(ratio, e);
}

// int_r^1 ds / mu(s) by adaptive quadrature in ln s.
inline double inv_mu_integral(const Raw& q, double sgn, double t, double r) {
  if (r >= 1.0) return 0.0;
  auto f = [&](double s) {
    const double x = std::exp(s);
    return x / mu(q, sgn, t, x);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(r), 0.0, 12,
                                                                       1e-12);
}

inline sps::RadialField field(const sps::GridPtr& g, const std::function<double(double)>& f) {
  return sps::sample_field(g, f);
}

// Max over nodes of r^sigma |a - b| + r^(sigma+1) |a' - b'|.
inline double x_distance(const sps::RadialField& a, const sps::RadialField& b, double sigma) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double r = (*a.grid)[j];
    const double v = std::pow(r, sigma) * std::abs(a.values[j] - b.values[j]) +
                     std::pow(r, sigma + 1.0) * std::abs(a.deriv[j] - b.deriv[j]);
    best = std::max(best, v);
  }
  return best;
}

struct Manufactured {
  sps::RadialField expected;
  sps::RadialField rhs;
};

// a* = (1 - r)^2 for k = 0.
inline Manufactured k0_case(const sps::GridPtr& g, const sps::Params& prm, sps::Sign sign,
                            double t) {
  const auto q = raw(prm.n_dim, prm.p);
  const double sgn = sps::sign_value(sign);
  Manufactured m;
  m.rhs = field(g, [&](double r) {
    return apply_mode(q, sgn, t, 0.0, r, (1 - r) * (1 - r), -2 * (1 - r), 2.0);
  });
  m.expected = sps::sample_field(
      g, [](double r) { return (1 - r) * (1 - r); }, [](double r) { return -2 * (1 - r); });
  return m;
}

// a* = r^2 (1 - r) for k >= 1.
inline Manufactured mode_case(const sps::GridPtr& g, const sps::Params& prm, int k,
                              sps::Sign sign, double t) {
  const auto q = raw(prm.n_dim, prm.p);
  const double sgn = sps::sign_value(sign);
  const double lam = k * (k + prm.n_dim - 2.0);
  Manufactured m;
  m.rhs = field(g, [&](double r) {
    return apply_mode(q, sgn, t, lam, r, r * r - r * r * r, 2 * r - 3 * r * r, 2 - 6 * r);
  });
  m.expected = sps::sample_field(
      g, [](double r) { return r * r - r * r * r; }, [](double r) { return 2 * r - 3 * r * r; });
  return m;
}

// The k = 0 plus solve anchors at R < 1 and so adds C int_r^1 1/mu with
// C = mu(R) a*'(R) to the manufactured a* = (1 - r)^2.
inline void add_plus_anchor_term(sps::RadialField& expected, const Raw& q, double t,
                                 double anchor) {
  const double c = mu(q, 1.0, t, anchor) * (-2 * (1 - anchor));
  for (std::size_t j = 0; j < expected.size(); ++j) {
    const double r = (*expected.grid)[j];
    expected.values[j] += c * inv_mu_integral(q, 1.0, t, r);
    expected.deriv[j] -= c / mu(q, 1.0, t, r);
  }
}

// w_t(r) = int_r^1 (t y^xi + beta y)^(-1/(p-1)) dy with a 61-point rule in ln y.
inline double w_direct(const Raw& q, double t, double r) {
  if (r >= 1.0) return 0.0;
  auto f = [&](double s) {
    const double y = std::exp(s);
    return y * std::pow(t * std::pow(y, q.xi) + q.beta * y, -1.0 / (q.p - 1.0));
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::log(r), 0.0, 15,
                                                                       1e-13);
}

inline double w_prime_raw(const Raw& q, double t, double r) {
  return -std::pow(t * std::pow(r, q.xi) + q.beta * r, -1.0 / (q.p - 1.0));
}

inline double w_second_raw(const Raw& q, double t, double r) {
  const double d = t * std::pow(r, q.xi) + q.beta * r;
  const double dd = t * q.xi * std::pow(r, q.xi - 1.0) + q.beta;
  return std::pow(d, -1.0 / (q.p - 1.0) - 1.0) * dd / (q.p - 1.0);
}

inline double w0_closed(const Raw& q, double r) {
  return q.cb / q.sigma * (std::pow(r, -q.sigma) - 1.0);
}

}  // namespace oracle
