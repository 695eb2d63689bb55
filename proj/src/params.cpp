#include "sps/params.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

#include "sps/errors.hpp"

namespace sps {

namespace {

constexpr double kEndpointMargin = 1e-12;

// |lhs - rhs| measured against the largest term appearing on either side, so
// identities whose two sides are small differences of O(1) terms are judged
// at the precision their inputs actually carry.
IdentityCheck make_check(std::string name, double lhs, double rhs,
                         std::initializer_list<double> terms) {
  double scale = std::max(std::abs(lhs), std::abs(rhs));
  for (double t : terms) scale = std::max(scale, std::abs(t));
  if (scale == 0.0) scale = 1.0;
  return {std::move(name), lhs, rhs, std::abs(lhs - rhs) / scale};
}

}  // namespace

const char* sign_name(Sign s) { return s == Sign::plus ? "+" : "-"; }

Sign parse_sign(const std::string& text) {
  if (text == "+" || text == "plus" || text == "+p" || text == "1") return Sign::plus;
  if (text == "-" || text == "minus" || text == "-p" || text == "-1") return Sign::minus;
  throw Error(ErrorCode::invalid_argument, "unrecognised sign '" + text + "' (use + or -)");
}

Params derive_params(int n_dim, double p) {
  if (n_dim < 3) {
    throw Error(ErrorCode::domain,
                "N = " + std::to_string(n_dim) + " violates N >= 3");
  }
  if (!std::isfinite(p)) throw Error(ErrorCode::domain, "p is not finite");
  const double lower = static_cast<double>(n_dim) / (n_dim - 1);
  if (!(p > lower + kEndpointMargin)) {
    std::ostringstream os;
    os.precision(17);
    os << "p = " << p << " violates lower bound p > N/(N-1) = " << lower;
    throw Error(ErrorCode::domain, os.str());
  }
  if (!(p < 2.0 - kEndpointMargin)) {
    std::ostringstream os;
    os.precision(17);
    os << "p = " << p << " violates upper bound p < 2";
    throw Error(ErrorCode::domain, os.str());
  }

  Params out;
  out.n_dim = n_dim;
  out.p = p;
  const double pm1 = p - 1.0;
  // fma keeps xi - 1 correctly rounded near the lower endpoint of p.
  const double xi_m1 = std::fma(pm1, static_cast<double>(n_dim - 1), -1.0);
  out.xi = 1.0 + xi_m1;
  out.beta = pm1 / xi_m1;
  out.sigma = (2.0 - p) / pm1;
  out.c_beta = std::pow(out.beta, -1.0 / pm1);
  return out;
}

std::vector<IdentityCheck> params_identities(const Params& q) {
  const double n = q.n_dim;
  const double pm1 = q.p - 1.0;
  const double xi_m1 = std::fma(pm1, n - 1.0, -1.0);
  std::vector<IdentityCheck> out;
  out.push_back(make_check("sigma+1 = 1/(p-1)", q.sigma + 1.0, 1.0 / pm1, {q.sigma, 1.0}));
  out.push_back(make_check("(sigma+1)p = sigma+2", (q.sigma + 1.0) * q.p, q.sigma + 2.0,
                           {q.sigma, 2.0}));
  out.push_back(make_check("beta(xi-1) = p-1", q.beta * xi_m1, pm1, {}));
  out.push_back(make_check("N-2-sigma = 1/beta", n - 2.0 - q.sigma, 1.0 / q.beta,
                           {n - 2.0, q.sigma}));
  out.push_back(make_check("sigma+2-N-p/beta = (xi-1)(-1-p)/(p-1)",
                           q.sigma + 2.0 - n - q.p / q.beta, xi_m1 * (-1.0 - q.p) / pm1,
                           {q.sigma, 2.0, n, q.p / q.beta}));
  out.push_back(make_check("(N-1)p-sigma-2 = (xi-1)p/(p-1)",
                           (n - 1.0) * q.p - q.sigma - 2.0, xi_m1 * q.p / pm1,
                           {(n - 1.0) * q.p, q.sigma, 2.0}));
  out.push_back(make_check("N-3-sigma-p/beta = -xi", n - 3.0 - q.sigma - q.p / q.beta,
                           -q.xi, {n, 3.0, q.sigma, q.p / q.beta}));
  out.push_back(make_check("beta*C_beta^(p-1) = 1", q.beta * std::pow(q.c_beta, pm1), 1.0, {}));
  return out;
}

double lambda_k(int n_dim, int k) {
  return static_cast<double>(k) * static_cast<double>(k + n_dim - 2);
}

double characteristic_value(const Params& params, int k, Sign kappa_sign, double gamma) {
  const double kappa = sign_value(kappa_sign) * params.p;
  const double b = params.n_dim - 2.0 - kappa / params.beta;
  return gamma * gamma + b * gamma - lambda_k(params.n_dim, k);
}

ModeExponents mode_exponents(const Params& params, int k, Sign kappa_sign) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "mode index k must be >= 0");
  const double kappa = sign_value(kappa_sign) * params.p;
  const double b = params.n_dim - 2.0 - kappa / params.beta;
  const double lam = lambda_k(params.n_dim, k);
  const double disc = std::sqrt(b * b + 4.0 * lam);

  ModeExponents out;
  out.k = k;
  out.lambda_k = lam;
  out.kappa_sign = kappa_sign;
  // Cancellation-free pairing: compute the root of larger magnitude first and
  // recover the other through the product gamma+ gamma- = -lambda_k.
  if (b >= 0.0) {
    out.gamma_minus = -0.5 * (b + disc);
    out.gamma_plus = out.gamma_minus != 0.0 ? -lam / out.gamma_minus : 0.0;
  } else {
    out.gamma_plus = 0.5 * (-b + disc);
    out.gamma_minus = out.gamma_plus != 0.0 ? -lam / out.gamma_plus : 0.0;
  }
  if (lam == 0.0) {
    out.gamma_plus = std::max(0.0, -b);
    out.gamma_minus = std::min(0.0, -b);
  }
  return out;
}

SignCertificate sign_certificate(const Params& q) {
  const double g = -q.sigma - 1.0;
  const double lin = q.n_dim - 2.0 + q.p / q.beta;
  const double lam1 = lambda_k(q.n_dim, 1);
  SignCertificate c;
  c.direct = g * g + lin * g - lam1;
  const double pm1 = q.p - 1.0;
  const double xi_m1 = std::fma(pm1, q.n_dim - 1.0, -1.0);
  c.closed_form = -2.0 * q.p * xi_m1 / (pm1 * pm1);
  const double scale = std::max({std::abs(c.direct), std::abs(c.closed_form), g * g,
                                 std::abs(lin * g), lam1});
  c.rel_difference = std::abs(c.direct - c.closed_form) / scale;
  c.passed = c.direct < 0.0 && c.closed_form < 0.0 && c.rel_difference <= 1e-10;
  if (!c.passed) {
    std::ostringstream os;
    os.precision(17);
    os << "sign certificate failed: direct = " << c.direct
       << ", closed form = " << c.closed_form << ", rel diff = " << c.rel_difference;
    throw Error(ErrorCode::certificate, os.str());
  }
  return c;
}

}  // namespace sps
