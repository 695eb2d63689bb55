#pragma once

#include <string>
#include <vector>

namespace sps {

/// Sign of the first-order drift term. `plus` is the operator acting on the
/// sum F = f + g, `minus` the one acting on the difference G = f - g.
enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }
const char* sign_name(Sign s);
Sign parse_sign(const std::string& text);

/// Problem constants for dimension N and gradient exponent p, together with
/// every derived exponent used by the solvers.
struct Params {
  int n_dim = 0;
  double p = 0.0;
  double xi = 0.0;      // (p-1)(N-1)
  double beta = 0.0;    // (p-1)/(xi-1)
  double sigma = 0.0;   // (2-p)/(p-1)
  double c_beta = 0.0;  // beta^(-1/(p-1))
};

/// Validates N >= 3 and N/(N-1) < p < 2 (with a 1e-12 exclusion margin at
/// both ends) and fills the derived constants. Throws Error(domain).
Params derive_params(int n_dim, double p);

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_error = 0.0;
};

/// The eight algebraic identities relating xi, beta, sigma and N, evaluated
/// numerically on both sides.
std::vector<IdentityCheck> params_identities(const Params& params);

/// Eigenvalue of the sphere Laplacian on S^{N-1}: k(k+N-2).
double lambda_k(int n_dim, int k);

struct ModeExponents {
  int k = 0;
  double lambda_k = 0.0;
  double gamma_plus = 0.0;
  double gamma_minus = 0.0;
  Sign kappa_sign = Sign::minus;
};

/// Roots of gamma^2 + (N-2-kappa/beta) gamma - lambda_k = 0 with kappa = +-p.
ModeExponents mode_exponents(const Params& params, int k, Sign kappa_sign);

/// Characteristic polynomial value, used for substitution checks.
double characteristic_value(const Params& params, int k, Sign kappa_sign,
                            double gamma);

struct SignCertificate {
  double direct = 0.0;       // f(-sigma-1) by substitution
  double closed_form = 0.0;  // 2p(1-xi)/(p-1)^2
  double rel_difference = 0.0;
  bool passed = false;
};

/// Evaluates f(g) = g^2 + (N-2+p/beta) g - lambda_1 at g = -sigma-1 directly
/// and by its closed form. Throws Error(certificate) when the two disagree
/// beyond 1e-10 relative or either is non-negative.
SignCertificate sign_certificate(const Params& params);

}  // namespace sps
