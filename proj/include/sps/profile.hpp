#pragma once

#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace sps {

/// The one-parameter family of radial singular profiles
///   w_t(r) = int_r^1 dy / (t y^xi + beta y)^(1/(p-1)),   t >= 0,
/// each solving -Delta w = |grad w|^p on the punctured ball with w(1) = 0.
struct ProfileSpec {
  Params params;
  double t = 0.0;
};

/// Throws Error(invalid_argument) unless t is finite and non-negative.
void validate(const ProfileSpec& spec);

/// w_t(r) by adaptive Gauss-Kronrod quadrature in s = ln y. Accepts any
/// r in (0, 1], not only grid nodes. Throws Error(quadrature).
double w_value(const ProfileSpec& spec, double r);

/// Closed form of w_0: (C_beta/sigma)(r^-sigma - 1).
double w0_closed_form(const Params& params, double r);

/// w'_t(r) = -(t r^xi + beta r)^(-1/(p-1)).
double w_prime(const ProfileSpec& spec, double r);

/// r^(sigma+1) w'_t(r) = -(t r^(xi-1) + beta)^(-1/(p-1)).
double scaled_w_prime(const ProfileSpec& spec, double r);

/// Analytic w''_t(r).
double w_second(const ProfileSpec& spec, double r);

/// w_t on every grid node (cell-wise quadrature accumulated from r = 1)
/// with the analytic derivative attached.
RadialField profile_field(const ProfileSpec& spec, const GridPtr& grid);

struct ScalarResidual {
  RadialField residual;   // -w'' - (N-1) w'/r - |w'|^p per node
  double weighted = 0.0;  // norm_Y(residual) / norm_Y(|w'|^p)
};

/// Residual of the radial scalar equation using analytic w' and w''.
ScalarResidual scalar_residual(const ProfileSpec& spec, const GridPtr& grid);

/// Same residual with w'' replaced by the finite-difference second
/// derivative of the quadrature values of w.
ScalarResidual scalar_residual_fd(const ProfileSpec& spec, const GridPtr& grid);

struct LimitEstimate {
  double estimate = 0.0;
  double bracket = 0.0;  // half-width of the uncertainty interval
  double r_start = 0.0;  // largest radius in the extrapolation sequence
  int levels = 0;
};

/// Estimates lim_{r->0} r^sigma w_t(r) by generalized Richardson
/// extrapolation along r_j = r_start 2^-j, eliminating the known error
/// exponents sigma and k(xi-1). r_start is chosen where t r^(xi-1)/beta is
/// small. Throws Error(convergence) when the extrapolation levels stop
/// contracting.
LimitEstimate sigma_limit_constant(const ProfileSpec& spec);

}  // namespace sps
