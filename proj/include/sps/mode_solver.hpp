#pragma once

#include <string>
#include <vector>

#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace sps {

/// One radial mode problem
///   -a'' - (N-1) a'/r + lambda_k a/r^2 +- p a'/(beta r + t r^xi) = b,  a(1) = 0.
struct ModeSpec {
  Params params;
  int k = 0;
  Sign sign = Sign::plus;
  double t = 0.0;

  double lambda() const { return lambda_k(params.n_dim, k); }
};

enum class SolveMethod { integrating_factor, variation_of_parameters, bvp_collocation };

const char* solve_method_name(SolveMethod m);

struct ModeSolution {
  ModeSpec spec;
  RadialField a;    // values and derivative
  RadialField rhs;  // the b that was supplied
  SolveMethod method = SolveMethod::integrating_factor;
  /// Inner anchor radius of the integrating-factor formula (0 when the
  /// integral runs from the origin). Unused by the other methods.
  double anchor = 0.0;
  /// Sup-bound constant for the variation-of-parameters solver:
  /// sup r^sigma |a| <= bound_constant * norm_Y(b).
  double bound_constant = 0.0;
};

/// ln mu_t(r) for the k = 0 integrating factor, normalised so mu_t(1) = 1:
///   sign -:  (N-1+p/beta) ln r - p/(p-1) ln((t r^(xi-1)+beta)/(t+beta))
///   sign +:  (N-1-p/beta) ln r + p/(p-1) ln((t r^(xi-1)+beta)/(t+beta))
double log_mu(const ModeSpec& spec, double r);
double mu_factor(const ModeSpec& spec, double r);
/// r mu'/mu = (N-1) -+ p/(beta + t r^(xi-1)).
double log_mu_slope(const ModeSpec& spec, double r);

/// Anchor radius R_t = t^(-1/(xi-1)) of the plus-sign formula, clamped into
/// [r_min, 1]. Returned before snapping to a node.
double plus_anchor_radius(const ModeSpec& spec, double r_min);

/// k = 0 solve through the integrating factor:
///   a'(r) = -(1/mu(r)) int_A^r mu b,  a(r) = -int_r^1 a'.
/// The minus sign integrates from the origin (A = 0, closed below r_min by a
/// power-law tail); the plus sign anchors at the grid node nearest to
/// clamp(R_t, r_min, 1). Throws Error(domain) if k != 0.
ModeSolution solve_k0(const ModeSpec& spec, const RadialField& b);

/// t = 0, k >= 1 solve by variation of parameters with the Euler solutions
/// r^gamma+-. Throws Error(domain) if t != 0 or k == 0.
ModeSolution solve_mode_t0(const ModeSpec& spec, const RadialField& b);

/// k >= 1, t >= 0 two-point boundary value solve: fourth-order differences in
/// s = ln r, a(1) = 0, and an inner Robin closure that removes the
/// inadmissible growing mode. Throws Error(singular_matrix).
ModeSolution solve_mode_bvp(const ModeSpec& spec, const RadialField& b);

/// Dispatches to solve_k0 for k = 0, solve_mode_t0 for t = 0, else the BVP.
ModeSolution solve_mode(const ModeSpec& spec, const RadialField& b);

/// Residual of the mode equation. a'' comes from fourth-order differentiation
/// of the stored a' in ln r, or of a itself for finite-difference solutions.
std::vector<double> mode_residual(const ModeSpec& spec, const RadialField& a,
                                  const RadialField& b);

/// norm_Y(residual) / norm_Y(b) (or the absolute value when b vanishes).
double weighted_mode_residual(const ModeSpec& spec, const RadialField& a, const RadialField& b);

struct KernelReport {
  int k = 0;
  Sign sign = Sign::minus;
  // Euler exponents at t = 0 and in the t -> infinity limit.
  double gamma_plus_t0 = 0.0;
  double gamma_minus_t0 = 0.0;
  double gamma_plus_inf = 0.0;
  double gamma_minus_inf = 0.0;
  /// For k = 0: exponent of r^(sigma+1)/mu at t = 0 (sigma+2-N-+p/beta) and
  /// sigma+2-N for the t -> infinity limit.
  double k0_exponent_t0 = 0.0;
  double k0_exponent_inf = 0.0;
  bool trivial_kernel = false;
  std::string conclusion;
};

/// Classifies the admissible kernel of the mode operator with a(1) = 0.
KernelReport kernel_classification(const ModeSpec& spec);

}  // namespace sps
