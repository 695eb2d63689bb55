#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sps/fixed_point.hpp"
#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace sps {

struct SystemResidual {
  RadialField residual_u;  // -u'' - (N-1) u'/r - (1 + kappa1) |v'|^p
  RadialField residual_v;
  double weighted_u = 0.0;  // norm_Y(residual_u) / norm_Y((1 + kappa1) |v'|^p)
  double weighted_v = 0.0;
};

/// Residual of the radial system for a constructed pair. Both derivatives are
/// recomputed from the nodal values of u and v with finite differences, so
/// nothing is shared with the solver's quadrature.
SystemResidual system_residual(const Params& params, const SolutionPair& pair,
                               const KappaSpec& kappa1, const KappaSpec& kappa2);

struct PositivityReport {
  double min_u = 0.0;
  double min_v = 0.0;
  double limit_constant = 0.0;  // profile estimate of lim r^sigma w_t
  double limit_bracket = 0.0;
  double window_top = 0.0;  // r^sigma u is checked on [r_min, window_top]
  double c_low = 0.0;  // r_top^sigma w_t(r_top) - R
  double c_high = 0.0;  // limit + bracket + R
  double c_low_actual = 0.0;  // same with |phi|_X, |psi|_X in place of R
  double min_scaled_u = 0.0;  // min / max of r^sigma u and r^sigma v in the window
  double max_scaled_u = 0.0;
  double min_scaled_v = 0.0;
  double max_scaled_v = 0.0;
  double sup_deviation = 0.0;  // max(sup r^sigma |u - w|, sup r^sigma |v - w|)
  bool in_bracket = false;
  bool deviation_ok = false;
  bool c_low_positive = false;
  bool c_low_actual_positive = false;
};

/// Positivity of u and v at every node and the blow-up rate near r_min.
/// Throws Error(positivity_violation) naming the first offending node.
PositivityReport positivity_and_blowup(const Params& params, const SolutionPair& pair);

struct DecayEntry {
  double t = 0.0;
  bool certified = false;  // choose_parameters at this t accepted (R, delta)
  int iterations = 0;
  double sup_u = 0.0;  // sup over r >= rho
  double sup_v = 0.0;
  double sup_w = 0.0;
  double profile_bound = 0.0;  // t^(-sigma-1) (rho^(2-N) - 1)/(N-2)
  double r_contribution = 0.0;  // R rho^-sigma
  bool below_bound = false;
};

struct DecayReport {
  double rho = 0.0;
  double R = 0.0;
  std::vector<DecayEntry> entries;
  bool strictly_decreasing = false;
  bool all_below_bound = false;
};

/// Builds the pair for every t in t_list with ball radius R and checks that
/// sup_{r >= rho} u_t, v_t decrease strictly and stay below the explicit
/// profile bound plus R rho^-sigma. Construction errors propagate.
DecayReport decay_in_t(const Params& params, const KappaSpec& kappa1, const KappaSpec& kappa2,
                       const GridPtr& grid, double rho, const std::vector<double>& t_list,
                       double R, double tol, int max_iter);

struct InequalityStats {
  const char* name = "";  // remainder, difference or power_difference
  double sup = 0.0;  // empirical sup over n samples
  double sup_doubled = 0.0;  // over 2n samples
  double relative_change = 0.0;
  double homogeneity_error = 0.0;  // relative change of sup after scaling x, y, z by 1e3
  std::size_t skipped = 0;  // zero denominators
  bool finite = false;
  bool stable = false;  // relative_change < 5%
};

struct InequalityCase {
  double p = 0.0;
  int dim = 0;
  std::vector<InequalityStats> stats;  // one entry per inequality
  bool zero_cases_exact = false;
  double p2_identity_error = 0.0;  // max |ratio - 1| for the first inequality when p = 2
};

struct InequalityReport {
  std::vector<InequalityCase> cases;
  bool passed = false;
};

/// Empirical constants of the three pointwise inequalities behind the
/// contraction estimate, for every p in p_list and dimension in dims.
/// Norms are stratified log-uniformly over [1e-6, 1e6]. Throws
/// Error(invalid_argument) for p outside (1, 2] or n_samples < 1000.
InequalityReport inequality_suite(const std::vector<double>& p_list, const std::vector<int>& dims,
                                  std::size_t n_samples, std::uint64_t seed);

/// The three ratios for one sample (x, y, z). A ratio is NaN when its
/// denominator vanishes.
struct InequalityRatios {
  double remainder, difference, power_difference;
};
InequalityRatios inequality_ratios(double p, std::span<const double> x, std::span<const double> y,
                                   std::span<const double> z);
/// Left-hand sides, evaluated without cancellation in the first one.
double remainder_lhs(double p, std::span<const double> x, std::span<const double> y);
double difference_lhs(double p, std::span<const double> x, std::span<const double> y,
                      std::span<const double> z);
double power_difference_lhs(double p, std::span<const double> x, std::span<const double> y,
                            std::span<const double> z);

struct LowerBoundReport {
  double t = 0.0;
  double z_cut = 0.0;
  double c_star = 0.0;  // (1+beta)^(-1/(p-1)) / sigma
  double min_margin = 0.0;  // min of r^sigma w_t - c_star (1 - (r/z)^sigma)
  double r_at_min = 0.0;
  double r_lo = 0.0;
  int samples = 0;
};

/// Default cut min(1, t^(-1/(xi-1))) / 2.
double default_z_cut(const Params& params, double t);

/// Checks r^sigma w_t(r) >= c_star (1 - (r/z)^sigma) on a geometric sample
/// of (min(r_min, z 1e-8), z). Throws Error(bound_violation).
LowerBoundReport profile_lower_bound(const Params& params, double t, double z_cut,
                                     double r_min = 1e-6, int samples = 400);

}  // namespace sps
