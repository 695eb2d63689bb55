#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace sps {

enum class KappaFamily { power, ramp, table };

const char* kappa_family_name(KappaFamily f);
KappaFamily parse_kappa_family(const std::string& name);

/// Radial perturbation coefficient kappa(r) >= 0 with kappa(0) = 0.
///   power: c r^alpha     ramp: c min(r/alpha, 1)
///   table: piecewise-linear through (r, value) samples, constant past the
///          last sample.
struct KappaSpec {
  KappaFamily family = KappaFamily::power;
  double c = 0.0;
  double alpha = 1.0;
  std::vector<std::pair<double, double>> table;

  bool operator==(const KappaSpec&) const = default;
};

/// Throws Error(invalid_argument) on negative c, non-positive alpha, or a
/// table that is unsorted, negative, or nonzero at the origin.
void validate(const KappaSpec& kappa);
double kappa_value(const KappaSpec& kappa, double r);
/// sup of kappa over the ball of radius delta: kappa(delta) for the monotone
/// families, the table maximum on [0, delta] otherwise.
double kappa_sup(const KappaSpec& kappa, double delta);

/// Everything the nonlinear map needs, precomputed once per (params, t, grid).
struct FixedPointProblem {
  Params params;
  double t = 0.0;
  KappaSpec kappa1;
  KappaSpec kappa2;
  RadialField w;  // profile w_t with analytic w'
};

FixedPointProblem make_problem(const Params& params, double t, const KappaSpec& kappa1,
                               const KappaSpec& kappa2, const GridPtr& grid);

/// Taylor remainder |w' + z'|^p - |w'|^p - p |w'|^(p-1) sgn(w') z' per node.
/// Uses a binomial series when |z'/w'| is small to avoid cancellation.
RadialField nonlinearity_I(const Params& params, double t, const RadialField& zeta);
/// Same, reusing the profile derivative stored in the problem.
RadialField nonlinearity_I(const FixedPointProblem& prob, const RadialField& zeta);

struct MapResult {
  RadialField phi_hat;
  RadialField psi_hat;
  double norm_Y_f = 0.0;
  double norm_Y_g = 0.0;
};

/// One application of the nonlinear map: f = kappa1 |w'+psi'|^p + I(psi),
/// g = kappa2 |w'+phi'|^p + I(phi), followed by one coupled linear solve.
MapResult apply_T(const FixedPointProblem& prob, const RadialField& phi, const RadialField& psi);

struct SolutionPair {
  RadialField phi;
  RadialField psi;
  RadialField w;
  RadialField u;  // w + phi
  RadialField v;  // w + psi
  double t = 0.0;
  double R_ball = 0.0;
};

struct IterationRecord {
  int index = 0;
  double norm_X_phi = 0.0;
  double norm_X_psi = 0.0;
  double step_norm = 0.0;
  double ratio = 0.0;  // step_norm / previous step_norm (0 for the first step)
};

struct IterationReport {
  std::vector<IterationRecord> iterations;
  bool converged = false;
  double empirical_contraction = 0.0;
  double fixed_point_defect = 0.0;  // |T(x*) - x*| in the product norm
  double R = 0.0;
  double delta = 0.0;
  double t = 0.0;
};

/// Banach iteration from (0, 0) until the product-norm step falls below tol.
/// Throws Error(max_iterations) or Error(ball_escape) when an iterate leaves
/// the ball of radius R.
std::pair<SolutionPair, IterationReport> picard(const FixedPointProblem& prob, double R,
                                                double tol, int max_iter, double delta = 0.0);

/// Largest observed |T(x2) - T(x1)| / |x2 - x1| over n_pairs seeded random
/// pairs in the ball of radius R. Pairs with zero distance are skipped.
double empirical_contraction(const FixedPointProblem& prob, double R, int n_pairs,
                             std::uint64_t seed);

/// Random admissible pair with |phi|_X, |psi|_X <= R (deterministic in seed).
std::pair<RadialField, RadialField> random_ball_pair(const GridPtr& grid, double sigma, double R,
                                                     std::uint64_t seed);

struct SearchOptions {
  int t_exp_min = 0;  // t = 10^m for m in [t_exp_min, t_exp_max]
  int t_exp_max = 8;
  int r_exp_max = 12;  // R = 2^-j, j = 1..r_exp_max
  int delta_exp_max = 30;  // delta = 2^-j, j = 1..delta_exp_max
  std::optional<double> t;  // fixed values skip that axis
  std::optional<double> R;
  std::optional<double> delta;
  int probe_pairs = 4;
  std::uint64_t seed = 1;
};

struct ParameterCertificate {
  double R = 0.0;
  double delta = 0.0;
  double t = 0.0;
  double c_linear = 0.0;  // max stability ratio over the probe family
  double c_nonlinear = 0.0;  // max |I(z)|_Y / |z|_X^p over probes
  double c_measured = 0.0;  // constant used in both inequalities
  double into_lhs = 0.0;
  double contraction_lhs = 0.0;
  double into_margin = 0.0;  // R - into_lhs
  double contraction_margin = 0.0;  // 1/2 - contraction_lhs
  double probe_into = 0.0;  // max |T(probe)|_X over probe pairs
  double probe_contraction = 0.0;  // empirical contraction over probe pairs
  int candidates_tested = 0;
};

/// Smallest t (then largest R) on the search grid for which the measured
/// into and contraction inequalities hold and the direct probes confirm
/// them. Throws Error(search_exhausted) with the best margins found.
ParameterCertificate choose_parameters(const Params& params, const KappaSpec& kappa1,
                                       const KappaSpec& kappa2, const GridPtr& grid,
                                       const SearchOptions& options = {});

}  // namespace sps
