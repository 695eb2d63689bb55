#pragma once

#include <vector>

#include "sps/grid.hpp"
#include "sps/params.hpp"

namespace sps {

/// Right-hand side (f, g) of the radial linearised system
///   -phi'' - (N-1) phi'/r + p psi'/(beta r + t r^xi) = f
///   -psi'' - (N-1) psi'/r + p phi'/(beta r + t r^xi) = g
struct CoupledRHS {
  RadialField f;
  RadialField g;
};

struct CoupledSolution {
  RadialField phi;
  RadialField psi;
  RadialField zeta1;  // phi + psi, solves the plus problem with f + g
  RadialField zeta2;  // phi - psi, solves the minus problem with f - g
  double anchor = 0.0;  // inner anchor radius of the zeta1 solve
  double stability_ratio = 0.0;  // (|phi|_X + |psi|_X) / (|f|_Y + |g|_Y)
  double residual_1 = 0.0;  // weighted residual of the first line
  double residual_2 = 0.0;
};

/// Solves the radial system by decoupling into the two k = 0 problems and
/// recombining. Throws Error(grid_mismatch) when f and g live on different
/// grids; solver errors propagate.
CoupledSolution solve_coupled(const Params& params, double t, const CoupledRHS& rhs);

/// Residuals of both lines at every node, with second derivatives obtained
/// by differentiating phi' and psi' in ln r.
std::pair<std::vector<double>, std::vector<double>> coupled_residual(
    const Params& params, double t, const RadialField& phi, const RadialField& psi,
    const CoupledRHS& rhs);

struct StabilityEntry {
  double t = 0.0;
  std::size_t member = 0;
  double norm_Y_f = 0.0;
  double norm_Y_g = 0.0;
  double norm_X_phi = 0.0;
  double norm_X_psi = 0.0;
  double ratio = 0.0;
  double residual_1 = 0.0;
  double residual_2 = 0.0;
};

struct StabilityReport {
  std::vector<StabilityEntry> entries;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double spread = 0.0;  // max_ratio / min_ratio
};

/// Stability ratios over every (t, rhs) pair. Throws Error(invalid_argument)
/// on empty lists.
StabilityReport stability_sweep(const Params& params, const std::vector<double>& t_list,
                                const std::vector<CoupledRHS>& rhs_family);

}  // namespace sps
