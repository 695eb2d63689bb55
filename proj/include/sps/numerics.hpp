#pragma once

// Low-level numerical kernels shared by the solvers: finite-difference
// weights, fourth-order cumulative integration on log-uniform grids and
// power-law tail closures below the first node.

#include <span>
#include <vector>

namespace sps::numerics {

/// Fornberg finite-difference weights. Returns weights[m][i] for derivative
/// order m = 0..max_order at point x0 using the stencil nodes x.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                  int max_order);

/// Integral of q over every cell [s_j, s_j+1] of a uniform grid with step h,
/// using the cubic through four neighbouring nodes. Requires q.size() >= 4.
std::vector<double> cell_integrals(std::span<const double> q, double h);

/// Running integral from node `start`: out[j] = int_{s_start}^{s_j} q ds for
/// j >= start and -int_{s_j}^{s_start} q ds for j < start.
std::vector<double> cumulative_integral(std::span<const double> q, double h,
                                        std::size_t start);

/// J_j = int_{s_anchor}^{s_j} exp(L(s) - L(s_j)) g(s) ds on a uniform grid in s.
/// For j below the anchor the integral is taken with the reversed orientation
/// (J_j = -int_{s_j}^{s_anchor} ...). `anchor_value` seeds J at the anchor
/// and is itself an integral already scaled by exp(-L(s_anchor)). Every
/// exponential is of a difference of logs so nothing overflows.
std::vector<double> weighted_cumulative(std::span<const double> log_weight,
                                        std::span<const double> g, double h,
                                        std::size_t anchor, double anchor_value = 0.0);

/// Reverse accumulation K_j = int_{s_j}^{s_end} exp(L(s) - L(s_j)) g(s) ds.
std::vector<double> weighted_cumulative_from_end(std::span<const double> log_weight,
                                                 std::span<const double> g, double h);

/// Local power-law exponent of samples (r0, v0), (r1, v1): ln(v1/v0)/ln(r1/r0)
/// when both are nonzero with equal signs, otherwise `fallback`.
double local_power_exponent(double r0, double v0, double r1, double v1, double fallback);

/// Fourth-order derivative d/ds of samples on a uniform grid of step h
/// (5-point central interior, 6-point one-sided at the two end nodes).
std::vector<double> log_derivative(std::span<const double> values, double h);

/// Second derivative d^2/ds^2 with the same stencil layout as log_derivative.
std::vector<double> log_second_derivative(std::span<const double> values, double h);

}  // namespace sps::numerics
