#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace sps {

/// Geometric node set r_j = r_min (1/r_min)^(j/M), j = 0..M, on (r_min, 1].
/// Nodes are uniform in s = ln r with step h = ln(1/r_min)/M; r_M is exactly 1.
class RadialGrid {
 public:
  RadialGrid(double r_min, int node_count);

  double r_min() const { return r_min_; }
  /// Number of intervals M (the grid carries M+1 nodes).
  int node_count() const { return node_count_; }
  std::size_t size() const { return nodes_.size(); }
  double log_step() const { return log_step_; }
  double operator[](std::size_t j) const { return nodes_[j]; }
  std::span<const double> nodes() const { return nodes_; }
  /// ln r_j, exact multiples of the log step.
  double log_node(std::size_t j) const;

  bool same_as(const RadialGrid& other) const;

 private:
  double r_min_;
  int node_count_;
  double log_step_;
  std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(double r_min = 1e-6, int node_count = 2048);

enum class DerivKind { none, analytic, quadrature, finite_difference };

const char* deriv_kind_name(DerivKind kind);

/// Samples of a radial function (and optionally its radial derivative) on a
/// grid.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;
  std::vector<double> deriv;
  DerivKind deriv_kind = DerivKind::none;

  bool has_deriv() const { return deriv_kind != DerivKind::none; }
  std::size_t size() const { return values.size(); }
};

RadialField zero_field(const GridPtr& grid, bool with_deriv = true);

/// Samples f (and df when given) at every node.
RadialField sample_field(const GridPtr& grid, const std::function<double(double)>& f,
                         const std::function<double(double)>& df = {});

/// a*x + b*y, nodewise, on the common grid (derivatives combined when both
/// carry them). Throws Error(grid_mismatch).
RadialField combine(double a, const RadialField& x, double b, const RadialField& y);
RadialField scaled(double a, const RadialField& x);

void require_same_grid(const RadialField& a, const RadialField& b);

/// Weighted sup norm max_j r^sigma |phi| + r^(sigma+1) |phi'|.
/// Throws Error(missing_derivative) when the field carries no derivative.
double norm_X(const RadialField& field, double sigma);

/// Weighted sup norm max_j r^(sigma+2) |f|.
double norm_Y(const RadialField& field, double sigma);

/// Same, on a bare sample vector.
double norm_Y(std::span<const double> values, const RadialGrid& grid, double sigma);

/// Three-point nonuniform second difference of the values at interior
/// nodes, seven-point one-sided stencils at both ends so the end nodes are
/// no less accurate than the interior.
RadialField fd_second_derivative(const RadialField& field);

/// Three-point nonuniform first difference (one-sided three-point at ends).
std::vector<double> fd_first_derivative(std::span<const double> values, const RadialGrid& grid);

/// Replaces the derivative with a finite-difference one.
RadialField with_fd_derivative(RadialField field);

/// Writes `r,value,deriv` rows with 17 significant digits.
void write_field_csv(std::ostream& os, const RadialField& field);

}  // namespace sps
