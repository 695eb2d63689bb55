#include "sps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sps/errors.hpp"
#include "sps/numerics.hpp"

namespace sps {

RadialGrid::RadialGrid(double r_min, int node_count)
    : r_min_(r_min), node_count_(node_count) {
  if (!(r_min > 0.0 && r_min < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "grid r_min must lie in (0, 1)");
  }
  if (node_count < 16) {
    throw Error(ErrorCode::invalid_argument, "grid node count M must be >= 16");
  }
  const double span = -std::log(r_min);
  log_step_ = span / node_count;
  nodes_.resize(static_cast<std::size_t>(node_count) + 1);
  for (int j = 0; j <= node_count; ++j) {
    // Counting down from r = 1 keeps the last node exact.
    nodes_[j] = std::exp(-static_cast<double>(node_count - j) * log_step_);
  }
  nodes_.front() = r_min;
  nodes_.back() = 1.0;
}

double RadialGrid::log_node(std::size_t j) const {
  return -static_cast<double>(static_cast<std::size_t>(node_count_) - j) * log_step_;
}

bool RadialGrid::same_as(const RadialGrid& other) const {
  return this == &other || (r_min_ == other.r_min_ && node_count_ == other.node_count_);
}

GridPtr make_grid(double r_min, int node_count) {
  return std::make_shared<const RadialGrid>(r_min, node_count);
}

const char* deriv_kind_name(DerivKind kind) {
  switch (kind) {
    case DerivKind::none: return "none";
    case DerivKind::analytic: return "analytic";
    case DerivKind::quadrature: return "quadrature";
    case DerivKind::finite_difference: return "finite-difference";
  }
  return "unknown";
}

RadialField zero_field(const GridPtr& grid, bool with_deriv) {
  RadialField f;
  f.grid = grid;
  f.values.assign(grid->size(), 0.0);
  if (with_deriv) {
    f.deriv.assign(grid->size(), 0.0);
    f.deriv_kind = DerivKind::analytic;
  }
  return f;
}

RadialField sample_field(const GridPtr& grid, const std::function<double(double)>& f,
                         const std::function<double(double)>& df) {
  RadialField out;
  out.grid = grid;
  out.values.resize(grid->size());
  for (std::size_t j = 0; j < grid->size(); ++j) out.values[j] = f((*grid)[j]);
  if (df) {
    out.deriv.resize(grid->size());
    for (std::size_t j = 0; j < grid->size(); ++j) out.deriv[j] = df((*grid)[j]);
    out.deriv_kind = DerivKind::analytic;
  }
  return out;
}

void require_same_grid(const RadialField& a, const RadialField& b) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid) || a.size() != b.size()) {
    throw Error(ErrorCode::grid_mismatch, "fields live on different grids");
  }
}

RadialField combine(double a, const RadialField& x, double b, const RadialField& y) {
  require_same_grid(x, y);
  RadialField out;
  out.grid = x.grid;
  out.values.resize(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out.values[j] = a * x.values[j] + b * y.values[j];
  if (x.has_deriv() && y.has_deriv()) {
    out.deriv.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out.deriv[j] = a * x.deriv[j] + b * y.deriv[j];
    out.deriv_kind = x.deriv_kind == y.deriv_kind ? x.deriv_kind : DerivKind::quadrature;
  }
  return out;
}

RadialField scaled(double a, const RadialField& x) {
  RadialField out = x;
  for (double& v : out.values) v *= a;
  for (double& v : out.deriv) v *= a;
  return out;
}

double norm_X(const RadialField& field, double sigma) {
  if (!field.has_deriv()) {
    throw Error(ErrorCode::missing_derivative, "norm_X needs derivative data");
  }
  const auto& g = *field.grid;
  double best = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double r = g[j];
    const double rs = std::pow(r, sigma);
    best = std::max(best, rs * std::abs(field.values[j]) + rs * r * std::abs(field.deriv[j]));
  }
  return best;
}

double norm_Y(std::span<const double> values, const RadialGrid& grid, double sigma) {
  double best = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    best = std::max(best, std::pow(grid[j], sigma + 2.0) * std::abs(values[j]));
  }
  return best;
}

double norm_Y(const RadialField& field, double sigma) {
  return norm_Y(field.values, *field.grid, sigma);
}

namespace {

double stencil_apply(const RadialGrid& g, std::span<const double> v, std::size_t first,
                     std::size_t count, std::size_t at, int order) {
  std::vector<double> xs(count);
  for (std::size_t i = 0; i < count; ++i) xs[i] = g[first + i];
  const auto w = numerics::fornberg_weights(g[at], xs, order);
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += w[order][i] * v[first + i];
  return acc;
}

}  // namespace

RadialField fd_second_derivative(const RadialField& field) {
  const auto& g = *field.grid;
  const std::size_t n = field.size();
  RadialField out;
  out.grid = field.grid;
  out.values.resize(n);
  const auto& v = field.values;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double hm = g[j] - g[j - 1];
    const double hp = g[j + 1] - g[j];
    out.values[j] = 2.0 * (hm * v[j + 1] - (hm + hp) * v[j] + hp * v[j - 1]) /
                    (hm * hp * (hm + hp));
  }
  out.values[0] = stencil_apply(g, v, 0, 7, 0, 2);
  out.values[n - 1] = stencil_apply(g, v, n - 7, 7, n - 1, 2);
  return out;
}

std::vector<double> fd_first_derivative(std::span<const double> v, const RadialGrid& g) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  for (std::size_t j = 1; j + 1 < n; ++j) out[j] = stencil_apply(g, v, j - 1, 3, j, 1);
  out[0] = stencil_apply(g, v, 0, 3, 0, 1);
  out[n - 1] = stencil_apply(g, v, n - 3, 3, n - 1, 1);
  return out;
}

RadialField with_fd_derivative(RadialField field) {
  field.deriv = fd_first_derivative(field.values, *field.grid);
  field.deriv_kind = DerivKind::finite_difference;
  return field;
}

void write_field_csv(std::ostream& os, const RadialField& field) {
  char buf[96];
  os << "r,value,deriv\n";
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double d = field.has_deriv() ? field.deriv[j] : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", (*field.grid)[j], field.values[j], d);
    os << buf;
  }
}

}  // namespace sps
