#include "sps/numerics.hpp"

#include <array>
#include <cmath>

#include "sps/errors.hpp"

namespace sps::numerics {

namespace {

struct CellStencil {
  std::size_t first;
  std::array<double, 4> w;  // multiply by h
};

// Integral over [s_j, s_j+1] of the cubic through four nodes.
CellStencil cell_stencil(std::size_t j, std::size_t n_nodes) {
  const std::size_t last = n_nodes - 1;
  if (j == 0) return {0, {9.0 / 24, 19.0 / 24, -5.0 / 24, 1.0 / 24}};
  if (j + 1 == last) return {last - 3, {1.0 / 24, -5.0 / 24, 19.0 / 24, 9.0 / 24}};
  return {j - 1, {-1.0 / 24, 13.0 / 24, 13.0 / 24, -1.0 / 24}};
}

void require_nodes(std::size_t n) {
  if (n < 4) throw Error(ErrorCode::invalid_argument, "cumulative integration needs >= 4 nodes");
}

}  // namespace

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                  int max_order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

std::vector<double> cell_integrals(std::span<const double> q, double h) {
  require_nodes(q.size());
  std::vector<double> out(q.size() - 1);
  for (std::size_t j = 0; j + 1 < q.size(); ++j) {
    const auto st = cell_stencil(j, q.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) acc += st.w[i] * q[st.first + i];
    out[j] = h * acc;
  }
  return out;
}

std::vector<double> cumulative_integral(std::span<const double> q, double h,
                                        std::size_t start) {
  const auto cells = cell_integrals(q, h);
  std::vector<double> out(q.size(), 0.0);
  for (std::size_t j = start; j + 1 < q.size(); ++j) out[j + 1] = out[j] + cells[j];
  for (std::size_t j = start; j-- > 0;) out[j] = out[j + 1] - cells[j];
  return out;
}

std::vector<double> weighted_cumulative(std::span<const double> log_weight,
                                        std::span<const double> g, double h,
                                        std::size_t anchor, double anchor_value) {
  const std::size_t n = g.size();
  require_nodes(n);
  std::vector<double> out(n, 0.0);
  out[anchor] = anchor_value;
  for (std::size_t j = anchor; j + 1 < n; ++j) {
    const double ref = log_weight[j + 1];
    const auto st = cell_stencil(j, n);
    double cell = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t m = st.first + i;
      cell += st.w[i] * std::exp(log_weight[m] - ref) * g[m];
    }
    out[j + 1] = std::exp(log_weight[j] - ref) * out[j] + h * cell;
  }
  for (std::size_t j = anchor; j-- > 0;) {
    const double ref = log_weight[j];
    const auto st = cell_stencil(j, n);
    double cell = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const std::size_t m = st.first + i;
      cell += st.w[i] * std::exp(log_weight[m] - ref) * g[m];
    }
    out[j] = std::exp(log_weight[j + 1] - ref) * out[j + 1] - h * cell;
  }
  return out;
}

std::vector<double> weighted_cumulative_from_end(std::span<const double> log_weight,
                                                 std::span<const double> g, double h) {
  auto out = weighted_cumulative(log_weight, g, h, g.size() - 1, 0.0);
  for (double& v : out) v = -v;
  return out;
}

double local_power_exponent(double r0, double v0, double r1, double v1, double fallback) {
  if (v0 == 0.0 || v1 == 0.0 || (v0 > 0.0) != (v1 > 0.0)) return fallback;
  return std::log(v1 / v0) / std::log(r1 / r0);
}

std::vector<double> log_derivative(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 6) throw Error(ErrorCode::invalid_argument, "log_derivative needs >= 6 nodes");
  std::vector<double> out(n);
  static constexpr std::array<double, 5> central{1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  for (std::size_t j = 2; j + 2 < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) acc += central[i] * values[j - 2 + i];
    out[j] = acc / h;
  }
  // Six-point one-sided stencils at the two end nodes on each side keep the
  // error well below the interior one when the result is differentiated again.
  static const std::array<double, 6> offsets{0, 1, 2, 3, 4, 5};
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
    const std::size_t first = j < 2 ? 0 : n - 6;
    const auto w = fornberg_weights(static_cast<double>(j - first), offsets, 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < 6; ++i) acc += w[1][i] * values[first + i];
    out[j] = acc / h;
  }
  return out;
}

std::vector<double> log_second_derivative(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 6) throw Error(ErrorCode::invalid_argument, "log_second_derivative needs >= 6 nodes");
  std::vector<double> out(n);
  static constexpr std::array<double, 5> central{-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                                                 -1.0 / 12};
  for (std::size_t j = 2; j + 2 < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) acc += central[i] * values[j - 2 + i];
    out[j] = acc / (h * h);
  }
  static const std::array<double, 6> offsets{0, 1, 2, 3, 4, 5};
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) {
    const std::size_t first = j < 2 ? 0 : n - 6;
    const auto w = fornberg_weights(static_cast<double>(j - first), offsets, 2);
    double acc = 0.0;
    for (std::size_t i = 0; i < 6; ++i) acc += w[2][i] * values[first + i];
    out[j] = acc / (h * h);
  }
  return out;
}

}  // namespace sps::numerics
