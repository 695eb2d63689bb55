#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sps/errors.hpp"
#include "sps/grid.hpp"

using namespace sps;

TEST_CASE("geometric grid layout") {
  const auto g = make_grid(1e-6, 2048);
  CHECK(g->size() == 2049);
  CHECK((*g)[0] == doctest::Approx(1e-6).epsilon(1e-14));
  CHECK((*g)[2048] == 1.0);
  const double ratio = (*g)[1] / (*g)[0];
  for (std::size_t j = 1; j < g->size(); ++j) {
    CHECK((*g)[j] > (*g)[j - 1]);
    CHECK((*g)[j] / (*g)[j - 1] == doctest::Approx(ratio).epsilon(1e-14));
  }
  CHECK_THROWS_AS(RadialGrid(0.0, 100), Error);
  CHECK_THROWS_AS(RadialGrid(1.0, 100), Error);
  CHECK_THROWS_AS(RadialGrid(1e-3, 15), Error);
}

TEST_CASE("norm_X examples") {
  const auto g = make_grid();
  const double s = 2.0 / 3.0;
  CHECK(norm_X(zero_field(g), s) == 0.0);
  const auto phi = sample_field(
      g, [s](double r) { return std::pow(r, -s) * (1 - r); },
      [s](double r) { return -s * std::pow(r, -s - 1) * (1 - r) - std::pow(r, -s); });
  // r^s |phi| + r^(s+1) |phi'| = 1 + s - s r, largest at r_min.
  CHECK(norm_X(phi, s) == doctest::Approx(1 + s - s * 1e-6).epsilon(1e-12));
  CHECK(norm_X(scaled(-2.5, phi), s) == doctest::Approx(2.5 * norm_X(phi, s)).epsilon(1e-15));
  CHECK_THROWS_AS(norm_X(zero_field(g, false), s), Error);
}

TEST_CASE("norm_Y examples") {
  const auto g = make_grid();
  const double s = 2.0 / 3.0;
  CHECK(norm_Y(zero_field(g), s) == 0.0);
  CHECK(norm_Y(sample_field(g, [s](double r) { return std::pow(r, -s - 2); }), s) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(norm_Y(sample_field(g, [s](double r) { return std::pow(r, -s - 1); }), s) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("norms obey the triangle inequality") {
  const auto g = make_grid(1e-4, 256);
  const double s = 0.5;
  const auto a = sample_field(g, [](double r) { return std::sin(5 * r) / r; },
                              [](double r) { return (5 * r * std::cos(5 * r) - std::sin(5 * r)) / (r * r); });
  const auto b = sample_field(g, [](double r) { return 1 - r * r; }, [](double r) { return -2 * r; });
  CHECK(norm_X(combine(1, a, 1, b), s) <= norm_X(a, s) + norm_X(b, s));
  CHECK(norm_Y(combine(1, a, 1, b), s) <= norm_Y(a, s) + norm_Y(b, s));
}

TEST_CASE("second differences") {
  const auto g = make_grid();
  const auto sq = fd_second_derivative(sample_field(g, [](double r) { return r * r; }));
  for (double v : sq.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-9));
  const auto c = fd_second_derivative(sample_field(g, [](double) { return 4.0; }));
  for (std::size_t j = 0; j < c.size(); ++j) CHECK(std::abs(c.values[j]) * (*g)[j] * (*g)[j] < 1e-9);
}

TEST_CASE("second difference of r^-sigma converges at second order") {
  const double s = 2.0 / 3.0;
  auto err = [s](int m) {
    const auto g = make_grid(1e-6, m);
    const auto d = fd_second_derivative(sample_field(g, [s](double r) { return std::pow(r, -s); }));
    double e = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      const double r = (*g)[j];
      const double exact = s * (s + 1) * std::pow(r, -s - 2);
      e = std::max(e, std::abs(d.values[j] - exact) / exact);
    }
    return e;
  };
  const double e1 = err(512), e2 = err(1024);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("finite-difference first derivative and field helpers") {
  const auto g = make_grid(1e-3, 64);
  auto f = with_fd_derivative(sample_field(g, [](double r) { return 3 * r * r - r; }));
  CHECK(f.deriv_kind == DerivKind::finite_difference);
  for (std::size_t j = 0; j < g->size(); ++j) {
    CHECK(f.deriv[j] == doctest::Approx(6 * (*g)[j] - 1).epsilon(1e-9));
  }
  const auto other = make_grid(1e-3, 65);
  CHECK_THROWS_AS(combine(1.0, f, 1.0, zero_field(other)), Error);
}

TEST_CASE("field CSV uses 17 significant digits") {
  const auto g = make_grid(1e-2, 16);
  const auto f = sample_field(g, [](double r) { return 1.0 / 3.0 + r; }, [](double) { return 1.0; });
  std::ostringstream os;
  write_field_csv(os, f);
  const auto text = os.str();
  CHECK(text.rfind("r,value,deriv\n", 0) == 0);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  double r = 0, v = 0, d = 0;
  CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &v, &d) == 3);
  CHECK(r == (*g)[0]);
  CHECK(v == f.values[0]);
}
