#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sps/errors.hpp"
#include "sps/params.hpp"

using namespace sps;

TEST_CASE("derived constants for N = 3, p = 1.6") {
  const auto q = derive_params(3, 1.6);
  CHECK(q.xi == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(q.beta == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(q.sigma == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(q.c_beta == doctest::Approx(std::pow(3.0, -5.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("range checks name the failing bound") {
  CHECK_THROWS_AS(derive_params(4, 4.0 / 3.0), Error);
  try {
    derive_params(4, 4.0 / 3.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
    CHECK(std::string(e.what()).find("N/(N-1)") != std::string::npos);
  }
  try {
    derive_params(2, 1.9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::domain);
    CHECK(std::string(e.what()).find("N") != std::string::npos);
  }
  CHECK_THROWS_AS(derive_params(3, 2.0), Error);
  CHECK_THROWS_AS(derive_params(3, 1.5), Error);
  CHECK_THROWS_AS(derive_params(3, std::nan("")), Error);
}

TEST_CASE("identities hold near the lower endpoint") {
  const auto q = derive_params(3, 1.5 + 1e-9);
  const auto ids = params_identities(q);
  CHECK(ids.size() == 8);
  for (const auto& id : ids) {
    CAPTURE(id.name);
    CHECK(id.rel_error <= 1e-12);
  }
}

TEST_CASE("derived constants agree with the raw formulas for random parameters") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 50; ++i) {
    const int n = 3 + static_cast<int>(rng() % 8);
    const double lo = n / (n - 1.0);
    const double p = lo + (2.0 - lo) * u(rng);
    const auto q = derive_params(n, p);
    const auto r = oracle::raw(n, p);
    CHECK(q.xi == doctest::Approx(r.xi).epsilon(1e-14));
    CHECK(q.beta == doctest::Approx(r.beta).epsilon(1e-12));
    CHECK(q.sigma == doctest::Approx(r.sigma).epsilon(1e-14));
    CHECK(q.c_beta == doctest::Approx(r.cb).epsilon(1e-12));
    for (const auto& id : params_identities(q)) CHECK(id.rel_error <= 1e-10);
  }
}

TEST_CASE("sphere eigenvalues") {
  CHECK(lambda_k(3, 0) == 0.0);
  CHECK(lambda_k(3, 1) == 2.0);
  CHECK(lambda_k(3, 2) == 6.0);
  CHECK(lambda_k(5, 1) == 4.0);
  CHECK(lambda_k(5, 2) == 10.0);
  CHECK(lambda_k(4, 7) == 7.0 * 9.0);
}

TEST_CASE("mode exponents: worked values") {
  const auto q = derive_params(3, 1.6);
  const auto m0 = mode_exponents(q, 0, Sign::minus);
  CHECK(m0.gamma_plus == doctest::Approx(0.0));
  CHECK(m0.gamma_minus == doctest::Approx(-23.0 / 15.0).epsilon(1e-13));

  const auto m1 = mode_exponents(q, 1, Sign::minus);
  CHECK(m1.gamma_minus + q.sigma <= -1.0);
  CHECK(m1.gamma_plus + q.sigma > 0.0);
  CHECK(m1.gamma_minus + q.sigma == doctest::Approx(-1.71).epsilon(0.01));
  CHECK(m1.gamma_plus + q.sigma == doctest::Approx(1.51).epsilon(0.01));

  for (int n : {3, 4, 7}) {
    const auto p = derive_params(n, 0.5 * (n / (n - 1.0) + 2.0));
    const auto mp = mode_exponents(p, 0, Sign::plus);
    CHECK(std::min(std::abs(mp.gamma_plus), std::abs(mp.gamma_minus)) < 1e-14);
  }
}

TEST_CASE("mode exponents: roots, ordering and monotonicity in k") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int i = 0; i < 20; ++i) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const double lo = n / (n - 1.0);
    const auto q = derive_params(n, lo + (2.0 - lo) * u(rng));
    const auto r = oracle::raw(n, q.p);
    double prev_plus = -1e300, prev_minus = 1e300;
    for (int k = 1; k <= 50; ++k) {
      const auto m = mode_exponents(q, k, Sign::minus);
      const double lam = k * (k + n - 2.0);
      const double b = n - 2.0 + r.p / r.beta;
      for (double g : {m.gamma_plus, m.gamma_minus}) {
        CHECK(std::abs(g * g + b * g - lam) <= 1e-10 * (1.0 + lam));
      }
      CHECK(m.gamma_minus <= m.gamma_plus);
      CHECK(m.gamma_minus + q.sigma <= -1.0);
      CHECK(m.gamma_plus + q.sigma > 0.0);
      CHECK(m.gamma_plus > prev_plus);
      CHECK(m.gamma_minus < prev_minus);
      prev_plus = m.gamma_plus;
      prev_minus = m.gamma_minus;
    }
  }
}

TEST_CASE("sign certificate") {
  const auto c = sign_certificate(derive_params(3, 1.6));
  CHECK(c.passed);
  CHECK(c.direct == doctest::Approx(-16.0 / 9.0).epsilon(1e-12));
  CHECK(c.closed_form == doctest::Approx(-16.0 / 9.0).epsilon(1e-12));

  const auto q5 = derive_params(5, 1.5);
  const auto c5 = sign_certificate(q5);
  const auto r = oracle::raw(5, 1.5);
  const double g = -r.sigma - 1.0;
  const double direct = g * g + (r.n - 2.0 + r.p / r.beta) * g - (r.n - 1.0);
  CHECK(c5.direct < 0.0);
  CHECK(c5.direct == doctest::Approx(direct).epsilon(1e-12));
  CHECK(c5.rel_difference <= 1e-10);
}

TEST_CASE("sign parsing") {
  CHECK(parse_sign("plus") == Sign::plus);
  CHECK(parse_sign("-") == Sign::minus);
  CHECK_THROWS_AS(parse_sign("both"), Error);
}
