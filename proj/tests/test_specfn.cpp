#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "witsen/specfn.hpp"

using namespace witsen::specfn;

namespace {
double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }
}  // namespace

TEST_CASE("incomplete gamma agrees with boost") {
  for (double a : {0.5, 1.0, 1.5, 2.0, 4.0, 16.0, 32.5}) {
    for (double x : {1e-3, 0.1, 0.9, 1.0, 2.5, 5.0, 17.0, 40.0, 90.0}) {
      const double p = boost::math::gamma_p(a, x);
      const double q = boost::math::gamma_q(a, x);
      if (p > 1e-300) CHECK(rel(gamma_p(a, x), p) < 1e-12);
      if (q > 1e-300) CHECK(rel(gamma_q(a, x), q) < 1e-12);
      if (q > 1e-300) CHECK(std::fabs(log_gamma_q(a, x) - std::log(q)) < 1e-11);
    }
  }
}

TEST_CASE("psi closed forms") {
  for (double r = 0.0; r <= 10.0; r += 0.05) {
    CHECK(std::fabs(psi(2, r) - std::exp(-0.5 * r * r)) < 1e-13);
    CHECK(std::fabs(psi(1, r) - std::erfc(r / std::sqrt(2.0))) < 1e-13);
    // chi with 4 degrees of freedom: (1 + r^2/2) exp(-r^2/2)
    CHECK(std::fabs(psi(4, r) - (1.0 + 0.5 * r * r) * std::exp(-0.5 * r * r)) < 1e-13);
  }
}

TEST_CASE("log psi stays finite far in the tail") {
  const double v = log_psi(2, 60.0);
  CHECK(std::isfinite(v));
  CHECK(std::fabs(v + 1800.0) < 1e-9);
}

TEST_CASE("cdf and tail are complementary") {
  for (int m : {1, 2, 3, 7, 20}) {
    for (double r : {0.1, 1.0, 3.0, 6.0}) CHECK(std::fabs(chi_cdf(m, r) + psi(m, r) - 1.0) < 1e-14);
  }
}

TEST_CASE("chernoff bound dominates the exact tail") {
  for (int m : {1, 2, 3, 8, 30}) {
    for (double t = 1.05; t < 20.0; t += 0.25) {
      const double r = std::sqrt(t * m);
      CHECK(log_psi_chernoff(m, r) >= log_psi(m, r));
    }
  }
  CHECK_THROWS_AS(psi_chernoff(2, 1.0), std::domain_error);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(psi(0, 1.0), std::domain_error);
  CHECK_THROWS_AS(psi(2, -1.0), std::domain_error);
}

TEST_CASE("truncation constants") {
  SUBCASE("limits at large L") {
    for (int m : {1, 2, 8}) {
      CHECK(std::fabs(c_m(m, 64.0) - 1.0) < 1e-15);
      CHECK(std::fabs(d_m(m, 64.0) - 1.0) < 1e-15);
    }
  }
  SUBCASE("stated inequalities at L = 2") {
    for (int m = 1; m <= 64; ++m) {
      CHECK(c_m(m, 2.0) <= 4.0 / 3.0);
      CHECK(d_m(m, 2.0) >= 1.0 - (1.0 + 2.0 / m) / 4.0);
    }
  }
  SUBCASE("definition via boost") {
    for (int m : {1, 3, 6}) {
      for (double L : {0.5, 1.0, 2.0}) {
        const double x = 0.5 * m * L * L;
        const double p = boost::math::gamma_p(0.5 * m, x);
        CHECK(rel(c_m(m, L), 1.0 / p) < 1e-12);
        CHECK(rel(d_m(m, L), boost::math::gamma_p(0.5 * m + 1.0, x) / p) < 1e-12);
      }
    }
  }
  SUBCASE("degenerate truncation") { CHECK_THROWS_AS(truncation_constants(200, 1e-3), DegenerateTruncation); }
}

TEST_CASE("normal tail helpers") {
  for (double x = -8.0; x <= 30.0; x += 0.37) {
    const double sf = 0.5 * std::erfc(x / std::sqrt(2.0));
    CHECK(rel(norm_sf(x), sf) < 1e-14);
    CHECK(std::fabs(log_norm_sf(x) - std::log(sf)) < 1e-12);
  }
  // continuity across the asymptotic switch
  CHECK(std::fabs(log_norm_sf(36.999999) - log_norm_sf(37.000001)) < 1e-3);
  CHECK(std::isfinite(log_norm_sf(200.0)));
  CHECK(std::fabs(log_norm_sf(200.0) - (-20000.0 - std::log(200.0) - 0.5 * std::log(2.0 * M_PI))) < 1e-4);

  SUBCASE("interval probabilities") {
    CHECK(std::fabs(std::exp(log_norm_interval(-1.0, 1.0)) - std::erf(1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::fabs(log_norm_interval(2.0, 3.0) - log_norm_interval(-3.0, -2.0)) < 1e-15);
    // narrow interval far in the tail: width * density
    const double a = 40.0;
    const double w = 1e-6;
    CHECK(std::fabs(log_norm_interval(a, a + w) - (std::log(w) + log_norm_pdf(a + 0.5 * w))) < 1e-6);
    CHECK(log_norm_interval(1.0, 1.0) == -INFINITY);
    CHECK_THROWS_AS(log_norm_interval(2.0, 1.0), std::domain_error);
  }
}
