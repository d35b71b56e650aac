#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "witsen/bounds.hpp"
#include "witsen/numerics.hpp"
#include "witsen/specfn.hpp"

using namespace witsen;

namespace {

// Direct, linear-space evaluation of the sphere-packing term.
double eta_direct(int m, double power, double s0sq, double sg, double L) {
  const double c = specfn::c_m(m, L);
  const double d = specfn::d_m(m, L);
  const double s = std::sqrt(s0sq) + std::sqrt(power);
  const double k2 = s0sq * sg / (std::pow(c, 2.0 / m) * std::exp(1.0 - d) * (s * s + d * sg));
  const double gap = std::max(0.0, std::sqrt(k2) - std::sqrt(power));
  return std::pow(sg, 0.5 * m) / c * std::exp(-0.5 * m * L * L * (sg - 1.0)) * gap * gap;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ProblemParams::from_k_sigma0(1, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams::from_k_sigma0(1, 0.1, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProblemParams::from_k_sigma0(0, 0.1, 1.0), std::invalid_argument);
  const auto p = ProblemParams::from_k_sigma0(2, 0.3, 4.0);
  CHECK(p.k2 == doctest::Approx(0.09));
  CHECK(p.sigma0_sq == doctest::Approx(16.0));
}

TEST_CASE("upper bound at the endpoints") {
  const auto p = ProblemParams::from_k_sigma0(1, 0.2, 5.0);
  // P = 0: the lattice collapses and only the observation noise remains
  CHECK(upper_thm1_at_p(p, 1.0, 0.0) == doctest::Approx(1.0));
  // large P: noise almost never leaves the packing sphere
  CHECK(upper_thm1_at_p(p, 1.0, 400.0) == doctest::Approx(0.04 * 400.0).epsilon(1e-9));
  CHECK_THROWS_AS(upper_thm1_at_p(p, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("loose form dominates the tight form") {
  for (int m : {1, 2, 3, 10}) {
    const double xi = std::sqrt(static_cast<double>(m));
    const auto p = ProblemParams::from_k_sigma0(m, 0.1, 3.0);
    for (double t : log_grid(1.001, 500.0, 120)) {
      const double power = t * xi * xi;
      CHECK(upper_thm1_loose_at_p(p, xi, power) >= upper_thm1_at_p(p, xi, power));
    }
    CHECK_THROWS_AS(upper_thm1_loose_at_p(p, xi, 0.5 * xi * xi), std::domain_error);
  }
}

TEST_CASE("benchmark point values") {
  const auto p = ProblemParams::from_k_sigma0(1, 0.01, 500.0);
  const BoundResult lower = lower_thm3(p);
  CHECK(lower.value == doctest::Approx(3.170e-4).epsilon(0.02));
  REQUIRE(lower.truncation_L);
  CHECK(*lower.truncation_L == doctest::Approx(2.0));
  const BoundResult upper = upper_thm1(p, 1.0);
  // the analytic bound sits above the exact cost of its own strategy
  CHECK(upper.value >= 8.894e-4);
  CHECK(upper.value <= 3.0 * 8.894e-4);
}

TEST_CASE("linear costs and the best upper bound") {
  const auto p = ProblemParams::from_k_sigma0(1, 1.0, 5.0);
  const auto lin = linear_costs(p);
  CHECK(lin.zero_input == doctest::Approx(25.0 / 26.0));
  CHECK(lin.zero_forcing == doctest::Approx(25.0));
  const auto best = best_upper(p, 1.0);
  CHECK(best.value <= lin.zero_input);
  CHECK(best.branch == Branch::ZeroInput);
  const auto tiny = ProblemParams::from_k_sigma0(1, 0.01, 0.5);
  CHECK(best_upper(tiny, 1.0).branch == Branch::ZeroForcing);
}

TEST_CASE("kappa forms") {
  CHECK(kappa(0.0, 4.0) == doctest::Approx(4.0 / 5.0));
  CHECK(kappa(1.0, 4.0) == doctest::Approx(4.0 / (4.0 + 1.0 + 4.0 + 1.0)));
  const auto corner = specfn::truncation_constants(1, 64.0);
  for (double power : {1e-3, 0.5, 3.0, 40.0}) {
    CHECK(kappa2(1, power, 25.0, 1.0, corner) == doctest::Approx(kappa(power, 25.0)).epsilon(1e-12));
  }
}

TEST_CASE("kappa2 through the rate-distortion route") {
  for (int m : {1, 2, 7}) {
    for (double L : {0.6, 2.0, 4.0}) {
      const auto tc = specfn::truncation_constants(m, L);
      for (double power : {0.01, 1.0, 30.0}) {
        for (double sg : {1.0, 2.5, 50.0}) {
          const double s0sq = 9.0;
          const double p_bar = std::pow(3.0 + std::sqrt(power), 2.0);
          const double rate = detail::capacity_bound_bits(m, p_bar, sg, tc);
          CHECK(detail::distortion_rate(s0sq, rate) ==
                doctest::Approx(kappa2(m, power, s0sq, sg, tc)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("log-space eta matches the direct formula") {
  for (int m : {1, 2, 4}) {
    for (double L : {1.0, 2.0, 3.0}) {
      const auto tc = specfn::truncation_constants(m, L);
      for (double power : {0.01, 0.3, 2.0}) {
        for (double sg : {1.0, 1.7, 4.0}) {
          const double direct = eta_direct(m, power, 25.0, sg, L);
          const double lg = log_eta(m, power, 25.0, sg, L, tc);
          if (direct == 0.0) {
            CHECK(lg == -INFINITY);
          } else {
            CHECK(std::exp(lg) == doctest::Approx(direct).epsilon(1e-11));
          }
        }
      }
    }
  }
  const auto p = ProblemParams::from_k_sigma0(1, 0.2, 5.0);
  CHECK(lower_thm3_at(p, 0.3, 2.0, 2.0) == doctest::Approx(0.04 * 0.3 + eta_direct(1, 0.3, 25.0, 2.0, 2.0)));
  CHECK_THROWS_AS(lower_thm3_at(p, 0.3, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("eta underflow returns zero instead of failing") {
  const auto p = ProblemParams::from_k_sigma0(1, 0.01, 500.0);
  const auto e = maximize_eta(p, 1e6);
  CHECK(e.eta == 0.0);
}

TEST_CASE("bound dominance across a grid") {
  for (double lk : linear_grid(-2.5, 1.0, 6)) {
    for (double ls : linear_grid(-1.0, 3.0, 6)) {
      for (int m : {1, 2, 3}) {
        const auto p = ProblemParams::from_k_sigma0(m, std::pow(10.0, lk), std::pow(10.0, ls));
        const double xi = std::sqrt(static_cast<double>(m));
        const double l2 = lower_thm2(p).value;
        const double l3 = lower_thm3(p).value;
        const double up = best_upper(p, xi).value;
        CHECK(l3 >= l2 - 1e-9);
        CHECK(up >= l3);
        // both linear strategies are achievable
        CHECK(l3 <= std::min(p.k2 * p.sigma0_sq, p.sigma0_sq / (p.sigma0_sq + 1.0)) + 1e-9);
      }
    }
  }
}

TEST_CASE("free truncation never loosens the fixed-L bound by much") {
  for (auto [k, s0] : {std::pair{0.01, 500.0}, std::pair{0.2, 5.0}, std::pair{0.63, 1.0}}) {
    const auto p = ProblemParams::from_k_sigma0(1, k, s0);
    const double fixed = lower_thm3(p).value;
    const double free = lower_thm3(p, LowerBoundSearch::free_truncation()).value;
    CHECK(free >= fixed * (1.0 - 1e-3));
  }
}

TEST_CASE("case analysis constants") {
  const double b = std::sqrt(34.0);
  CHECK(case_analysis_g(b) == doctest::Approx(0.0908).epsilon(0.01));
  CHECK(case_analysis_g_prime(b) > 0.0);
  // derivative against a central difference
  const double h = 1e-6;
  CHECK(case_analysis_g_prime(7.0) ==
        doctest::Approx((case_analysis_g(7.0 + h) - case_analysis_g(7.0 - h)) / (2 * h)).epsilon(1e-6));
  const auto report = verify_case_analysis(1, 1.0, 60, 9);
  CHECK(report.g_positive);
  CHECK(report.ratio_within_mu);
  CHECK(report.worst_ratio >= 1.0);
}
