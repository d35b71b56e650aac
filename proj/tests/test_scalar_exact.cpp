#include <doctest.h>

#include <cmath>
#include <vector>

#include "witsen/bounds.hpp"
#include "witsen/scalar_exact.hpp"

using namespace witsen;

namespace {

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Dense composite Simpson over x0, bin by bin so that the staircase jumps sit
// on panel edges. Accumulates integrals of f(x0, x1) * density(x0).
template <typename F>
double integrate_x0(const ScalarStrategy& s, int points_per_bin, F&& f) {
  const double lim = 9.0 * s.sigma0;
  const long n = static_cast<long>(std::ceil(lim / s.delta)) + 1;
  double total = 0.0;
  for (long i = -n; i <= n; ++i) {
    const double q = i * s.delta;
    const double a = std::max(q - 0.5 * s.delta, -lim);
    const double b = std::min(q + 0.5 * s.delta, lim);
    if (a >= b) continue;
    const int N = points_per_bin % 2 == 0 ? points_per_bin : points_per_bin + 1;
    const double h = (b - a) / N;
    double acc = 0.0;
    for (int j = 0; j <= N; ++j) {
      const double x0 = a + j * h;
      const double x1 = q + s.alpha * (x0 - q);
      const double w = (j == 0 || j == N) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      acc += w * f(x0, x1) * phi(x0 / s.sigma0) / s.sigma0;
    }
    total += acc * h / 3.0;
  }
  return total;
}

double posterior_mean_oracle(const ScalarStrategy& s, double y) {
  const int per_bin = static_cast<int>(1e6 * s.delta / (18.0 * s.sigma0)) + 2;
  const double num = integrate_x0(s, per_bin, [&](double, double x1) { return x1 * phi(y - x1); });
  const double den = integrate_x0(s, per_bin, [&](double, double x1) { return phi(y - x1); });
  return num / den;
}

// E[X1^2] - integral of E[X1 | y]^2 f(y) dy, with y on a fine trapezoid grid.
double mmse_cost_oracle(const ScalarStrategy& s) {
  const double ex2 = integrate_x0(s, 4000, [](double, double x1) { return x1 * x1; });
  const double lim = 9.0 * s.sigma0 + 9.0;
  const int ny = 6001;
  const double dy = 2.0 * lim / (ny - 1);
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double y = -lim + j * dy;
    const double num = integrate_x0(s, 400, [&](double, double x1) { return x1 * phi(y - x1); });
    const double den = integrate_x0(s, 400, [&](double, double x1) { return phi(y - x1); });
    if (den > 0.0) acc += (j == 0 || j == ny - 1 ? 0.5 : 1.0) * num * num / den;
  }
  return ex2 - acc * dy;
}

}  // namespace

TEST_CASE("first-stage cost") {
  SUBCASE("fine quantization limit") {
    const ScalarStrategy s{0.05, 0.0, 5.0};
    CHECK(exact_first_stage_cost(s, 1.0).value == doctest::Approx(0.05 * 0.05 / 12.0).epsilon(1e-3));
  }
  SUBCASE("slope close to one leaves x0 almost untouched") {
    CHECK(exact_first_stage_cost({4.0, 0.999999, 5.0}, 1.0).value < 1e-11);
  }
  SUBCASE("benchmark spacing") {
    CHECK(exact_first_stage_cost({9.92, 0.0, 500.0}, 1e-4).value == doctest::Approx(8.2e-4).epsilon(0.01));
  }
  SUBCASE("dense integration oracle") {
    for (const ScalarStrategy s : {ScalarStrategy{3.0, 0.3, 5.0}, ScalarStrategy{6.5, 0.0, 5.0},
                                   ScalarStrategy{0.7, 0.1, 1.0}}) {
      const double oracle =
          0.04 * integrate_x0(s, 2000, [](double x0, double x1) { return (x1 - x0) * (x1 - x0); });
      CHECK(exact_first_stage_cost(s, 0.04).value == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
  SUBCASE("error bar is tiny") { CHECK(exact_first_stage_cost({2.0, 0.0, 5.0}, 1.0).error_bound < 1e-12); }
}

TEST_CASE("posterior mean") {
  SUBCASE("dense integration oracle") {
    const ScalarStrategy s{4.0, 0.0, 5.0};
    CHECK(std::fabs(mmse_estimate(s, 2.0) - posterior_mean_oracle(s, 2.0)) < 1e-8);
    const ScalarStrategy t{4.0, 0.2, 5.0};
    for (double y : {-7.3, 1.3, 2.0, 11.0}) CHECK(std::fabs(mmse_estimate(t, y) - posterior_mean_oracle(t, y)) < 1e-8);
  }
  SUBCASE("odd symmetry") {
    for (const ScalarStrategy s : {ScalarStrategy{4.0, 0.0, 5.0}, ScalarStrategy{3.1, 0.15, 2.0}}) {
      for (double y : {0.3, 1.9, 5.5, 17.0}) CHECK(mmse_estimate(s, -y) == doctest::Approx(-mmse_estimate(s, y)));
    }
  }
  SUBCASE("single bin") { CHECK(std::fabs(mmse_estimate({1e4, 0.0, 5.0}, 3.0)) < 1e-12); }
  SUBCASE("concentrated posterior") {
    CHECK(mmse_estimate({20.0, 0.0, 500.0}, 40.0) == doctest::Approx(40.0).epsilon(1e-9));
  }
  SUBCASE("reusable estimator agrees") {
    const ScalarStrategy s{2.5, 0.1, 3.0};
    const MmseEstimator est(s);
    for (double y : {-4.0, 0.1, 2.2}) CHECK(est(y) == doctest::Approx(mmse_estimate(s, y)));
  }
}

TEST_CASE("second-stage cost") {
  SUBCASE("quadrature agrees with the nearest-center series") {
    for (double delta : {1.0, 3.0, 6.5, 9.918}) {
      const double quad = exact_second_stage_cost({delta, 0.0, 50.0}, Decoder::mle()).value;
      CHECK(quad == doctest::Approx(mle_second_stage_cost_series(delta)).epsilon(1e-8));
    }
  }
  SUBCASE("benchmark spacing with nearest-center decoding") {
    const double j2 = exact_second_stage_cost({9.918, 0.0, 500.0}, Decoder::mle()).value;
    CHECK(j2 == doctest::Approx(6.7e-5).epsilon(0.05));
  }
  SUBCASE("huge spacing leaves nothing to estimate") {
    CHECK(exact_second_stage_cost({1e4, 0.0, 5.0}, Decoder::mmse()).value < 1e-12);
  }
  SUBCASE("MMSE cost against a nested-integration oracle") {
    for (const ScalarStrategy s : {ScalarStrategy{4.0, 0.0, 5.0}, ScalarStrategy{6.6, 0.035, 5.0},
                                   ScalarStrategy{2.0, 0.4, 1.5}}) {
      const double oracle = mmse_cost_oracle(s);
      CHECK(exact_second_stage_cost(s, Decoder::mmse()).value == doctest::Approx(oracle).epsilon(2e-6));
    }
  }
  SUBCASE("MMSE is the best decoder") {
    for (const ScalarStrategy s : {ScalarStrategy{4.0, 0.0, 5.0}, ScalarStrategy{6.5, 0.05, 5.0},
                                   ScalarStrategy{2.0, 0.0, 1.0}}) {
      const double mmse = exact_second_stage_cost(s, Decoder::mmse()).value;
      CHECK(mmse <= exact_second_stage_cost(s, Decoder::mle()).value);
      for (double c : {0.5, 0.8, 0.95}) CHECK(mmse <= exact_second_stage_cost(s, Decoder::scaled_mle(c)).value);
      const auto best_scale = optimize_mle_scale(s);
      CHECK(best_scale.cost <= exact_second_stage_cost(s, Decoder::mle()).value + 1e-15);
      CHECK(mmse <= best_scale.cost);
    }
  }
  SUBCASE("invalid decoder scale") {
    CHECK_THROWS_AS(exact_second_stage_cost({1.0, 0.0, 1.0}, Decoder::scaled_mle(1.5)), std::invalid_argument);
  }
}

TEST_CASE("strategy validation") {
  CHECK_THROWS_AS(exact_first_stage_cost({0.0, 0.0, 1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(exact_first_stage_cost({1.0, 1.0, 1.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mmse_estimate({1.0, 0.0, -1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("optimization") {
  const auto p = ProblemParams::from_k_sigma0(1, 0.5, 2.0);
  ScalarSearch coarse;
  coarse.delta_grid = 16;
  coarse.alpha_grid = 5;
  const auto pure = optimize_scalar(p, ScalarFamily::PureQuant, Decoder::mmse(), coarse);
  const auto slopey = optimize_scalar(p, ScalarFamily::Slopey, Decoder::mmse(), coarse);
  CHECK(slopey.total <= pure.total + 1e-9);
  CHECK(pure.total == doctest::Approx(pure.j1 + pure.j2));
  CHECK_THROWS_AS(optimize_scalar(ProblemParams::from_k_sigma0(2, 0.5, 2.0), ScalarFamily::PureQuant),
                  std::invalid_argument);

  SUBCASE("series search matches a quadrature re-evaluation") {
    const auto q = ProblemParams::from_k_sigma0(1, 0.2, 5.0);
    const auto opt = optimize_scalar(q, ScalarFamily::PureQuant, Decoder::mle());
    const auto check = evaluate_scalar(q, opt.strategy, Decoder::mle());
    CHECK(check.total == doctest::Approx(opt.total).epsilon(1e-9));
    // the exact cost refines the analytic bound of the same quantizer
    const double power = 0.25 * opt.strategy.delta * opt.strategy.delta;
    CHECK(opt.total <= upper_thm1_at_p(q, 1.0, power));
  }
}
