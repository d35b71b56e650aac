#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "witsen/numerics.hpp"

using namespace witsen;

TEST_CASE("golden section finds a parabola minimum") {
  const auto r = golden_section([](double x) { return (x - 1.3) * (x - 1.3) + 2.0; }, -5.0, 5.0);
  CHECK(r.x == doctest::Approx(1.3).epsilon(1e-8));
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("nelder mead on the Rosenbrock valley") {
  NelderMeadOptions o;
  o.max_evaluations = 5000;
  o.x_tol = 1e-11;
  o.f_tol = 1e-20;
  const auto r = nelder_mead(
      [](std::span<const double> v) { return 100.0 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1.0 - v[0], 2); },
      {-1.2, 1.0}, o);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("multistart escapes a local minimum") {
  // global minimum near x = 4, a shallower one near x = -2
  const auto f = [](double x) { return -std::exp(-(x + 2) * (x + 2)) - 2.0 * std::exp(-(x - 4) * (x - 4)); };
  const auto grid = linear_grid(-6.0, 8.0, 30);
  const auto r = multistart_minimize(f, grid);
  CHECK(r.x == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("grids include their endpoints") {
  const auto g = log_grid(1e-3, 1e2, 6);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1e2));
  CHECK(g[1] == doctest::Approx(1e-2));
  const auto l = linear_grid(0.0, 1.0, 5);
  CHECK(l[2] == doctest::Approx(0.5));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; }, threads);
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
  }
  CHECK_THROWS_AS(parallel_for(
                      100, [](std::size_t i) { if (i == 57) throw std::runtime_error("x"); }, 4),
                  std::runtime_error);
}
