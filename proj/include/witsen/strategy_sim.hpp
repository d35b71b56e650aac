#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "witsen/bounds.hpp"
#include "witsen/lattice.hpp"

namespace witsen {

// First controller
struct LatticeQuantize {
  LatticeSpec lattice;
};
/// Scalar staircase with slope alpha inside each bin of width delta.
struct SlopeyMap {
  double delta = 1.0;
  double alpha = 0.0;
};
struct ZeroInput {};
struct ZeroForcing {};

// Second controller
/// Lattice point strictly within the packing radius of y2, else y2 itself.
struct PackingSphere {};
struct NearestLattice {};
struct ScaledMle {
  double scale = 1.0;
};
struct Mmse {};
struct Identity {};

using FirstStage = std::variant<LatticeQuantize, SlopeyMap, ZeroInput, ZeroForcing>;
using SecondStage = std::variant<PackingSphere, NearestLattice, ScaledMle, Mmse, Identity>;

class InvalidStrategy : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StrategyConfig {
  FirstStage gamma1 = ZeroInput{};
  SecondStage gamma2 = Mmse{};

  /// Throws InvalidStrategy for combinations that are undefined at dimension m.
  void validate(int m) const;
};

struct CostEstimate {
  double j1_mean = 0.0;
  double j2_mean = 0.0;
  double total_mean = 0.0;
  double total_stderr = 0.0;  // sample std of the per-sample total / sqrt(n)
  double j1_stderr = 0.0;
  double j2_stderr = 0.0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
  double max_u1_sq = 0.0;  // largest ||u1||^2 seen
};

struct SimulationOptions {
  unsigned threads = 0;
  bool zero_noise = false;
};

/// Monte Carlo estimate of the per-dimension stage costs. Sample i draws from
/// its own stream, so the result does not depend on the thread count.
CostEstimate simulate(const ProblemParams& params, const StrategyConfig& strategy, std::int64_t n_samples,
                      std::uint64_t seed, const SimulationOptions& options = {});

std::vector<double> packing_sphere_decode(const LatticeSpec& lattice, std::span<const double> y2);

struct BoundCheck {
  double power = 0.0;
  double bound = 0.0;
  CostEstimate estimate;
  double margin = 0.0;  // bound - simulated mean
  bool passed = false;  // simulated mean - 3 stderr <= bound
};

/// Simulates lattice quantization with the packing-sphere decoder at
/// P = r_c^2 / m and compares with the analytic upper bound at that P.
BoundCheck simulate_vs_bound(const ProblemParams& params, const LatticeSpec& lattice, std::int64_t n_samples,
                             std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace witsen
