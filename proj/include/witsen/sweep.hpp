#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "witsen/bounds.hpp"
#include "witsen/lattice.hpp"
#include "witsen/scalar_exact.hpp"

namespace witsen {

struct AxisRange {
  double log10_lo = 0.0;
  double log10_hi = 1.0;
  int n_points = 2;

  std::vector<double> values() const;
};

struct SweepGrid {
  AxisRange k{-2.5, 1.0, 41};
  AxisRange sigma0{-1.0, 3.0, 41};
  int m = 1;
  LatticeKind lattice = LatticeKind::IntegerGrid;
  /// Overrides the lattice's packing-covering ratio when set.
  std::optional<double> xi;

  double resolved_xi() const;
  void validate() const;
};

enum class SweepMode { AnalyticRatio, ExactScalarRatio };

struct SweepOptions {
  SweepMode mode = SweepMode::AnalyticRatio;
  /// Second-controller rule for ExactScalarRatio.
  Decoder decoder = Decoder::mle();
  LowerBoundSearch search;
  unsigned threads = 0;
};

struct SweepRecord {
  double k = 0.0;
  double sigma0 = 0.0;
  BoundResult upper;
  BoundResult lower;
  double ratio = 0.0;
  /// "ok", "ratio<1" when the upper value falls below the lower one, or
  /// "error: ..." when the point could not be evaluated.
  std::string status = "ok";
};

struct SweepResult {
  int m = 1;
  double xi = 1.0;
  std::vector<SweepRecord> records;  // sigma0-major, k-minor
  double max_ratio = 0.0;
  std::size_t argmax = 0;
  int n_flagged = 0;
};

SweepRecord evaluate_point(const ProblemParams& params, double xi, const SweepOptions& options);

SweepResult run_sweep(const SweepGrid& grid, const SweepOptions& options = {});

inline constexpr const char* kSweepCsvHeader =
    "m,k,sigma0,upper,upper_branch,P_upper,lower,P_lower,sigmaG_sq,L,ratio,status";

/// One row per record in grid order, then a footer row whose status is
/// "max_ratio" carrying the largest ratio and where it occurred.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace witsen
