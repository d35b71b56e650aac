#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace witsen {

enum class VerifySuite { All, SpecFn, Bounds, CaseAnalysis, Table1 };

/// Parses "all", "specfn", "bounds", "case-analysis", "table1".
std::optional<VerifySuite> parse_suite(std::string_view name);

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;
  double target = 0.0;
  std::string detail;
};

struct VerifyOptions {
  int m = 1;
  std::optional<double> xi;  // defaults to the integer grid's sqrt(m)
  std::uint64_t seed = 1;
  int case_samples = 1000;
};

std::vector<CheckResult> run_verification(VerifySuite suite, const VerifyOptions& options = {});

}  // namespace witsen
