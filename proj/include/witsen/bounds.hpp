#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "witsen/specfn.hpp"

namespace witsen {

/// W(m, k^2, sigma0^2) with unit observation-noise variance.
struct ProblemParams {
  int m = 1;
  double k2 = 1.0;         // input-cost weight k^2
  double sigma0_sq = 1.0;  // initial-state variance

  /// Validating constructor from (m, k, sigma0); throws std::invalid_argument.
  static ProblemParams from_k_sigma0(int m, double k, double sigma0);

  double k() const;
  double sigma0() const;
  void validate() const;
};

enum class Branch { Thm1Tight, Thm1Loose, Thm2, Thm3, ZeroInput, ZeroForcing, BestUpper, ExactScalar };

std::string_view to_string(Branch branch);

/// A bound value (per-dimension cost) together with the internal variables
/// that attain it.
struct BoundResult {
  double value = 0.0;
  double p_star = 0.0;
  std::optional<double> sigma_g_sq;
  std::optional<double> truncation_L;
  Branch branch = Branch::Thm1Tight;
};

// ---------------------------------------------------------------------------
// Upper bounds (lattice quantization with the packing-sphere decoder)

/// k^2 P + (sqrt(psi(m+2, r_p)) + sqrt(P/xi^2) sqrt(psi(m, r_p)))^2,
/// r_p = sqrt(m P / xi^2).
double upper_thm1_at_p(const ProblemParams& params, double xi, double power);

/// Chernoff-loosened form; requires P > xi^2.
double upper_thm1_loose_at_p(const ProblemParams& params, double xi, double power);

BoundResult upper_thm1(const ProblemParams& params, double xi);

struct LinearCosts {
  double zero_input = 0.0;    // u1 = 0, LLSE at the second controller
  double zero_forcing = 0.0;  // u1 = -x0
};

LinearCosts linear_costs(const ProblemParams& params);

/// Best of the lattice bound and the two linear strategies.
BoundResult best_upper(const ProblemParams& params, double xi);

// ---------------------------------------------------------------------------
// Lower bounds

/// sigma0^2 / (sigma0^2 + P + 2 sigma0 sqrt(P) + 1)
double kappa(double power, double sigma0_sq);

/// k^2 P + ((sqrt(kappa) - sqrt(P))^+)^2
double lower_thm2_at_p(const ProblemParams& params, double power);

BoundResult lower_thm2(const ProblemParams& params);

/// Distortion floor of the truncated test channel; tends to kappa as
/// (sigma_G^2, L) -> (1, infinity).
double kappa2(int m, double power, double sigma0_sq, double sigma_g_sq, const specfn::TruncationConstants& tc);

/// log of the sphere-packing term eta; -inf when the positive part vanishes.
double log_eta(int m, double power, double sigma0_sq, double sigma_g_sq, double L,
               const specfn::TruncationConstants& tc);

/// k^2 P + eta(P, sigma0^2, sigma_G^2, L). Throws specfn::DegenerateTruncation
/// for an L too small to normalize.
double lower_thm3_at(const ProblemParams& params, double power, double sigma_g_sq, double L);

/// Search space for the inner sup over (sigma_G^2, L) and the outer inf over P.
struct LowerBoundSearch {
  /// Hold L at this value; unset means optimize L over [l_min, l_max].
  std::optional<double> fixed_L = 2.0;
  double l_min = 0.5;
  double l_max = 8.0;
  int sigma_grid = 32;
  int l_grid = 32;
  /// sigma_G^2 ranges over [1, 1 + sigma_span * P].
  double sigma_span = 40.0;
  int p_grid = 200;
  /// The Theorem-2 corner (sigma_G^2 = 1, L = corner_L) is always evaluated.
  double corner_L = 64.0;

  static LowerBoundSearch free_truncation() {
    LowerBoundSearch s;
    s.fixed_L.reset();
    return s;
  }
};

/// inf_P [ k^2 P + sup_{sigma_G^2, L} eta ].
BoundResult lower_thm3(const ProblemParams& params, const LowerBoundSearch& search = {});

/// Inner sup at a fixed power; returns (eta, sigma_G^2, L).
struct EtaMaximum {
  double eta = 0.0;
  double sigma_g_sq = 1.0;
  double L = 64.0;
};
EtaMaximum maximize_eta(const ProblemParams& params, double power, const LowerBoundSearch& search = {});

// ---------------------------------------------------------------------------
// Constant-factor verification

/// g(b) = 0.38 b^2 - 1.5 (1 + ln b^2) - 2 ln(1 + b) - ln 9
double case_analysis_g(double b);
double case_analysis_g_prime(double b);

struct CaseAnalysisReport {
  double g_at_sqrt34 = 0.0;
  double g_prime_at_sqrt34 = 0.0;
  double min_g_on_grid = 0.0;
  bool g_positive = false;
  int n_samples = 0;
  double worst_ratio = 0.0;
  double worst_k = 0.0;
  double worst_sigma0 = 0.0;
  double mu = 0.0;  // 100 xi^2
  bool ratio_within_mu = false;
  bool passed = false;
};

/// Checks g(b) > 0 on [sqrt(34), 100] and best_upper / lower_thm3 <= 100 xi^2
/// at n_samples log-uniform (k, sigma0) draws from 10^[-2.5, 1] x 10^[-1, 3].
CaseAnalysisReport verify_case_analysis(int m, double xi, int n_samples, std::uint64_t seed,
                                        const LowerBoundSearch& search = {});

namespace detail {

/// Upper bound (bits per dimension) on I(X1; Y_L)/m through the truncated
/// Gaussian test channel, for second moment p_bar per dimension.
double capacity_bound_bits(int m, double p_bar, double sigma_g_sq, const specfn::TruncationConstants& tc);

/// Gaussian distortion-rate function sigma0^2 2^(-2R).
double distortion_rate(double sigma0_sq, double rate_bits);

}  // namespace detail

}  // namespace witsen
