#pragma once

#include <memory>
#include <string_view>

#include "witsen/bounds.hpp"

namespace witsen {

/// Scalar staircase map: bins [i delta - delta/2, i delta + delta/2) with
/// centers q_i = i delta, and x1 = q_i + alpha (x0 - q_i) inside bin i.
/// alpha = 0 is plain uniform quantization.
struct ScalarStrategy {
  double delta = 1.0;
  double alpha = 0.0;
  double sigma0 = 1.0;

  void validate() const;
};

enum class DecoderKind { MMSE, MLE, ScaledMLE };

/// Second-controller rule. MLE maps y to the nearest bin center; ScaledMLE
/// multiplies that center by `scale`.
struct Decoder {
  DecoderKind kind = DecoderKind::MMSE;
  double scale = 1.0;

  static Decoder mmse() { return {DecoderKind::MMSE, 1.0}; }
  static Decoder mle() { return {DecoderKind::MLE, 1.0}; }
  static Decoder scaled_mle(double c) { return {DecoderKind::ScaledMLE, c}; }
};

std::string_view to_string(DecoderKind kind);

struct ExactCost {
  double value = 0.0;
  double error_bound = 0.0;
};

/// k^2 E[(X1 - X0)^2], from closed-form Gaussian bin moments.
ExactCost exact_first_stage_cost(const ScalarStrategy& s, double k2);

/// E[X1 | Y2 = y2].
double mmse_estimate(const ScalarStrategy& s, double y2);

/// Reusable form of mmse_estimate for many observations of one strategy.
class MmseEstimator {
 public:
  explicit MmseEstimator(const ScalarStrategy& s);
  ~MmseEstimator();
  MmseEstimator(MmseEstimator&&) noexcept;
  MmseEstimator& operator=(MmseEstimator&&) noexcept;

  double operator()(double y2) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// E[(X1 - xhat(Y2))^2] by adaptive Gauss-Kronrod quadrature over y2, one
/// panel per decision cell.
ExactCost exact_second_stage_cost(const ScalarStrategy& s, const Decoder& decoder);

/// Series form of the nearest-center second-stage cost for alpha = 0:
/// sum over l >= 1 of 2 Pr(noise lands in the l-th neighbouring cell) (l delta)^2.
double mle_second_stage_cost_series(double delta);

enum class ScalarFamily { PureQuant, Slopey };

struct ScalarOptimum {
  ScalarStrategy strategy;
  double j1 = 0.0;
  double j2 = 0.0;
  double total = 0.0;
  double error_bound = 0.0;
};

/// Exact costs of one strategy.
ScalarOptimum evaluate_scalar(const ProblemParams& params, const ScalarStrategy& s, const Decoder& decoder);

struct ScalarSearch {
  int delta_grid = 40;
  int alpha_grid = 10;
  double alpha_max = 0.9;
  /// Use mle_second_stage_cost_series inside the search when the decoder is
  /// MLE and alpha = 0, including for the reported optimum.
  bool mle_series = true;
};

/// Minimizes the exact total over log delta in [log min(sigma0/50, 2), log(20 sigma0)]
/// and, for Slopey, alpha in [0, alpha_max]. Requires m = 1.
ScalarOptimum optimize_scalar(const ProblemParams& params, ScalarFamily family,
                              const Decoder& decoder = Decoder::mmse(), const ScalarSearch& search = {});

struct ScaleFactorOptimum {
  double scale = 1.0;
  double cost = 0.0;
};

/// Best post-multiplier c in (0, 1] for the ScaledMLE decoder.
ScaleFactorOptimum optimize_mle_scale(const ScalarStrategy& s);

}  // namespace witsen
