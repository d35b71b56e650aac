#include "witsen/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "witsen/bounds.hpp"
#include "witsen/numerics.hpp"
#include "witsen/scalar_exact.hpp"
#include "witsen/specfn.hpp"

namespace witsen {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

double rel_err(double value, double target) { return std::fabs(value - target) / std::fabs(target); }

void specfn_suite(std::vector<CheckResult>& out) {
  double worst = 0.0;
  for (double r : linear_grid(0.0, 8.0, 401)) worst = std::max(worst, std::fabs(specfn::psi(2, r) - std::exp(-0.5 * r * r)));
  out.push_back({"specfn", "psi2_closed_form", worst <= 1e-13, worst, 1e-13, fmt("max |psi(2,r) - exp(-r^2/2)| = %.3g", worst)});

  int bad_c = 0;
  int bad_d = 0;
  double max_c = 0.0;
  for (int m = 1; m <= 64; ++m) {
    const double c = specfn::c_m(m, 2.0);
    const double d = specfn::d_m(m, 2.0);
    max_c = std::max(max_c, c);
    if (c > 4.0 / 3.0) ++bad_c;
    if (d < 1.0 - (1.0 + 2.0 / m) / 4.0) ++bad_d;
  }
  out.push_back({"specfn", "c_m(2) <= 4/3", bad_c == 0, max_c, 4.0 / 3.0, fmt("m = 1..64, max c = %.6f", max_c)});
  out.push_back({"specfn", "d_m(2) >= 1 - (1+2/m)/4", bad_d == 0, static_cast<double>(bad_d), 0.0,
                 fmt("%.0f violations over m = 1..64", bad_d)});

  int violations = 0;
  for (int m : {1, 2, 3, 8, 16, 64}) {
    for (double t : linear_grid(1.001, 12.0, 200)) {
      const double r = std::sqrt(t * m);
      if (specfn::log_psi_chernoff(m, r) < specfn::log_psi(m, r) - 1e-12) ++violations;
    }
  }
  out.push_back({"specfn", "chernoff_dominates_tail", violations == 0, static_cast<double>(violations), 0.0,
                 fmt("%.0f grid violations", violations)});
}

void bounds_suite(std::vector<CheckResult>& out) {
  const auto bench = ProblemParams::from_k_sigma0(1, 0.01, 500.0);
  const BoundResult lower = lower_thm3(bench);
  const double e = rel_err(lower.value, 3.170e-4);
  out.push_back({"bounds", "benchmark_lower_bound", e <= 0.02, lower.value, 3.170e-4,
                 fmt("relative error %.3g (tolerance 0.02)", e)});

  int dominance = 0;
  double worst_gap = 0.0;
  for (double lk : linear_grid(-2.5, 1.0, 8)) {
    for (double ls : linear_grid(-1.0, 3.0, 8)) {
      for (int m : {1, 2}) {
        const auto p = ProblemParams::from_k_sigma0(m, std::pow(10.0, lk), std::pow(10.0, ls));
        const double l2 = lower_thm2(p).value;
        const double l3 = lower_thm3(p).value;
        const double up = best_upper(p, std::sqrt(static_cast<double>(m))).value;
        worst_gap = std::max(worst_gap, l2 - l3);
        if (l3 < l2 - 1e-9 || up < l3) ++dominance;
      }
    }
  }
  out.push_back({"bounds", "dominance_grid", dominance == 0, worst_gap, 1e-9,
                 fmt("%.0f violations; max(thm2 - thm3) = %.3g", dominance, worst_gap)});

  int loose = 0;
  for (int m : {1, 2, 4}) {
    const double xi = std::sqrt(static_cast<double>(m));
    const auto p = ProblemParams::from_k_sigma0(m, 0.2, 5.0);
    for (double t : log_grid(1.0001, 1e3, 200)) {
      const double power = t * xi * xi;
      if (upper_thm1_loose_at_p(p, xi, power) < upper_thm1_at_p(p, xi, power)) ++loose;
    }
  }
  out.push_back({"bounds", "loose_form_dominates", loose == 0, static_cast<double>(loose), 0.0,
                 fmt("%.0f grid violations", loose)});

  double kappa_gap = 0.0;
  double dual_gap = 0.0;
  const auto corner = specfn::truncation_constants(1, 64.0);
  for (double power : log_grid(1e-4, 1e2, 50)) {
    for (double s0sq : {0.04, 1.0, 25.0, 250000.0}) {
      const double a = kappa2(1, power, s0sq, 1.0, corner);
      kappa_gap = std::max(kappa_gap, rel_err(a, kappa(power, s0sq)));
      for (int m : {1, 2, 5}) {
        for (double L : {0.7, 2.0, 5.0}) {
          const auto tc = specfn::truncation_constants(m, L);
          for (double sg : {1.0, 3.0, 40.0}) {
            const double direct = kappa2(m, power, s0sq, sg, tc);
            const double p_bar = std::pow(std::sqrt(s0sq) + std::sqrt(power), 2.0);
            const double via_rate = detail::distortion_rate(s0sq, detail::capacity_bound_bits(m, p_bar, sg, tc));
            dual_gap = std::max(dual_gap, rel_err(direct, via_rate));
          }
        }
      }
    }
  }
  out.push_back({"bounds", "kappa2_limit", kappa_gap <= 1e-9, kappa_gap, 1e-9,
                 fmt("max relative gap to kappa at (1, L=64): %.3g", kappa_gap)});
  out.push_back({"bounds", "kappa2_rate_distortion_route", dual_gap <= 1e-12, dual_gap, 1e-12,
                 fmt("max relative gap between the two routes: %.3g", dual_gap)});
}

void case_suite(std::vector<CheckResult>& out, const VerifyOptions& options) {
  const double xi = options.xi ? *options.xi : std::sqrt(static_cast<double>(options.m));
  const CaseAnalysisReport r = verify_case_analysis(options.m, xi, options.case_samples, options.seed);
  out.push_back({"case-analysis", "g(sqrt 34)", std::fabs(r.g_at_sqrt34 - 0.09) <= 0.01, r.g_at_sqrt34, 0.09,
                 fmt("g(sqrt 34) = %.5f, g' = %.4f", r.g_at_sqrt34, r.g_prime_at_sqrt34)});
  out.push_back({"case-analysis", "g_positive", r.g_positive, r.min_g_on_grid, 0.0,
                 fmt("min g on [sqrt 34, 100] = %.5f", r.min_g_on_grid)});
  char detail[160];
  std::snprintf(detail, sizeof detail, "worst ratio %.4f at k=%.4g sigma0=%.4g over %d samples", r.worst_ratio,
                r.worst_k, r.worst_sigma0, r.n_samples);
  out.push_back({"case-analysis", "ratio_within_mu", r.ratio_within_mu, r.worst_ratio, r.mu, detail});
}

void table1_suite(std::vector<CheckResult>& out) {
  const auto p = ProblemParams::from_k_sigma0(1, 0.2, 5.0);
  const ScalarOptimum pure = optimize_scalar(p, ScalarFamily::PureQuant, Decoder::mmse());
  const double e1 = rel_err(pure.total, 0.1715335);
  out.push_back({"table1", "pure_quantization", e1 <= 5e-4, pure.total, 0.1715335,
                 fmt("delta %.6f, relative error %.3g", pure.strategy.delta, e1)});
  const ScalarOptimum slopey = optimize_scalar(p, ScalarFamily::Slopey, Decoder::mmse());
  const double e2 = rel_err(slopey.total, 0.1673654);
  char detail[160];
  std::snprintf(detail, sizeof detail, "delta %.6f alpha %.6f, relative error %.3g", slopey.strategy.delta,
                slopey.strategy.alpha, e2);
  out.push_back({"table1", "slopey_quantization", e2 <= 5e-4, slopey.total, 0.1673654, detail});
}

}  // namespace

std::optional<VerifySuite> parse_suite(std::string_view name) {
  if (name == "all") return VerifySuite::All;
  if (name == "specfn") return VerifySuite::SpecFn;
  if (name == "bounds") return VerifySuite::Bounds;
  if (name == "case-analysis") return VerifySuite::CaseAnalysis;
  if (name == "table1") return VerifySuite::Table1;
  return std::nullopt;
}

std::vector<CheckResult> run_verification(VerifySuite suite, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  const bool all = suite == VerifySuite::All;
  if (all || suite == VerifySuite::SpecFn) specfn_suite(out);
  if (all || suite == VerifySuite::Bounds) bounds_suite(out);
  if (all || suite == VerifySuite::CaseAnalysis) case_suite(out, options);
  if (all || suite == VerifySuite::Table1) table1_suite(out);
  return out;
}

}  // namespace witsen
