#include "witsen/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "witsen/numerics.hpp"
#include "witsen/random.hpp"

namespace witsen {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
// exp(-700) is where we stop pretending eta is distinguishable from zero
constexpr double kLogUnderflow = -700.0;
constexpr double kMinPower = 1e-6;

double power_ceiling(const ProblemParams& params) { return std::max(100.0, 4.0 * params.sigma0_sq); }

std::vector<double> log_power_grid(const ProblemParams& params, int n) {
  std::vector<double> grid = log_grid(kMinPower, power_ceiling(params), n);
  for (double& p : grid) p = std::log(p);
  return grid;
}

void check_xi(double xi) {
  if (!(xi >= 1.0) || !std::isfinite(xi)) {
    throw std::invalid_argument("packing-covering ratio must be >= 1, got " + std::to_string(xi));
  }
}

// Minimizes f(P) over P >= 0: a log grid plus refinement, then the P = 0 end.
Minimum1D minimize_over_power(const ProblemParams& params, const std::function<double(double)>& f,
                              int grid_points) {
  const std::vector<double> grid = log_power_grid(params, grid_points);
  const Minimum1D found =
      multistart_minimize([&](double log_p) { return f(std::exp(log_p)); }, grid, 3, 1e-9);
  Minimum1D best{std::exp(found.x), found.value};
  const double at_zero = f(0.0);
  if (at_zero < best.value) best = {0.0, at_zero};
  return best;
}

// Inner sup of eta at fixed power, with cached truncation constants.
class EtaMaximizer {
 public:
  EtaMaximizer(const ProblemParams& params, const LowerBoundSearch& search)
      : params_(params), search_(search), corner_(specfn::truncation_constants(params.m, search.corner_L)) {
    if (search.fixed_L) {
      l_values_ = {*search.fixed_L};
    } else {
      l_values_ = log_grid(search.l_min, search.l_max, search.l_grid);
    }
    for (double L : l_values_) l_constants_.push_back(specfn::truncation_constants(params.m, L));
  }

  EtaMaximum operator()(double power) const {
    const int m = params_.m;
    const double s0 = params_.sigma0_sq;
    double best_log = log_eta(m, power, s0, 1.0, search_.corner_L, corner_);
    double best_sg = 1.0;
    double best_L = search_.corner_L;

    const double u_max = std::log1p(search_.sigma_span * power);
    const std::vector<double> u_grid = linear_grid(0.0, u_max, std::max(2, search_.sigma_grid));
    std::size_t best_u_index = 0;
    std::size_t best_l_index = 0;
    bool grid_hit = false;
    for (std::size_t j = 0; j < l_values_.size(); ++j) {
      for (std::size_t i = 0; i < u_grid.size(); ++i) {
        const double v = log_eta(m, power, s0, std::exp(u_grid[i]), l_values_[j], l_constants_[j]);
        if (v > best_log) {
          best_log = v;
          best_sg = std::exp(u_grid[i]);
          best_L = l_values_[j];
          best_u_index = i;
          best_l_index = j;
          grid_hit = true;
        }
      }
    }

    if (grid_hit && u_max > 0.0) {
      if (search_.fixed_L) {
        const auto& tc = l_constants_[best_l_index];
        const double L = l_values_[best_l_index];
        const double lo = u_grid[best_u_index == 0 ? 0 : best_u_index - 1];
        const double hi = u_grid[std::min(best_u_index + 1, u_grid.size() - 1)];
        const Minimum1D refined = golden_section(
            [&](double u) {
              const double v = log_eta(m, power, s0, std::exp(u), L, tc);
              return std::isfinite(v) ? -v : kInf;
            },
            lo, hi, 1e-10, 1e-12);
        if (-refined.value > best_log) {
          best_log = -refined.value;
          best_sg = std::exp(refined.x);
        }
      } else {
        const auto objective = [&](std::span<const double> x) {
          const double u = std::max(0.0, x[0]);
          const double L = std::exp(std::clamp(x[1], std::log(1e-2), std::log(1e3)));
          try {
            const double v = log_eta(m, power, s0, std::exp(u), L, specfn::truncation_constants(m, L));
            return std::isfinite(v) ? -v : kInf;
          } catch (const specfn::DegenerateTruncation&) {
            return kInf;
          }
        };
        NelderMeadOptions options;
        options.initial_step = 0.1;
        options.max_evaluations = 400;
        const MinimumND refined =
            nelder_mead(objective, {u_grid[best_u_index], std::log(best_L)}, options);
        if (-refined.value > best_log) {
          best_log = -refined.value;
          best_sg = std::exp(std::max(0.0, refined.x[0]));
          best_L = std::exp(std::clamp(refined.x[1], std::log(1e-2), std::log(1e3)));
        }
      }
    }

    const double eta = best_log < kLogUnderflow ? 0.0 : std::exp(best_log);
    return {eta, best_sg, best_L};
  }

 private:
  const ProblemParams& params_;
  const LowerBoundSearch& search_;
  specfn::TruncationConstants corner_;
  std::vector<double> l_values_;
  std::vector<specfn::TruncationConstants> l_constants_;
};

}  // namespace

// ---------------------------------------------------------------------------

ProblemParams ProblemParams::from_k_sigma0(int m, double k, double sigma0) {
  ProblemParams p{m, k * k, sigma0 * sigma0};
  if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  p.validate();
  return p;
}

double ProblemParams::k() const { return std::sqrt(k2); }
double ProblemParams::sigma0() const { return std::sqrt(sigma0_sq); }

void ProblemParams::validate() const {
  if (m < 1) throw std::invalid_argument("m must be >= 1, got " + std::to_string(m));
  if (!(k2 > 0.0) || !std::isfinite(k2)) throw std::invalid_argument("k^2 must be positive and finite");
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw std::invalid_argument("sigma0^2 must be positive and finite");
  }
}

std::string_view to_string(Branch branch) {
  switch (branch) {
    case Branch::Thm1Tight: return "thm1";
    case Branch::Thm1Loose: return "thm1-loose";
    case Branch::Thm2: return "thm2";
    case Branch::Thm3: return "thm3";
    case Branch::ZeroInput: return "zero-input";
    case Branch::ZeroForcing: return "zero-forcing";
    case Branch::BestUpper: return "best-upper";
    case Branch::ExactScalar: return "exact-scalar";
  }
  return "unknown";
}

double upper_thm1_at_p(const ProblemParams& params, double xi, double power) {
  check_xi(xi);
  if (!(power >= 0.0)) throw std::invalid_argument("power must be nonnegative");
  const int m = params.m;
  const double r_p = std::sqrt(m * power) / xi;
  const double outer = std::exp(0.5 * specfn::log_psi(m + 2, r_p));
  const double inner = std::sqrt(power) / xi * std::exp(0.5 * specfn::log_psi(m, r_p));
  return params.k2 * power + (outer + inner) * (outer + inner);
}

double upper_thm1_loose_at_p(const ProblemParams& params, double xi, double power) {
  check_xi(xi);
  const double ratio = power / (xi * xi);
  if (!(ratio > 1.0)) throw std::domain_error("loose upper bound requires P > xi^2");
  const int m = params.m;
  const double lead = (1.0 + std::sqrt(ratio)) * (1.0 + std::sqrt(ratio));
  const double exponent = -0.5 * m * ratio + 0.5 * (m + 2) * (1.0 + std::log(ratio));
  return params.k2 * power + lead * std::exp(exponent);
}

BoundResult upper_thm1(const ProblemParams& params, double xi) {
  params.validate();
  check_xi(xi);
  const std::vector<double> grid = log_power_grid(params, 200);
  const Minimum1D best = multistart_minimize(
      [&](double log_p) { return upper_thm1_at_p(params, xi, std::exp(log_p)); }, grid, 3, 1e-9);
  return {best.value, std::exp(best.x), std::nullopt, std::nullopt, Branch::Thm1Tight};
}

LinearCosts linear_costs(const ProblemParams& params) {
  return {params.sigma0_sq / (params.sigma0_sq + 1.0), params.k2 * params.sigma0_sq};
}

BoundResult best_upper(const ProblemParams& params, double xi) {
  BoundResult best = upper_thm1(params, xi);
  const LinearCosts linear = linear_costs(params);
  if (linear.zero_input < best.value) best = {linear.zero_input, 0.0, std::nullopt, std::nullopt, Branch::ZeroInput};
  if (linear.zero_forcing < best.value) {
    best = {linear.zero_forcing, params.sigma0_sq, std::nullopt, std::nullopt, Branch::ZeroForcing};
  }
  return best;
}

double kappa(double power, double sigma0_sq) {
  const double s0 = std::sqrt(sigma0_sq);
  return sigma0_sq / (sigma0_sq + power + 2.0 * s0 * std::sqrt(power) + 1.0);
}

double lower_thm2_at_p(const ProblemParams& params, double power) {
  if (!(power >= 0.0)) throw std::invalid_argument("power must be nonnegative");
  const double gap = std::max(0.0, std::sqrt(kappa(power, params.sigma0_sq)) - std::sqrt(power));
  return params.k2 * power + gap * gap;
}

BoundResult lower_thm2(const ProblemParams& params) {
  params.validate();
  const Minimum1D best = minimize_over_power(params, [&](double p) { return lower_thm2_at_p(params, p); }, 200);
  return {best.value, best.x, 1.0, std::nullopt, Branch::Thm2};
}

double kappa2(int m, double power, double sigma0_sq, double sigma_g_sq, const specfn::TruncationConstants& tc) {
  const double s = std::sqrt(sigma0_sq) + std::sqrt(power);
  const double log_denominator = (2.0 / m) * tc.log_c + (1.0 - tc.d) + std::log(s * s + tc.d * sigma_g_sq);
  return sigma0_sq * sigma_g_sq * std::exp(-log_denominator);
}

double log_eta(int m, double power, double sigma0_sq, double sigma_g_sq, double L,
               const specfn::TruncationConstants& tc) {
  const double gap = std::sqrt(kappa2(m, power, sigma0_sq, sigma_g_sq, tc)) - std::sqrt(power);
  if (!(gap > 0.0)) return kNegInf;
  return 0.5 * m * std::log(sigma_g_sq) - tc.log_c - 0.5 * m * L * L * (sigma_g_sq - 1.0) + 2.0 * std::log(gap);
}

double lower_thm3_at(const ProblemParams& params, double power, double sigma_g_sq, double L) {
  if (!(power >= 0.0)) throw std::invalid_argument("power must be nonnegative");
  if (!(sigma_g_sq >= 1.0)) throw std::invalid_argument("sigma_G^2 must be >= 1");
  const auto tc = specfn::truncation_constants(params.m, L);
  const double v = log_eta(params.m, power, params.sigma0_sq, sigma_g_sq, L, tc);
  return params.k2 * power + (v < kLogUnderflow ? 0.0 : std::exp(v));
}

EtaMaximum maximize_eta(const ProblemParams& params, double power, const LowerBoundSearch& search) {
  params.validate();
  return EtaMaximizer(params, search)(power);
}

BoundResult lower_thm3(const ProblemParams& params, const LowerBoundSearch& search) {
  params.validate();
  const EtaMaximizer maximizer(params, search);
  const Minimum1D best = minimize_over_power(
      params, [&](double p) { return params.k2 * p + maximizer(p).eta; }, search.p_grid);
  const EtaMaximum at_best = maximizer(best.x);
  return {best.value, best.x, at_best.sigma_g_sq, at_best.L, Branch::Thm3};
}

double case_analysis_g(double b) {
  return 0.38 * b * b - 1.5 * (1.0 + std::log(b * b)) - 2.0 * std::log1p(b) - std::log(9.0);
}

double case_analysis_g_prime(double b) { return 0.76 * b - 3.0 / b - 2.0 / (1.0 + b); }

CaseAnalysisReport verify_case_analysis(int m, double xi, int n_samples, std::uint64_t seed,
                                        const LowerBoundSearch& search) {
  check_xi(xi);
  CaseAnalysisReport report;
  const double b0 = std::sqrt(34.0);
  report.g_at_sqrt34 = case_analysis_g(b0);
  report.g_prime_at_sqrt34 = case_analysis_g_prime(b0);
  report.min_g_on_grid = kInf;
  for (double b : linear_grid(b0, 100.0, 2001)) report.min_g_on_grid = std::min(report.min_g_on_grid, case_analysis_g(b));
  report.g_positive = report.min_g_on_grid > 0.0;

  report.mu = 100.0 * xi * xi;
  report.n_samples = n_samples;
  std::vector<double> ratios(static_cast<std::size_t>(std::max(0, n_samples)));
  std::vector<std::pair<double, double>> points(ratios.size());
  parallel_for(ratios.size(), [&](std::size_t i) {
    auto rng = sample_stream(seed, i);
    std::uniform_real_distribution<double> log_k(-2.5, 1.0), log_s(-1.0, 3.0);
    const double k = std::pow(10.0, log_k(rng));
    const double s0 = std::pow(10.0, log_s(rng));
    const auto params = ProblemParams::from_k_sigma0(m, k, s0);
    ratios[i] = best_upper(params, xi).value / lower_thm3(params, search).value;
    points[i] = {k, s0};
  });
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] > report.worst_ratio) {
      report.worst_ratio = ratios[i];
      report.worst_k = points[i].first;
      report.worst_sigma0 = points[i].second;
    }
  }
  report.ratio_within_mu = report.worst_ratio <= report.mu;
  report.passed = report.g_positive && report.ratio_within_mu;
  return report;
}

namespace detail {

double capacity_bound_bits(int m, double p_bar, double sigma_g_sq, const specfn::TruncationConstants& tc) {
  const double log_arg = (1.0 - tc.d) + std::log(p_bar + tc.d * sigma_g_sq) + (2.0 / m) * tc.log_c - std::log(sigma_g_sq);
  return 0.5 * log_arg / std::log(2.0);
}

double distortion_rate(double sigma0_sq, double rate_bits) { return sigma0_sq * std::exp2(-2.0 * rate_bits); }

}  // namespace detail

}  // namespace witsen
