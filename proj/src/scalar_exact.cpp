#include "witsen/scalar_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "witsen/numerics.hpp"
#include "witsen/specfn.hpp"

namespace witsen {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
// Beyond 8 sigma0 the Gaussian mass is below 1e-15; 10 more covers the noise.
constexpr double kStateSpan = 8.0;
constexpr double kNoiseSpan = 10.0;

long bin_limit(const ScalarStrategy& s) {
  return static_cast<long>(std::ceil(kStateSpan * s.sigma0 / s.delta)) + 2;
}

double y_limit(const ScalarStrategy& s) { return kStateSpan * s.sigma0 + kNoiseSpan; }

struct BinPosterior {
  double log_weight = kNegInf;
  double mean = 0.0;
  double var = 0.0;
};

// Joint density of (bin i, Y2 = y) and the moments of X1 given both. Every
// bin's X1 is a truncated Gaussian, so the posterior is closed form.
class ScalarModel {
 public:
  explicit ScalarModel(const ScalarStrategy& s) : s_(s), n_(bin_limit(s)) {
    s.validate();
    if (s.alpha == 0.0) {
      log_mass_.resize(static_cast<std::size_t>(2 * n_ + 1));
      for (long i = -n_; i <= n_; ++i) {
        const double q = center(i);
        log_mass_[index(i)] =
            specfn::log_norm_interval((q - 0.5 * s.delta) / s.sigma0, (q + 0.5 * s.delta) / s.sigma0);
      }
    } else {
      slope_var_ = (s.alpha * s.sigma0) * (s.alpha * s.sigma0);
      post_var_ = slope_var_ / (slope_var_ + 1.0);
    }
    window_ = 0.5 * s.alpha * s.delta + kNoiseSpan;
  }

  long n() const { return n_; }
  double center(long i) const { return static_cast<double>(i) * s_.delta; }

  // Fills `out` with the bins that can have produced y. Returns the log of
  // the largest weight (the others are stored relative to it).
  double posterior(double y, std::vector<BinPosterior>& out) const {
    out.clear();
    long lo = std::max(-n_, static_cast<long>(std::floor((y - window_) / s_.delta)));
    long hi = std::min(n_, static_cast<long>(std::ceil((y + window_) / s_.delta)));
    if (lo > hi) {
      const long nearest = std::clamp(static_cast<long>(std::lround(y / s_.delta)), -n_, n_);
      lo = std::max(-n_, nearest - 1);
      hi = std::min(n_, nearest + 1);
    }
    double top = kNegInf;
    for (long i = lo; i <= hi; ++i) {
      const BinPosterior b = bin(i, y);
      if (b.log_weight == kNegInf) continue;
      top = std::max(top, b.log_weight);
      out.push_back(b);
    }
    if (top == kNegInf) return top;
    for (auto& b : out) b.log_weight -= top;
    return top;
  }

 private:
  std::size_t index(long i) const { return static_cast<std::size_t>(i + n_); }

  BinPosterior bin(long i, double y) const {
    const double q = center(i);
    if (s_.alpha == 0.0) return {log_mass_[index(i)] + specfn::log_norm_pdf(y - q), q, 0.0};

    const double half = 0.5 * s_.alpha * s_.delta;
    const double prior_mean = (1.0 - s_.alpha) * q;
    const double spread = slope_var_ + 1.0;
    const double m = (prior_mean + slope_var_ * y) / spread;
    const double sd = std::sqrt(post_var_);
    const double a = (q - half - m) / sd;
    const double b = (q + half - m) / sd;
    const double log_z = specfn::log_norm_interval(a, b);
    if (log_z == kNegInf) return {};

    BinPosterior out;
    out.log_weight = specfn::log_norm_pdf((y - prior_mean) / std::sqrt(spread)) - 0.5 * std::log(spread) + log_z;
    const double ra = std::exp(specfn::log_norm_pdf(a) - log_z);
    const double rb = std::exp(specfn::log_norm_pdf(b) - log_z);
    const double r = ra - rb;
    out.mean = std::clamp(m + sd * r, q - half, q + half);
    const double var = post_var_ * (1.0 + a * ra - b * rb - r * r);
    out.var = std::clamp(var, 0.0, half * half);
    return out;
  }

  ScalarStrategy s_;
  long n_;
  double window_ = kNoiseSpan;
  double slope_var_ = 0.0;
  double post_var_ = 0.0;
  std::vector<double> log_mass_;
};

double weighted_mean(const std::vector<BinPosterior>& bins) {
  double w = 0.0;
  double wm = 0.0;
  for (const auto& b : bins) {
    const double e = std::exp(b.log_weight);
    w += e;
    wm += e * b.mean;
  }
  return wm / w;
}

// E[(X1 - xhat)^2 ; Y2 in dy] / dy.
double loss_density(const std::vector<BinPosterior>& bins, double log_top, double estimate) {
  if (log_top == kNegInf) return 0.0;
  double acc = 0.0;
  for (const auto& b : bins) {
    const double d = b.mean - estimate;
    acc += std::exp(b.log_weight) * (b.var + d * d);
  }
  return std::exp(log_top) * acc;
}

}  // namespace

void ScalarStrategy::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw std::invalid_argument("sigma0 must be positive");
}

std::string_view to_string(DecoderKind kind) {
  switch (kind) {
    case DecoderKind::MMSE: return "mmse";
    case DecoderKind::MLE: return "mle";
    case DecoderKind::ScaledMLE: return "scaled-mle";
  }
  return "unknown";
}

ExactCost exact_first_stage_cost(const ScalarStrategy& s, double k2) {
  s.validate();
  const long n = bin_limit(s);
  const double h = 0.5 * s.delta / s.sigma0;
  double sum = 0.0;
  for (long i = -n; i <= n; ++i) {
    // integral of (t - c)^2 phi(t) over [c - h, c + h], in units of sigma0^2
    const double c = static_cast<double>(i) * s.delta / s.sigma0;
    const double a = c - h;
    const double b = c + h;
    const double mass = std::exp(specfn::log_norm_interval(a, b));
    const double pa = specfn::norm_pdf(a);
    const double pb = specfn::norm_pdf(b);
    sum += std::max(0.0, mass * (1.0 + c * c) - h * (pa + pb) - c * (pa - pb));
  }
  const double scale = k2 * (1.0 - s.alpha) * (1.0 - s.alpha);
  const double outside = 2.0 * specfn::norm_sf((static_cast<double>(n) + 0.5) * s.delta / s.sigma0);
  return {scale * s.sigma0 * s.sigma0 * sum, scale * 0.25 * s.delta * s.delta * outside};
}

struct MmseEstimator::Impl {
  ScalarModel model;
};

MmseEstimator::MmseEstimator(const ScalarStrategy& s) : impl_(std::make_unique<Impl>(Impl{ScalarModel(s)})) {}
MmseEstimator::~MmseEstimator() = default;
MmseEstimator::MmseEstimator(MmseEstimator&&) noexcept = default;
MmseEstimator& MmseEstimator::operator=(MmseEstimator&&) noexcept = default;

double MmseEstimator::operator()(double y2) const {
  thread_local std::vector<BinPosterior> bins;
  if (impl_->model.posterior(y2, bins) == kNegInf) return 0.0;
  return weighted_mean(bins);
}

double mmse_estimate(const ScalarStrategy& s, double y2) { return MmseEstimator(s)(y2); }

ExactCost exact_second_stage_cost(const ScalarStrategy& s, const Decoder& decoder) {
  if (decoder.kind == DecoderKind::ScaledMLE && !(decoder.scale > 0.0 && decoder.scale <= 1.0)) {
    throw std::invalid_argument("scaled-MLE factor must lie in (0, 1]");
  }
  const ScalarModel model(s);
  const double y_max = y_limit(s);
  const long n = model.n();
  const bool mmse = decoder.kind == DecoderKind::MMSE;
  const double c = decoder.kind == DecoderKind::ScaledMLE ? decoder.scale : 1.0;

  std::vector<BinPosterior> bins;
  const auto integrand = [&](double y) {
    const double top = model.posterior(y, bins);
    if (top == kNegInf) return 0.0;
    const double estimate = mmse ? weighted_mean(bins) : c * s.delta * std::round(y / s.delta);
    return loss_density(bins, top, estimate);
  };

  // Panels follow the decision cells so nearest-center jumps sit on panel
  // edges. The MMSE integrand is smooth, so narrow cells are grouped.
  const long group = mmse ? std::max(1L, static_cast<long>(std::ceil(4.0 / s.delta))) : 1L;
  std::vector<double> edges;
  const double first = std::max(-y_max, (-static_cast<double>(n) - 0.5) * s.delta);
  edges.push_back(-y_max);
  if (first > -y_max) edges.push_back(first);
  for (long j = -n; j <= n; j += group) {
    const double right = (static_cast<double>(std::min(j + group - 1, n)) + 0.5) * s.delta;
    if (right >= y_max) break;
    if (right > edges.back()) edges.push_back(right);
  }
  if (edges.back() < y_max) edges.push_back(y_max);

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    double panel_error = 0.0;
    total += Quadrature::integrate(integrand, edges[i], edges[i + 1], 15, 1e-11, &panel_error);
    error += panel_error;
  }
  // mass of Y2 outside the window, times a generous squared-error scale
  const double outside = 2.0 * specfn::norm_sf(kStateSpan) + 2.0 * specfn::norm_sf(kNoiseSpan);
  error += outside * 4.0 * y_max * y_max;
  return {std::max(0.0, total), error};
}

double mle_second_stage_cost_series(double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  double sum = 0.0;
  for (long l = 1;; ++l) {
    const double lo = (static_cast<double>(l) - 0.5) * delta;
    if (lo > 40.0) break;
    const double p = specfn::norm_sf(lo) - specfn::norm_sf(lo + delta);
    const double d = static_cast<double>(l) * delta;
    sum += 2.0 * p * d * d;
  }
  return sum;
}

ScalarOptimum evaluate_scalar(const ProblemParams& params, const ScalarStrategy& s, const Decoder& decoder) {
  const ExactCost j1 = exact_first_stage_cost(s, params.k2);
  const ExactCost j2 = exact_second_stage_cost(s, decoder);
  return {s, j1.value, j2.value, j1.value + j2.value, j1.error_bound + j2.error_bound};
}

ScalarOptimum optimize_scalar(const ProblemParams& params, ScalarFamily family, const Decoder& decoder,
                              const ScalarSearch& search) {
  params.validate();
  if (params.m != 1) throw std::invalid_argument("scalar evaluation requires m = 1");
  const double s0 = params.sigma0();
  // The floor is capped at twice the noise scale so that narrow-bin optima
  // at large sigma0 stay inside the search box.
  const double log_lo = std::log(std::min(s0 / 50.0, 2.0));
  const double log_hi = std::log(20.0 * s0);

  const bool series = search.mle_series && decoder.kind == DecoderKind::MLE;
  const auto evaluate = [&](const ScalarStrategy& s) {
    if (!series || s.alpha != 0.0) return evaluate_scalar(params, s, decoder);
    const ExactCost j1 = exact_first_stage_cost(s, params.k2);
    const double j2 = mle_second_stage_cost_series(s.delta);
    return ScalarOptimum{s, j1.value, j2, j1.value + j2, j1.error_bound};
  };
  const auto total = [&](double log_delta, double alpha) {
    return evaluate({std::exp(log_delta), alpha, s0}).total;
  };

  const std::vector<double> grid = linear_grid(log_lo, log_hi, search.delta_grid);
  const Minimum1D pure = multistart_minimize([&](double x) { return total(x, 0.0); }, grid, 3, 1e-9);
  ScalarOptimum best = evaluate({std::exp(pure.x), 0.0, s0});
  if (family == ScalarFamily::PureQuant) return best;

  // Slopey: coarse (log delta, alpha) grid, then simplex refinement from the
  // best few cells and from the pure-quantization optimum.
  const std::vector<double> alphas = linear_grid(0.0, search.alpha_max, search.alpha_grid);
  struct Start {
    double value;
    double x;
    double a;
  };
  std::vector<Start> starts;
  for (double x : grid) {
    for (double a : alphas) starts.push_back({total(x, a), x, a});
  }
  std::sort(starts.begin(), starts.end(), [](const Start& l, const Start& r) { return l.value < r.value; });
  starts.resize(std::min<std::size_t>(3, starts.size()));
  starts.push_back({best.total, pure.x, 0.02});

  const auto objective = [&](std::span<const double> v) {
    if (v[1] < 0.0 || v[1] > search.alpha_max || v[0] < log_lo - 1.0 || v[0] > log_hi + 1.0) return kInf;
    return total(v[0], v[1]);
  };
  NelderMeadOptions options;
  options.initial_step = 0.05;
  options.x_tol = 1e-8;
  options.f_tol = 1e-14;
  options.max_evaluations = 600;
  for (const Start& st : starts) {
    const MinimumND found = nelder_mead(objective, {st.x, st.a}, options);
    if (found.value < best.total) best = evaluate({std::exp(found.x[0]), found.x[1], s0});
  }
  return best;
}

ScaleFactorOptimum optimize_mle_scale(const ScalarStrategy& s) {
  const auto cost = [&](double c) { return exact_second_stage_cost(s, Decoder::scaled_mle(c)).value; };
  const Minimum1D found = golden_section(cost, 1e-3, 1.0, 1e-9, 1e-12);
  const double at_one = cost(1.0);
  if (at_one <= found.value) return {1.0, at_one};
  return {found.x, found.value};
}

}  // namespace witsen
