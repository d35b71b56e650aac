#include "witsen/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "witsen/numerics.hpp"

namespace witsen {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void check_axis(const AxisRange& a, const char* name) {
  if (a.n_points < 2) throw std::invalid_argument(std::string(name) + " axis needs at least 2 points");
  if (!(a.log10_lo < a.log10_hi)) throw std::invalid_argument(std::string(name) + " axis needs lo < hi");
}

}  // namespace

std::vector<double> AxisRange::values() const {
  std::vector<double> v = linear_grid(log10_lo, log10_hi, n_points);
  for (double& x : v) x = std::pow(10.0, x);
  return v;
}

double SweepGrid::resolved_xi() const { return xi ? *xi : make_lattice(lattice, m, 1.0).xi; }

void SweepGrid::validate() const {
  check_axis(k, "k");
  check_axis(sigma0, "sigma0");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  const double x = resolved_xi();
  if (!(x >= 1.0)) throw std::invalid_argument("xi must be >= 1");
}

SweepRecord evaluate_point(const ProblemParams& params, double xi, const SweepOptions& options) {
  SweepRecord rec;
  rec.k = params.k();
  rec.sigma0 = params.sigma0();
  try {
    if (options.mode == SweepMode::AnalyticRatio) {
      rec.upper = best_upper(params, xi);
    } else {
      if (params.m != 1) throw std::invalid_argument("exact scalar ratio requires m = 1");
      const ScalarOptimum opt = optimize_scalar(params, ScalarFamily::PureQuant, options.decoder);
      rec.upper = {opt.total, 0.25 * opt.strategy.delta * opt.strategy.delta, std::nullopt, std::nullopt,
                   Branch::ExactScalar};
      const LinearCosts linear = linear_costs(params);
      if (linear.zero_input < rec.upper.value) {
        rec.upper = {linear.zero_input, 0.0, std::nullopt, std::nullopt, Branch::ZeroInput};
      }
      if (linear.zero_forcing < rec.upper.value) {
        rec.upper = {linear.zero_forcing, params.sigma0_sq, std::nullopt, std::nullopt, Branch::ZeroForcing};
      }
    }
    rec.lower = lower_thm3(params, options.search);
    rec.ratio = rec.upper.value / rec.lower.value;
    if (!std::isfinite(rec.ratio)) {
      rec.status = "error: non-finite ratio";
    } else if (rec.ratio < 1.0 - 1e-9) {
      rec.status = "ratio<1";
    }
  } catch (const std::exception& e) {
    rec.status = std::string("error: ") + e.what();
    std::replace(rec.status.begin(), rec.status.end(), ',', ';');
  }
  return rec;
}

SweepResult run_sweep(const SweepGrid& grid, const SweepOptions& options) {
  grid.validate();
  if (options.mode == SweepMode::ExactScalarRatio && grid.m != 1) {
    throw std::invalid_argument("exact scalar ratio requires m = 1");
  }
  SweepResult result;
  result.m = grid.m;
  result.xi = grid.resolved_xi();
  const std::vector<double> ks = grid.k.values();
  const std::vector<double> sigmas = grid.sigma0.values();
  result.records.resize(ks.size() * sigmas.size());
  parallel_for(
      result.records.size(),
      [&](std::size_t idx) {
        const double k = ks[idx % ks.size()];
        const double s0 = sigmas[idx / ks.size()];
        result.records[idx] = evaluate_point(ProblemParams::from_k_sigma0(grid.m, k, s0), result.xi, options);
      },
      options.threads);

  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (r.status != "ok") ++result.n_flagged;
    if (r.status.rfind("error", 0) == 0) continue;
    if (r.ratio > result.max_ratio) {
      result.max_ratio = r.ratio;
      result.argmax = i;
    }
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : result.records) {
    out << result.m << ',' << fmt(r.k) << ',' << fmt(r.sigma0) << ',' << fmt(r.upper.value) << ','
        << to_string(r.upper.branch) << ',' << fmt(r.upper.p_star) << ',' << fmt(r.lower.value) << ','
        << fmt(r.lower.p_star) << ',' << fmt(r.lower.sigma_g_sq) << ',' << fmt(r.lower.truncation_L) << ','
        << fmt(r.ratio) << ',' << r.status << '\n';
  }
  if (result.records.empty()) return;
  const auto& best = result.records[result.argmax];
  out << result.m << ',' << fmt(best.k) << ',' << fmt(best.sigma0) << ",,,,,,,," << fmt(result.max_ratio)
      << ",max_ratio\n";
}

}  // namespace witsen
