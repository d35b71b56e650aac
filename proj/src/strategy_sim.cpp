#include "witsen/strategy_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "witsen/numerics.hpp"
#include "witsen/random.hpp"
#include "witsen/scalar_exact.hpp"

namespace witsen {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::int64_t kBlock = 4096;

// Running mean and sum of squared deviations; blocks are merged in index order.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    const double total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * n * o.n / total;
    n = total;
  }

  double stderr_of_mean() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

struct BlockResult {
  Moments j1, j2, total;
  double max_u1_sq = 0.0;
};

double slopey_point(double x, const SlopeyMap& map) {
  const double q = map.delta * std::floor(x / map.delta + 0.5);
  return q + map.alpha * (x - q);
}

double nearest_center(double y, double delta) { return delta * std::round(y / delta); }

}  // namespace

void StrategyConfig::validate(int m) const {
  if (m < 1) throw InvalidStrategy("dimension must be >= 1");
  const bool lattice = std::holds_alternative<LatticeQuantize>(gamma1);
  const bool slopey = std::holds_alternative<SlopeyMap>(gamma1);
  if (lattice && std::get<LatticeQuantize>(gamma1).lattice.m != m) {
    throw InvalidStrategy("lattice dimension does not match the problem dimension");
  }
  if (slopey) {
    const auto& s = std::get<SlopeyMap>(gamma1);
    if (m != 1) throw InvalidStrategy("slopey quantization is scalar only");
    if (!(s.delta > 0.0) || !(s.alpha >= 0.0 && s.alpha < 1.0)) {
      throw InvalidStrategy("slopey map needs delta > 0 and alpha in [0, 1)");
    }
  }
  if (std::holds_alternative<PackingSphere>(gamma2) && !lattice) {
    throw InvalidStrategy("packing-sphere decoding requires lattice quantization");
  }
  if ((std::holds_alternative<NearestLattice>(gamma2) || std::holds_alternative<ScaledMle>(gamma2)) && !lattice &&
      !slopey) {
    throw InvalidStrategy("nearest-lattice decoding requires a quantizing first stage");
  }
  if (const auto* c = std::get_if<ScaledMle>(&gamma2); c && !(c->scale > 0.0 && c->scale <= 1.0)) {
    throw InvalidStrategy("scaled-MLE factor must lie in (0, 1]");
  }
  if (std::holds_alternative<Mmse>(gamma2) && (lattice || slopey)) {
    if (m != 1) throw InvalidStrategy("MMSE decoding of a quantizer is scalar only");
    if (lattice && std::get<LatticeQuantize>(gamma1).lattice.kind != LatticeKind::IntegerGrid) {
      throw InvalidStrategy("MMSE decoding needs the integer grid");
    }
  }
}

std::vector<double> packing_sphere_decode(const LatticeSpec& lattice, std::span<const double> y2) {
  std::vector<double> nearest = quantize(lattice, y2);
  double d2 = 0.0;
  for (std::size_t i = 0; i < y2.size(); ++i) d2 += (y2[i] - nearest[i]) * (y2[i] - nearest[i]);
  if (d2 < lattice.packing_radius * lattice.packing_radius) return nearest;
  return {y2.begin(), y2.end()};
}

CostEstimate simulate(const ProblemParams& params, const StrategyConfig& strategy, std::int64_t n_samples,
                      std::uint64_t seed, const SimulationOptions& options) {
  params.validate();
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  strategy.validate(params.m);

  const auto m = static_cast<std::size_t>(params.m);
  const double sigma0 = params.sigma0();

  // Quantizer spacing seen by the scalar decoders.
  std::optional<ScalarStrategy> scalar;
  if (const auto* l = std::get_if<LatticeQuantize>(&strategy.gamma1); l && params.m == 1) {
    scalar = ScalarStrategy{l->lattice.scale, 0.0, sigma0};
  } else if (const auto* s = std::get_if<SlopeyMap>(&strategy.gamma1)) {
    scalar = ScalarStrategy{s->delta, s->alpha, sigma0};
  }
  std::optional<MmseEstimator> mmse;
  if (scalar && std::holds_alternative<Mmse>(strategy.gamma2)) mmse.emplace(*scalar);
  const double llse_gain = params.sigma0_sq / (params.sigma0_sq + 1.0);

  const auto n_blocks = static_cast<std::size_t>((n_samples + kBlock - 1) / kBlock);
  std::vector<BlockResult> blocks(n_blocks);

  parallel_for(
      n_blocks,
      [&](std::size_t b) {
        std::vector<double> x0(m), x1(m), y(m), xhat(m);
        BlockResult& out = blocks[b];
        const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
        const std::int64_t end = std::min(n_samples, begin + kBlock);
        for (std::int64_t i = begin; i < end; ++i) {
          auto rng = sample_stream(seed, static_cast<std::uint64_t>(i));
          std::normal_distribution<double> normal;
          for (auto& v : x0) v = sigma0 * normal(rng);
          for (std::size_t j = 0; j < m; ++j) {
            const double z = normal(rng);
            y[j] = options.zero_noise ? 0.0 : z;
          }

          std::visit(Overloaded{[&](const LatticeQuantize& q) { quantize(q.lattice, x0, x1); },
                                [&](const SlopeyMap& s) { x1[0] = slopey_point(x0[0], s); },
                                [&](const ZeroInput&) { x1 = x0; },
                                [&](const ZeroForcing&) { std::fill(x1.begin(), x1.end(), 0.0); }},
                     strategy.gamma1);
          for (std::size_t j = 0; j < m; ++j) y[j] += x1[j];

          std::visit(
              Overloaded{[&](const PackingSphere&) {
                           xhat = packing_sphere_decode(std::get<LatticeQuantize>(strategy.gamma1).lattice, y);
                         },
                         [&](const NearestLattice&) {
                           if (const auto* q = std::get_if<LatticeQuantize>(&strategy.gamma1)) {
                             quantize(q->lattice, y, xhat);
                           } else {
                             xhat[0] = nearest_center(y[0], scalar->delta);
                           }
                         },
                         [&](const ScaledMle& c) {
                           if (const auto* q = std::get_if<LatticeQuantize>(&strategy.gamma1)) {
                             quantize(q->lattice, y, xhat);
                           } else {
                             xhat[0] = nearest_center(y[0], scalar->delta);
                           }
                           for (auto& v : xhat) v *= c.scale;
                         },
                         [&](const Mmse&) {
                           if (mmse) {
                             xhat[0] = (*mmse)(y[0]);
                           } else if (std::holds_alternative<ZeroForcing>(strategy.gamma1)) {
                             std::fill(xhat.begin(), xhat.end(), 0.0);
                           } else {
                             for (std::size_t j = 0; j < m; ++j) xhat[j] = llse_gain * y[j];
                           }
                         },
                         [&](const Identity&) { xhat = y; }},
              strategy.gamma2);

          double u1_sq = 0.0;
          double err_sq = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            u1_sq += (x1[j] - x0[j]) * (x1[j] - x0[j]);
            err_sq += (x1[j] - xhat[j]) * (x1[j] - xhat[j]);
          }
          const double j1 = params.k2 * u1_sq / params.m;
          const double j2 = err_sq / params.m;
          out.j1.add(j1);
          out.j2.add(j2);
          out.total.add(j1 + j2);
          out.max_u1_sq = std::max(out.max_u1_sq, u1_sq);
        }
      },
      options.threads);

  BlockResult all;
  for (const auto& b : blocks) {
    all.j1.merge(b.j1);
    all.j2.merge(b.j2);
    all.total.merge(b.total);
    all.max_u1_sq = std::max(all.max_u1_sq, b.max_u1_sq);
  }
  CostEstimate est;
  est.j1_mean = all.j1.mean;
  est.j2_mean = all.j2.mean;
  est.total_mean = est.j1_mean + est.j2_mean;
  est.total_stderr = all.total.stderr_of_mean();
  est.j1_stderr = all.j1.stderr_of_mean();
  est.j2_stderr = all.j2.stderr_of_mean();
  est.n_samples = n_samples;
  est.seed = seed;
  est.max_u1_sq = all.max_u1_sq;
  return est;
}

BoundCheck simulate_vs_bound(const ProblemParams& params, const LatticeSpec& lattice, std::int64_t n_samples,
                             std::uint64_t seed, const SimulationOptions& options) {
  BoundCheck check;
  check.power = lattice.covering_radius * lattice.covering_radius / lattice.m;
  check.bound = upper_thm1_at_p(params, lattice.xi, check.power);
  check.estimate = simulate(params, {LatticeQuantize{lattice}, PackingSphere{}}, n_samples, seed, options);
  check.margin = check.bound - check.estimate.total_mean;
  check.passed = check.estimate.total_mean - 3.0 * check.estimate.total_stderr <= check.bound;
  return check;
}

}  // namespace witsen
