#include "witsen/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "witsen/random.hpp"

namespace witsen {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void check_dims(const LatticeSpec& lattice, std::size_t n) {
  if (n != static_cast<std::size_t>(lattice.m)) {
    throw DimensionMismatch("lattice of dimension " + std::to_string(lattice.m) +
                            " given a point of dimension " + std::to_string(n));
  }
}

// Nearest multiple of `step` to t; an exact midpoint goes to the smaller one.
double round_to(double t, double step) {
  const double u = t / step;
  const double f = std::floor(u);
  return (u - f > 0.5 ? f + 1.0 : f) * step;
}

using Point2 = std::array<double, 2>;

double dist_sq(const Point2& a, double x, double y) {
  const double dx = a[0] - x;
  const double dy = a[1] - y;
  return dx * dx + dy * dy;
}

// A2 = R u (R + v) with R = s*(Z x sqrt(3) Z), v = s*(1/2, sqrt(3)/2).
// Both floor and ceil are kept per axis so that exact ties are visible.
std::array<Point2, 8> hex_candidates(double scale, double x, double y) {
  const double sx = scale;
  const double sy = scale * kSqrt3;
  std::array<Point2, 8> out{};
  std::size_t k = 0;
  for (int coset = 0; coset < 2; ++coset) {
    const double ox = coset == 0 ? 0.0 : 0.5 * sx;
    const double oy = coset == 0 ? 0.0 : 0.5 * sy;
    const double fx = std::floor((x - ox) / sx);
    const double fy = std::floor((y - oy) / sy);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        out[k++] = {ox + (fx + i) * sx, oy + (fy + j) * sy};
      }
    }
  }
  return out;
}

Point2 hex_nearest(double scale, double x, double y) {
  const auto candidates = hex_candidates(scale, x, y);
  Point2 best = candidates[0];
  double best_d = dist_sq(best, x, y);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double d = dist_sq(candidates[i], x, y);
    if (d < best_d || (d == best_d && candidates[i] < best)) {
      best = candidates[i];
      best_d = d;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::IntegerGrid:
      return "grid";
    case LatticeKind::HexagonalA2:
      return "hex";
  }
  return "unknown";
}

LatticeSpec make_lattice(LatticeKind kind, int m, double scale) {
  if (m < 1) throw std::invalid_argument("lattice dimension must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("lattice scale must be positive");
  LatticeSpec spec;
  spec.kind = kind;
  spec.m = m;
  spec.scale = scale;
  switch (kind) {
    case LatticeKind::IntegerGrid:
      spec.packing_radius = 0.5 * scale;
      spec.covering_radius = 0.5 * scale * std::sqrt(static_cast<double>(m));
      spec.xi = std::sqrt(static_cast<double>(m));
      break;
    case LatticeKind::HexagonalA2:
      if (m != 2) {
        throw std::invalid_argument("hexagonal lattice exists only in dimension 2, got " + std::to_string(m));
      }
      spec.packing_radius = 0.5 * scale;
      spec.covering_radius = scale / kSqrt3;
      spec.xi = 2.0 / kSqrt3;
      break;
  }
  return spec;
}

LatticeSpec lattice_for_power(LatticeKind kind, int m, double power) {
  if (!(power > 0.0)) throw std::invalid_argument("lattice power must be positive");
  const LatticeSpec unit = make_lattice(kind, m, 1.0);
  const double r_c = std::sqrt(m * power);
  return make_lattice(kind, m, r_c / unit.covering_radius);
}

LatticeSpec lattice_with_packing_radius(LatticeKind kind, int m, double r_p) {
  if (!(r_p > 0.0)) throw std::invalid_argument("packing radius must be positive");
  return make_lattice(kind, m, 2.0 * r_p);
}

void quantize(const LatticeSpec& lattice, std::span<const double> x, std::span<double> out) {
  check_dims(lattice, x.size());
  check_dims(lattice, out.size());
  if (lattice.kind == LatticeKind::IntegerGrid) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = round_to(x[i], lattice.scale);
    return;
  }
  const Point2 p = hex_nearest(lattice.scale, x[0], x[1]);
  out[0] = p[0];
  out[1] = p[1];
}

std::vector<double> quantize(const LatticeSpec& lattice, std::span<const double> x) {
  std::vector<double> out(x.size());
  quantize(lattice, x, out);
  return out;
}

double second_nearest_distance_sq(const LatticeSpec& lattice, std::span<const double> x) {
  check_dims(lattice, x.size());
  if (lattice.kind == LatticeKind::IntegerGrid) {
    // The runner-up differs from the nearest point in exactly one coordinate.
    double nearest_sq = 0.0;
    double best_increase = std::numeric_limits<double>::infinity();
    for (double xi : x) {
      const double e = std::fabs(xi - round_to(xi, lattice.scale));
      nearest_sq += e * e;
      const double other = lattice.scale - e;
      best_increase = std::min(best_increase, other * other - e * e);
    }
    return nearest_sq + best_increase;
  }
  // Hexagonal: the nearest point and its six neighbours contain the runner-up.
  const Point2 p = hex_nearest(lattice.scale, x[0], x[1]);
  const double s = lattice.scale;
  const std::array<Point2, 6> offsets{{{s, 0.0},
                                       {-s, 0.0},
                                       {0.5 * s, 0.5 * s * kSqrt3},
                                       {-0.5 * s, 0.5 * s * kSqrt3},
                                       {0.5 * s, -0.5 * s * kSqrt3},
                                       {-0.5 * s, -0.5 * s * kSqrt3}}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : offsets) best = std::min(best, dist_sq({p[0] + o[0], p[1] + o[1]}, x[0], x[1]));
  return best;
}

std::vector<double> deep_hole(const LatticeSpec& lattice) {
  if (lattice.kind == LatticeKind::IntegerGrid) {
    return std::vector<double>(static_cast<std::size_t>(lattice.m), 0.5 * lattice.scale);
  }
  // centroid of the triangle (0,0), (s,0), (s/2, s sqrt(3)/2)
  return {0.5 * lattice.scale, lattice.scale / (2.0 * kSqrt3)};
}

RadiiReport verify_radii(const LatticeSpec& lattice, std::int64_t n_probes, std::uint64_t seed) {
  if (n_probes < 1) throw std::invalid_argument("verify_radii: need at least one probe");
  constexpr double kSlack = 1e-9;
  RadiiReport report;
  report.n_probes = n_probes;
  report.min_second_distance = std::numeric_limits<double>::infinity();

  const auto m = static_cast<std::size_t>(lattice.m);
  std::vector<double> probe(m), nearest(m);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::int64_t i = 0; i < n_probes; ++i) {
    auto rng = sample_stream(seed, static_cast<std::uint64_t>(i));
    if (lattice.kind == LatticeKind::IntegerGrid) {
      for (double& c : probe) c = lattice.scale * unit(rng);
    } else {
      // fundamental parallelogram of the generator basis
      const double u = unit(rng);
      const double v = unit(rng);
      probe[0] = lattice.scale * (u + 0.5 * v);
      probe[1] = lattice.scale * (0.5 * kSqrt3 * v);
    }
    quantize(lattice, probe, nearest);
    double d2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) d2 += (probe[j] - nearest[j]) * (probe[j] - nearest[j]);
    const double d = std::sqrt(d2);
    report.max_distance = std::max(report.max_distance, d);
    if (d > lattice.covering_radius + kSlack) ++report.covering_violations;

    const double second = std::sqrt(second_nearest_distance_sq(lattice, probe));
    report.min_second_distance = std::min(report.min_second_distance, second);
    if (d < lattice.packing_radius - kSlack && second < lattice.packing_radius - kSlack) ++report.packing_violations;
  }
  report.passed = report.covering_violations == 0 && report.packing_violations == 0;
  return report;
}

}  // namespace witsen
