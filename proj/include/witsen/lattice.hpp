#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace witsen {

enum class LatticeKind { IntegerGrid, HexagonalA2 };

std::string_view to_string(LatticeKind kind);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometry of a scaled lattice. Immutable once built by make_lattice.
///
/// IntegerGrid is scale * Z^m. HexagonalA2 (m = 2 only) is generated by
/// scale * (1, 0) and scale * (1/2, sqrt(3)/2), so its minimum distance is
/// `scale`.
struct LatticeSpec {
  LatticeKind kind = LatticeKind::IntegerGrid;
  int m = 1;
  double scale = 1.0;
  double packing_radius = 0.5;
  double covering_radius = 0.5;
  double xi = 1.0;  // covering_radius / packing_radius
};

LatticeSpec make_lattice(LatticeKind kind, int m, double scale);

/// Lattice whose covering radius satisfies r_c^2 = m * power, i.e. the lattice
/// that spends at most `power` per dimension on the first-stage input.
LatticeSpec lattice_for_power(LatticeKind kind, int m, double power);

/// Lattice with the given packing radius.
LatticeSpec lattice_with_packing_radius(LatticeKind kind, int m, double r_p);

/// Nearest lattice point to x, written to out. Exact ties go to the
/// lexicographically smallest candidate.
void quantize(const LatticeSpec& lattice, std::span<const double> x, std::span<double> out);
std::vector<double> quantize(const LatticeSpec& lattice, std::span<const double> x);

/// Squared distance from x to the second-nearest lattice point.
double second_nearest_distance_sq(const LatticeSpec& lattice, std::span<const double> x);

/// A point at maximal distance (a deep hole) from the lattice; for the
/// hexagonal lattice this is the centroid of a Delaunay triangle.
std::vector<double> deep_hole(const LatticeSpec& lattice);

struct RadiiReport {
  std::int64_t n_probes = 0;
  double max_distance = 0.0;       // lower estimate of the covering radius
  double min_second_distance = 0.0;  // never below the packing radius
  std::int64_t covering_violations = 0;
  std::int64_t packing_violations = 0;
  bool passed = false;
};

/// Empirically certifies r_p and r_c with uniform probes over a fundamental cell.
RadiiReport verify_radii(const LatticeSpec& lattice, std::int64_t n_probes, std::uint64_t seed);

}  // namespace witsen
