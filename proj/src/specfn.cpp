#include "witsen/specfn.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace witsen::specfn {

namespace {

constexpr double kEps = 1e-17;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// log(1e-300)
const double kLogDegenerate = std::log(1e-300);

double log_prefactor(double a, double x) {
  return -x + a * std::log(x) - std::lgamma(a);
}

// log P(a, x) by the power series; converges for all x but is used for x < a + 1.
double log_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return std::log(sum) + log_prefactor(a, x);
}

// log Q(a, x) by the modified Lentz continued fraction; used for x >= a + 1.
double log_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::log(h) + log_prefactor(a, x);
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::domain_error("incomplete gamma: shape must be positive, got " + std::to_string(a));
  }
  if (!(x >= 0.0)) {
    throw std::domain_error("incomplete gamma: argument must be nonnegative, got " + std::to_string(x));
  }
}

void check_chi_args(int m, double r) {
  if (m < 1) throw std::domain_error("chi tail: m must be >= 1, got " + std::to_string(m));
  if (!(r >= 0.0)) throw std::domain_error("chi tail: radius must be >= 0, got " + std::to_string(r));
}

}  // namespace

double log_gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return kNegInf;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return log_p_series(a, x);
  return std::log1p(-std::exp(log_q_fraction(a, x)));
}

double log_gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return kNegInf;
  if (x < a + 1.0) return std::log1p(-std::exp(log_p_series(a, x)));
  return log_q_fraction(a, x);
}

double gamma_p(double a, double x) { return std::exp(log_gamma_p(a, x)); }
double gamma_q(double a, double x) { return std::exp(log_gamma_q(a, x)); }

double log_psi(int m, double r) {
  check_chi_args(m, r);
  return log_gamma_q(0.5 * m, 0.5 * r * r);
}

double psi(int m, double r) { return std::exp(log_psi(m, r)); }

double log_chi_cdf(int m, double r) {
  check_chi_args(m, r);
  return log_gamma_p(0.5 * m, 0.5 * r * r);
}

double chi_cdf(int m, double r) { return std::exp(log_chi_cdf(m, r)); }

double log_psi_chernoff(int m, double r_p) {
  if (m < 1) throw std::domain_error("psi_chernoff: m must be >= 1");
  const double r2 = r_p * r_p;
  if (!(r2 > m)) {
    throw std::domain_error("psi_chernoff: requires r_p^2 > m (r_p = " + std::to_string(r_p) + ")");
  }
  return -0.5 * r2 + 0.5 * m + 0.5 * m * std::log(r2 / m);
}

double psi_chernoff(int m, double r_p) { return std::exp(log_psi_chernoff(m, r_p)); }

TruncationConstants truncation_constants(int m, double L) {
  if (m < 1) throw std::domain_error("truncation constants: m must be >= 1");
  if (!(L > 0.0)) throw std::domain_error("truncation constants: L must be positive");
  const double x = 0.5 * m * L * L;
  const double log_inside = log_gamma_p(0.5 * m, x);
  if (!(log_inside >= kLogDegenerate)) {
    throw DegenerateTruncation("truncation level L = " + std::to_string(L) +
                               " leaves no probability mass in dimension " + std::to_string(m));
  }
  const double log_inside_2 = log_gamma_p(0.5 * m + 1.0, x);
  return {-log_inside, std::exp(log_inside_2 - log_inside)};
}

double log_c_m(int m, double L) { return truncation_constants(m, L).log_c; }
double c_m(int m, double L) { return std::exp(log_c_m(m, L)); }
double d_m(int m, double L) { return truncation_constants(m, L).d; }

double norm_pdf(double x) { return std::exp(log_norm_pdf(x)); }

double log_norm_pdf(double x) {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return -0.5 * x * x - kHalfLog2Pi;
}

double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double log_norm_sf(double x) {
  if (x < -1.0) return std::log1p(-0.5 * std::erfc(-x / std::sqrt(2.0)));
  if (x < 37.0) return std::log(norm_sf(x));
  // Mills-ratio asymptotic series; the first omitted term is below 1e-13 here.
  const double t = 1.0 / (x * x);
  const double series = 1.0 - t * (1.0 - 3.0 * t * (1.0 - 5.0 * t * (1.0 - 7.0 * t * (1.0 - 9.0 * t))));
  return log_norm_pdf(x) - std::log(x) + std::log(series);
}

double log_norm_interval(double a, double b) {
  if (!(a <= b)) throw std::domain_error("log_norm_interval: need a <= b");
  if (a == b) return -std::numeric_limits<double>::infinity();
  if (a >= 0.0) {
    const double la = log_norm_sf(a);
    return la + std::log(-std::expm1(log_norm_sf(b) - la));
  }
  if (b <= 0.0) return log_norm_interval(-b, -a);
  return std::log1p(-(norm_sf(b) + norm_sf(-a)));
}

}  // namespace witsen::specfn
