#pragma once

#include <stdexcept>

namespace witsen::specfn {

/// Thrown when Pr(||Z||^2 <= m L^2) is too small to invert.
class DegenerateTruncation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Regularized incomplete gamma functions. Series below x = a + 1, Lentz
// continued fraction above.
double log_gamma_p(double a, double x);
double log_gamma_q(double a, double x);
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Pr(||Z|| >= r) for Z ~ N(0, I_m), i.e. Q(m/2, r^2/2).
double psi(int m, double r);
double log_psi(int m, double r);

/// Pr(||Z|| < r) = 1 - psi(m, r), computed without cancellation.
double chi_cdf(int m, double r);
double log_chi_cdf(int m, double r);

/// Chernoff (MGF) upper bound on psi(m, r_p); requires r_p^2 > m.
double psi_chernoff(int m, double r_p);
double log_psi_chernoff(int m, double r_p);

/// Constants of the truncated test-noise argument at truncation level L:
/// c = 1 / Pr(||Z_m||^2 <= m L^2), d = Pr(||Z_{m+2}||^2 <= m L^2) * c.
struct TruncationConstants {
  double log_c = 0.0;
  double d = 1.0;
};

/// Throws DegenerateTruncation when 1 - psi(m, L sqrt(m)) < 1e-300.
TruncationConstants truncation_constants(int m, double L);

double c_m(int m, double L);
double log_c_m(int m, double L);
double d_m(int m, double L);

// Standard normal helpers used by the scalar cost evaluation.
double norm_pdf(double x);
double log_norm_pdf(double x);
/// Pr(N(0,1) >= x) and its log; the log stays finite far into the tail.
double norm_sf(double x);
double log_norm_sf(double x);
/// log(Phi(b) - Phi(a)) for a <= b, without cancellation in either tail.
double log_norm_interval(double a, double b);

}  // namespace witsen::specfn
