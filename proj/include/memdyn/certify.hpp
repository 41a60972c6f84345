#pragma once

// Closed-form stability and dissipativity certificates for
//
//     d/dt ( x(t) - B x(t - tau) ) = g( x(t), x(t - tau) )
//
// under the one-sided bound <u - Bv, g(u,v)> <= gamma - alpha|u|^2 + beta|v|^2.

#include "memdyn/core.hpp"
#include "memdyn/ndde.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace memdyn {

/// Largest eigenvalue modulus.
double spectral_radius(const Mat& B);

/// Operator 2-norm (largest singular value).
double operator_norm(const Mat& B);

/// sup Re(lambda) over det(I - B e^{-lambda tau}) = 0, i.e. ln(rho(B))/tau.
/// -inf when rho(B) = 0.
double rightmost_exponent(const Mat& B, double tau);

struct StabilityReport {
  double rho;
  double r_a0;
  bool schur_cohn_stable;
};

StabilityReport stability_report(const Mat& B, double tau);

struct Check {
  std::string name;
  bool passed;
  std::string detail;
};

struct DissipativityCertificate {
  double alpha = 0;
  double beta = 0;
  double gamma = 0;
  double b_norm = 0;
  double tau = 0;
  double frak_c = 0;   // contraction constant per delay interval
  double frak_c0 = 0;  // first-interval growth constant
  double r = 0;        // first-interval radius
  std::optional<double> r_abs;     // absorbing radius, only when frak_c < 1
  std::optional<double> tau_star;  // critical delay when the large-delay lemma applies
  bool satisfied = false;
  std::vector<Check> checks;
};

/// P(x) = -[(x - 1)^2 + 2(beta/alpha - 1)].  frak_c < 1 iff
/// P(b) e^{-alpha tau} < P(b + 2) inside the large-delay range of b.
double dissipation_polynomial(double x, double beta_over_alpha);

DissipativityCertificate contraction_constants(double alpha, double beta, double gamma,
                                               double b_norm, double tau);

/// max(tau*, 0) with tau* = -(1/alpha) log(P(b+2)/P(b)).  Requires
/// 2 beta < alpha and 0 <= b < sqrt(2(1 - beta/alpha)) - 1.
double critical_delay(double alpha, double beta, double b_norm);

/// frak_c^k frak_c0 |phi| + r sum_{j<=k} frak_c^j: bound on |x(t)| for
/// t in (k tau, (k+1) tau].
double induction_bound(const DissipativityCertificate& cert, double phi_norm, int k);

/// Smallest k tau with frak_c^k frak_c0 |phi| <= r frak_c/(1 - frak_c).
/// Requires a satisfied certificate.
double absorption_time(const DissipativityCertificate& cert, double phi_norm);

struct FalsifyReport {
  double max_defect;
  std::optional<std::pair<Vec, Vec>> witness;  // set when max_defect > 0
  double fitted_gamma;  // smallest gamma consistent with the evaluated points
  std::size_t evaluated;
};

/// Evaluates <u - Bv, g(u,v)> - (gamma - alpha|u|^2 + beta|v|^2) on seeded
/// uniform samples of u, v in the radius-R ball plus an axis/corner grid.
/// A positive maximum falsifies the bound; a nonpositive one is evidence only.
FalsifyReport falsify_dissipation(const DelayRhs& g, const Mat& B, double alpha,
                                  double beta, double gamma, double radius,
                                  std::size_t samples, std::uint64_t seed);

struct BmValidation {
  double alpha_eps = 0;
  double beta_eps = 0;
  double k = 0;        // max(q, m) = |B|
  double k_bound = 0;  // -1 + sqrt(2(1 - beta_eps/alpha_eps)), NaN if undefined
  std::optional<double> tau_star;
  bool pass = false;
  std::vector<Check> checks;
};

/// Checks the hypotheses of the large-delay attractor result for the
/// Brayton-Miranker preset with dissipation rate alpha_prime and slack
/// epsilon, and returns tau* on success.
BmValidation validate_bm(const BraytonMirankerParams& p, double alpha_prime, double epsilon);

/// gamma such that <u - Bv, g(u,v)> <= gamma - alpha|u|^2 + beta|v|^2 holds for
/// the Brayton-Miranker g on |u_1|, |u_2| <= R and every v, obtained from
/// Young-inequality bookkeeping.  Requires beta > max(b q^2, c m^2)/2.
double bm_gamma_bound(const BraytonMirankerParams& p, double alpha, double beta,
                      double radius);

}  // namespace memdyn
