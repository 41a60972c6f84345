#include "memdyn/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace memdyn {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

double spectral_radius(const Mat& B) {
  if (B.rows() != B.cols()) throw ValidationError("spectral_radius: B must be square");
  if (!B.allFinite()) throw ValidationError("spectral_radius: non-finite entries");
  if (B.rows() == 1) return std::abs(B(0, 0));
  Eigen::EigenSolver<Mat> es(B, false);
  if (es.info() != Eigen::Success) throw Error("spectral_radius: eigen-solve failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Mat& B) {
  if (!B.allFinite()) throw ValidationError("operator_norm: non-finite entries");
  if (B.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(B);
  return svd.singularValues()(0);
}

double rightmost_exponent(const Mat& B, double tau) {
  if (!(tau > 0.0)) throw ValidationError("rightmost_exponent: tau must be positive");
  const double rho = spectral_radius(B);
  if (rho == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rho) / tau;
}

StabilityReport stability_report(const Mat& B, double tau) {
  const double rho = spectral_radius(B);
  return {rho, rightmost_exponent(B, tau), rho < 1.0};
}

double dissipation_polynomial(double x, double beta_over_alpha) {
  return -((x - 1.0) * (x - 1.0) + 2.0 * (beta_over_alpha - 1.0));
}

DissipativityCertificate contraction_constants(double alpha, double beta, double gamma,
                                               double b_norm, double tau) {
  if (!(alpha > 0.0)) throw ValidationError("contraction_constants: alpha must be positive");
  if (!(gamma >= 0.0)) throw ValidationError("contraction_constants: gamma must be nonnegative");
  if (!(b_norm >= 0.0)) throw ValidationError("contraction_constants: |B| must be nonnegative");
  if (!(tau > 0.0)) throw ValidationError("contraction_constants: tau must be positive");
  if (!std::isfinite(beta)) throw ValidationError("contraction_constants: beta must be finite");

  DissipativityCertificate c;
  c.alpha = alpha;
  c.beta = beta;
  c.gamma = gamma;
  c.b_norm = b_norm;
  c.tau = tau;
  const double decay = std::exp(-alpha * tau);
  const double one_minus = -std::expm1(-alpha * tau);
  const double coupling = 2.0 * (beta + alpha * b_norm * b_norm) * one_minus / alpha;
  const double inner = (1.0 + b_norm) * (1.0 + b_norm) * decay + coupling;
  const double inner0 = (1.0 + b_norm) * (1.0 + b_norm) + coupling;
  c.frak_c = b_norm + std::sqrt(std::max(inner, 0.0));
  c.frak_c0 = std::sqrt(std::max(inner0, 0.0)) + b_norm;
  c.r = std::sqrt(2.0 * gamma * one_minus / alpha);
  c.satisfied = inner >= 0.0 && c.frak_c < 1.0;
  if (c.satisfied) c.r_abs = 2.0 * c.r / std::sqrt(1.0 - c.frak_c);

  c.checks.push_back({"contraction", c.satisfied,
                      "frak_c = " + fmt(c.frak_c) + (c.satisfied ? " < 1" : " >= 1")});
  c.checks.push_back({"coupling_nonnegative", inner >= 0.0,
                      "radicand = " + fmt(inner)});
  try {
    c.tau_star = critical_delay(alpha, beta, b_norm);
    c.checks.push_back({"large_delay_range", true, "tau* = " + fmt(*c.tau_star)});
  } catch (const ValidationError& e) {
    c.checks.push_back({"large_delay_range", false, e.what()});
  }
  return c;
}

double critical_delay(double alpha, double beta, double b_norm) {
  if (!(alpha > 0.0)) throw ValidationError("critical_delay: alpha must be positive");
  if (!(2.0 * beta < alpha)) {
    throw ValidationError("large-delay dissipation requires 2beta<alpha");
  }
  const double ratio = beta / alpha;
  const double bound = std::sqrt(2.0 * (1.0 - ratio)) - 1.0;
  if (!(b_norm >= 0.0 && b_norm < bound)) {
    throw ValidationError("large-delay dissipation requires 0 <= |B| < sqrt(2(1-beta/alpha)) - 1 = " +
                          fmt(bound));
  }
  const double pb = dissipation_polynomial(b_norm, ratio);
  const double pb2 = dissipation_polynomial(b_norm + 2.0, ratio);
  const double ts = -std::log(pb2 / pb) / alpha;
  return ts > 0.0 ? ts : 0.0;
}

double induction_bound(const DissipativityCertificate& cert, double phi_norm, int k) {
  const double ck = std::pow(cert.frak_c, k);
  double geom = 0.0;
  double p = 1.0;
  for (int j = 0; j <= k; ++j) {
    geom += p;
    p *= cert.frak_c;
  }
  return ck * cert.frak_c0 * phi_norm + cert.r * geom;
}

double absorption_time(const DissipativityCertificate& cert, double phi_norm) {
  if (!cert.satisfied) throw ValidationError("absorption_time: certificate not satisfied");
  const double start = cert.frak_c0 * phi_norm;
  const double target = cert.r * cert.frak_c / (1.0 - cert.frak_c);
  if (start <= target) return 0.0;
  if (cert.frak_c == 0.0) return cert.tau;
  if (target == 0.0) return std::numeric_limits<double>::infinity();
  int k = static_cast<int>(std::ceil(std::log(target / start) / std::log(cert.frak_c)));
  k = std::max(k, 0);
  // guard the floor/ceil boundary
  while (k > 0 && std::pow(cert.frak_c, k - 1) * start <= target) --k;
  while (std::pow(cert.frak_c, k) * start > target) ++k;
  return k * cert.tau;
}

namespace {

Vec sample_ball(std::mt19937_64& rng, int n, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec d(n);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) d(i) = gauss(rng);
    norm = d.norm();
  } while (norm == 0.0);
  const double r = radius * std::pow(unif(rng), 1.0 / n);
  return d * (r / norm);
}

Vec clip_to_ball(Vec x, double radius) {
  const double nrm = x.norm();
  if (nrm > radius) x *= radius / nrm;
  return x;
}

// Axis and corner points of the product of two radius-R balls.
std::vector<std::pair<Vec, Vec>> grid_points(int n, double radius) {
  std::vector<std::pair<Vec, Vec>> out;
  const int d = 2 * n;
  if (d <= 6) {
    const double levels[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    long total = 1;
    for (int i = 0; i < d; ++i) total *= 5;
    for (long code = 0; code < total; ++code) {
      Vec u(n), v(n);
      long c = code;
      for (int i = 0; i < d; ++i) {
        const double x = levels[c % 5] * radius;
        c /= 5;
        if (i < n) u(i) = x; else v(i - n) = x;
      }
      out.emplace_back(clip_to_ball(u, radius), clip_to_ball(v, radius));
    }
    return out;
  }
  std::vector<Vec> axes;
  axes.push_back(Vec::Zero(n));
  for (int i = 0; i < n; ++i) {
    for (double s : {-1.0, 1.0}) {
      Vec e = Vec::Zero(n);
      e(i) = s * radius;
      axes.push_back(e);
    }
  }
  for (double s : {-1.0, 1.0}) axes.push_back(Vec::Constant(n, s * radius / std::sqrt(n)));
  for (const auto& u : axes)
    for (const auto& v : axes) out.emplace_back(u, v);
  return out;
}

}  // namespace

FalsifyReport falsify_dissipation(const DelayRhs& g, const Mat& B, double alpha,
                                  double beta, double gamma, double radius,
                                  std::size_t samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ValidationError("falsify_dissipation: radius must be positive");
  if (samples < 1) throw ValidationError("falsify_dissipation: need at least one sample");
  if (B.rows() != B.cols()) throw ValidationError("falsify_dissipation: B must be square");
  const int n = static_cast<int>(B.rows());

  FalsifyReport rep{-std::numeric_limits<double>::infinity(), std::nullopt,
                    -std::numeric_limits<double>::infinity(), 0};
  std::pair<Vec, Vec> arg_max;
  auto visit = [&](const Vec& u, const Vec& v) {
    const Vec gv = g(u, v);
    if (gv.size() != n || !gv.allFinite()) {
      std::ostringstream os;
      os << "falsify_dissipation: non-finite g at u=(" << u.transpose() << "), v=("
         << v.transpose() << ")";
      throw Error(os.str());
    }
    const double lhs = (u - B * v).dot(gv);
    const double slack_free = lhs + alpha * u.squaredNorm() - beta * v.squaredNorm();
    const double defect = slack_free - gamma;
    ++rep.evaluated;
    if (defect > rep.max_defect) {
      rep.max_defect = defect;
      arg_max = {u, v};
    }
    rep.fitted_gamma = std::max(rep.fitted_gamma, slack_free);
  };

  for (const auto& [u, v] : grid_points(n, radius)) visit(u, v);
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec u = sample_ball(rng, n, radius);
    const Vec v = sample_ball(rng, n, radius);
    visit(u, v);
  }
  rep.fitted_gamma = std::max(rep.fitted_gamma, 0.0);
  if (rep.max_defect > 0.0) rep.witness = arg_max;
  return rep;
}

BmValidation validate_bm(const BraytonMirankerParams& p, double alpha_prime, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("validate_bm: epsilon must be positive");
  if (!(alpha_prime > 0.0)) throw ValidationError("validate_bm: alpha' must be positive");
  brayton_miranker(p);  // parameter ranges

  BmValidation out;
  const double lo = std::min(p.b, p.c);
  const double hi = std::max(p.b, p.c);
  out.alpha_eps = 0.5 * lo + alpha_prime - epsilon;
  out.beta_eps = 0.5 * hi + epsilon;
  out.k = std::max(p.q, p.m);

  const bool rate_ok = hi < 0.5 * lo + alpha_prime;
  out.checks.push_back({"max(b,c) < min(b,c)/2 + alpha'", rate_ok,
                        fmt(hi) + " vs " + fmt(0.5 * lo + alpha_prime)});
  const bool alpha_pos = out.alpha_eps > 0.0;
  out.checks.push_back({"alpha_eps > 0", alpha_pos, "alpha_eps = " + fmt(out.alpha_eps)});
  const bool ratio_ok = alpha_pos && 2.0 * out.beta_eps < out.alpha_eps;
  out.checks.push_back({"2 beta_eps < alpha_eps", ratio_ok,
                        fmt(2.0 * out.beta_eps) + " vs " + fmt(out.alpha_eps)});
  if (ratio_ok) {
    out.k_bound = -1.0 + std::sqrt(2.0 * (1.0 - out.beta_eps / out.alpha_eps));
  } else {
    out.k_bound = std::numeric_limits<double>::quiet_NaN();
  }
  const bool k_ok = ratio_ok && out.k < out.k_bound;
  out.checks.push_back({"max(q,m) < -1 + sqrt(2(1 - beta_eps/alpha_eps))", k_ok,
                        fmt(out.k) + " vs " + fmt(out.k_bound)});
  out.pass = rate_ok && alpha_pos && ratio_ok && k_ok;
  if (out.pass) {
    const double ratio = out.beta_eps / out.alpha_eps;
    const double ts = -std::log(dissipation_polynomial(out.k + 2.0, ratio) /
                                dissipation_polynomial(out.k, ratio)) /
                      out.alpha_eps;
    out.tau_star = ts > 0.0 ? ts : 0.0;
  }
  return out;
}

namespace {

// max of a*x^2 + b*x over |x| <= R
double box_quadratic_max(double a, double b, double R) {
  double best = std::max(a * R * R + b * R, a * R * R - b * R);
  best = std::max(best, 0.0);
  if (a < 0.0) {
    const double x = -b / (2.0 * a);
    if (std::abs(x) <= R) best = std::max(best, a * x * x + b * x);
  }
  return best;
}

}  // namespace

double bm_gamma_bound(const BraytonMirankerParams& p, double alpha, double beta,
                      double radius) {
  if (!(radius > 0.0)) throw ValidationError("bm_gamma_bound: radius must be positive");
  const double e1 = 0.5 * p.c * p.m * p.m - beta;
  const double e2 = 0.5 * p.b * p.q * p.q - beta;
  if (!(e1 < 0.0 && e2 < 0.0)) {
    throw ValidationError("bm_gamma_bound: beta must exceed max(b q^2, c m^2)/2");
  }
  // nonlinear terms: (u_i - B v)_i F_i <= alpha_i * coupling / 2
  const double c0 = 0.5 * (p.alpha1 * p.q + p.alpha2 * p.m);
  const double u1 = box_quadratic_max(alpha - 0.5 * p.b, p.p, radius);
  const double u2 = box_quadratic_max(alpha - 0.5 * p.c, 0.0, radius);
  const double pq = p.p * p.q;
  const double v2 = pq * pq / (-4.0 * e2);
  return c0 + u1 + u2 + v2;
}

}  // namespace memdyn
