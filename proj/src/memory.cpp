#include "memdyn/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

namespace memdyn {

namespace {

constexpr double kTailEps = 1e-10;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (b <= a) return 0.0;
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  // one-sided limits at the ends, so a jump at a knot is not sampled
  const double nudge = 1e-13 * (b - a);
  double acc = f(a + nudge) + f(b - nudge);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

MemoryKernel kernel_exponential(double mu0, double delta) {
  if (!(mu0 > 0.0) || !(delta > 0.0)) {
    throw ValidationError("exponential kernel requires mu0 > 0 and delta > 0");
  }
  MemoryKernel k;
  k.family = "exponential";
  k.params = {{"mu0", mu0}, {"delta", delta}};
  k.mu = [=](double s) { return mu0 * std::exp(-delta * s); };
  k.kappa = [=](double s) { return mu0 / delta * std::exp(-delta * s); };
  k.kappa_tail = [=](double s) { return mu0 / (delta * delta) * std::exp(-delta * s); };
  k.kappa0 = mu0 / delta;
  k.beta_nec = 1.0 / delta;
  k.K = 1.0;
  k.delta = delta;
  k.s_max = -std::log(kTailEps) / delta;
  return k;
}

MemoryKernel kernel_piecewise(double mu0, double t_star) {
  if (!(mu0 > 0.0) || !(t_star > 0.0)) {
    throw ValidationError("piecewise kernel requires mu0 > 0 and t_star > 0");
  }
  MemoryKernel k;
  k.family = "piecewise_constant";
  k.params = {{"mu0", mu0}, {"t_star", t_star}};
  const double kappa0 = mu0 * t_star;
  k.mu = [=](double s) { return s <= t_star ? mu0 : 0.0; };
  k.kappa = [=](double s) { return s < t_star ? (1.0 - s / t_star) * kappa0 : 0.0; };
  k.kappa_tail = [=](double s) {
    return s < t_star ? kappa0 * (t_star - s) * (t_star - s) / (2.0 * t_star) : 0.0;
  };
  k.kappa0 = kappa0;
  k.beta_nec = t_star;
  k.delta = 1.0 / t_star;
  k.K = std::exp(k.delta * t_star);
  k.s_max = t_star;
  k.knots = {t_star};
  return k;
}

MemoryKernel kernel_tabulated(std::vector<double> grid, std::vector<double> values) {
  const std::size_t n = grid.size();
  if (n < 2 || values.size() != n) {
    throw ValidationError("tabulated kernel needs at least two (s, mu) pairs of equal length");
  }
  if (grid[0] != 0.0) throw ValidationError("tabulated kernel grid must start at s = 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(values[i])) {
      throw ValidationError("tabulated kernel has non-finite entries");
    }
    if (values[i] < 0.0) throw ValidationError("tabulated kernel values must be nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError("tabulated kernel grid must be strictly increasing");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      std::ostringstream os;
      os << "tabulated kernel values must be nonincreasing (increase at s=" << grid[i] << ")";
      throw ValidationError(os.str());
    }
  }

  // right-tail integrals of mu (exact for linear pieces) and of kappa
  // (Simpson, exact for quadratic pieces)
  std::vector<double> R(n, 0.0), Q(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double L = grid[i + 1] - grid[i];
    R[i] = R[i + 1] + 0.5 * (values[i] + values[i + 1]) * L;
  }
  auto seg = [grid](double s) {
    return static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), s) - grid.begin()) - 1;
  };
  auto mu = [grid, values, seg](double s) {
    if (s < 0.0) s = 0.0;
    if (s > grid.back()) return 0.0;
    if (s == grid.back()) return values.back();
    const std::size_t i = seg(s);
    const double w = (s - grid[i]) / (grid[i + 1] - grid[i]);
    return (1.0 - w) * values[i] + w * values[i + 1];
  };
  auto kappa = [grid, values, R, seg, mu](double s) {
    if (s < 0.0) s = 0.0;
    if (s >= grid.back()) return 0.0;
    const std::size_t i = seg(s);
    return R[i + 1] + 0.5 * (mu(s) + values[i + 1]) * (grid[i + 1] - s);
  };
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = grid[i], b = grid[i + 1];
    Q[i] = Q[i + 1] + (b - a) / 6.0 * (kappa(a) + 4.0 * kappa(0.5 * (a + b)) + kappa(b));
  }
  auto kappa_tail = [grid, Q, seg, kappa](double s) {
    if (s < 0.0) s = 0.0;
    if (s >= grid.back()) return 0.0;
    const std::size_t i = seg(s);
    const double b = grid[i + 1];
    return Q[i + 1] + (b - s) / 6.0 * (kappa(s) + 4.0 * kappa(0.5 * (s + b)) + kappa(b));
  };

  MemoryKernel k;
  k.family = "tabulated";
  k.params = {{"nodes", static_cast<double>(n)}};
  k.mu = mu;
  k.kappa = kappa;
  k.kappa_tail = kappa_tail;
  k.kappa0 = R[0];
  k.s_max = grid.back();
  k.knots = grid;
  k.K = kNaN;
  k.delta = kNaN;
  double beta = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double s = grid[i] + (grid[i + 1] - grid[i]) * j / 32.0;
      const double m = mu(s), kp = kappa(s);
      if (m > 0.0) {
        beta = std::max(beta, kp / m);
      } else if (kp > 0.0) {
        beta = std::numeric_limits<double>::infinity();
      }
    }
  }
  k.beta_nec = beta;
  return k;
}

std::vector<double> kernel_grid(const MemoryKernel& k, int points) {
  if (points < 2) throw ValidationError("kernel_grid: need at least two points");
  const double end = k.s_max > 0.0 ? 2.0 * k.s_max : 1.0;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = end * i / (points - 1);
  if (k.family == "piecewise_constant") {
    const double ts = k.params.at("t_star");
    for (double s : {ts, ts * (1.0 - 1e-6), ts * (1.0 + 1e-6)}) g.push_back(s);
    std::sort(g.begin(), g.end());
  }
  return g;
}

KernelCheck check_decay_condition(const MemoryKernel& k, double K, double delta,
                                  const std::vector<double>& grid) {
  if (!(K >= 1.0)) throw ValidationError("decay condition requires K >= 1");
  if (!(delta > 0.0)) throw ValidationError("decay condition requires delta > 0");
  KernelCheck out{true, -std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (double s : grid) {
    const double ms = k.mu(s);
    for (double r : grid) {
      const double d = k.mu(s + r) - K * std::exp(-delta * r) * ms;
      if (d > out.max_defect) out = {true, d, s, r};
    }
  }
  out.holds = out.max_defect <= 1e-12 * k.mu(0.0);
  return out;
}

KernelCheck check_nec(const MemoryKernel& k, double beta, const std::vector<double>& grid) {
  if (!(beta > 0.0)) throw ValidationError("NEC check requires beta > 0");
  KernelCheck out{true, -std::numeric_limits<double>::infinity(), 0.0, kNaN};
  for (double s : grid) {
    const double kp = k.kappa(s);
    const double d = std::max(kp - beta * k.mu(s), kp - k.kappa0 * std::exp(-s / beta));
    if (d > out.max_defect) {
      out.max_defect = d;
      out.witness_s = s;
    }
  }
  out.holds = out.max_defect <= 1e-12 * k.kappa0;
  return out;
}

double kernel_quadrature_residual(const MemoryKernel& k, const std::vector<double>& grid) {
  const double end = std::max(2.0 * k.s_max, 1.0);
  double worst = 0.0;
  for (double s : grid) {
    if (s > end) continue;
    std::vector<double> pts{s, end};
    for (double b : k.knots) {
      if (b > s && b < end) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    const int panels = std::max(16, 4000 / static_cast<int>(pts.size() - 1));
    double q = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) q += simpson(k.mu, pts[i], pts[i + 1], panels);
    worst = std::max(worst, std::abs(q - k.kappa(s)));
  }
  return worst;
}

GalerkinMemorySystem::GalerkinMemorySystem(Vec lambda, double nu, Vec F, std::vector<double> coeffs,
                                           MemoryKernel kernel)
    : lambda_(std::move(lambda)), nu_(nu), F_(std::move(F)), c_(std::move(coeffs)),
      kernel_(std::move(kernel)) {
  const int m = modes();
  if (m < 1) throw ValidationError("memory system needs at least one mode");
  for (int i = 0; i < m; ++i) {
    if (!(lambda_(i) > 0.0) || !std::isfinite(lambda_(i))) {
      throw ValidationError("eigenvalues must be positive and finite");
    }
    if (i > 0 && !(lambda_(i) > lambda_(i - 1))) {
      throw ValidationError("eigenvalues must be strictly increasing");
    }
  }
  if (!(nu_ > 0.0) || !std::isfinite(nu_)) throw ValidationError("nu must be positive");
  if (F_.size() != m || !F_.allFinite()) throw ValidationError("forcing has wrong size or is not finite");
  if (c_.size() != static_cast<std::size_t>(m) * m * m) {
    throw ValidationError("structure constants must have m^3 entries");
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) {
        if (!std::isfinite(c(i, j, k))) throw ValidationError("structure constants must be finite");
        if (c(i, j, k) + c(i, k, j) != 0.0) {
          std::ostringstream os;
          os << "structure constants violate c(i,j,k) = -c(i,k,j) at (" << i << "," << j << ","
             << k << ")";
          throw ValidationError(os.str());
        }
      }
    }
  }
}

Vec GalerkinMemorySystem::bilinear(const Vec& u) const {
  const int m = modes();
  Vec out = Vec::Zero(m);
  for (int j = 0; j < m; ++j) {
    if (u(j) == 0.0) continue;
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) acc += c(j, i, k) * u(k);
      out(i) += u(j) * acc;
    }
  }
  return out;
}

double GalerkinMemorySystem::forcing_dual_sq() const {
  return (F_.array().square() / lambda_.array()).sum();
}

std::vector<double> random_structure_constants(int m, double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-scale, scale);
  std::vector<double> c(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int k = j + 1; k < m; ++k) {
        const double x = U(rng);
        c[(i * m + j) * m + k] = x;
        c[(i * m + k) * m + j] = -x;
      }
    }
  }
  return c;
}

MemoryTrajectory integrate_memory(const GalerkinMemorySystem& sys, const Vec& u0, double T,
                                  double h, double blowup_threshold) {
  const int m = sys.modes();
  if (u0.size() != m || !u0.allFinite()) throw ValidationError("u0 has wrong size or is not finite");
  if (!(h > 0.0) || !(T > 0.0)) throw ValidationError("integrate_memory requires T > 0 and h > 0");
  const auto N = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
  h = T / static_cast<double>(N);

  const MemoryKernel& ker = sys.kernel();
  const std::size_t Jk = ker.s_max > 0.0 ? static_cast<std::size_t>(std::ceil(ker.s_max / h)) : 0;
  std::vector<double> kap(Jk + 1);
  for (std::size_t j = 0; j <= Jk; ++j) kap[j] = ker.kappa(j * h);

  Mat U(m, N + 1);
  U.col(0) = u0;
  const Vec nl = sys.nu() * sys.lambda();
  auto rhs = [&](const Vec& u, const Vec& conv) -> Vec {
    return -nl.cwiseProduct(u) - conv - sys.bilinear(u) + sys.forcing();
  };

  MemoryTrajectory tr;
  tr.h = h;
  tr.times.reserve(N + 1);
  tr.states.reserve(N + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(u0);
  Vec conv(m);
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t J = std::min(n, Jk);
    conv.setZero();
    if (J > 0) {
      conv += 0.5 * kap[0] * U.col(n);
      for (std::size_t j = 1; j < J; ++j) conv += kap[j] * U.col(n - j);
      conv += 0.5 * kap[J] * U.col(n - J);
      conv = h * sys.lambda().cwiseProduct(conv);
    }
    const Vec u = U.col(n);
    const Vec k1 = rhs(u, conv);
    const Vec k2 = rhs(u + 0.5 * h * k1, conv);
    const Vec k3 = rhs(u + 0.5 * h * k2, conv);
    const Vec k4 = rhs(u + h * k3, conv);
    const Vec next = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = (n + 1) * h;
    if (!next.allFinite()) throw IntegrationError("non-finite state in memory integration", t);
    if (next.norm() > blowup_threshold) {
      std::ostringstream os;
      os << "state norm exceeded " << blowup_threshold << " at t=" << t;
      throw BlowupError(os.str(), t);
    }
    U.col(n + 1) = next;
    tr.times.push_back(t);
    tr.states.push_back(next);
  }
  return tr;
}

MemoryDiagnostics memory_diagnostics(const MemoryTrajectory& traj, const MemoryKernel& k,
                                     const Vec& lambda, int stride, int threads) {
  if (stride < 1) throw ValidationError("memory_diagnostics: stride must be at least 1");
  const std::size_t N = traj.states.size();
  if (N == 0) return {};
  const int m = static_cast<int>(lambda.size());
  const double h = traj.h;

  Mat u(m, N), Ucum(m, N);
  for (std::size_t n = 0; n < N; ++n) u.col(n) = traj.states[n];
  Ucum.col(0).setZero();
  for (std::size_t n = 1; n < N; ++n) Ucum.col(n) = Ucum.col(n - 1) + 0.5 * h * (u.col(n - 1) + u.col(n));

  const std::size_t Jd =
      k.s_max > 0.0 ? std::min(N - 1, static_cast<std::size_t>(std::ceil(k.s_max / h))) : 0;
  std::vector<double> mu(Jd + 1), kap(Jd + 1);
  for (std::size_t j = 0; j <= Jd; ++j) {
    mu[j] = k.mu(j * h);
    kap[j] = k.kappa(j * h);
  }
  auto wnorm = [&](const Vec& v) { return (lambda.array() * v.array().square()).sum(); };

  std::vector<std::size_t> samples;
  for (std::size_t n = 0; n < N; n += stride) samples.push_back(n);
  MemoryDiagnostics d;
  const std::size_t S = samples.size();
  for (auto* v : {&d.t, &d.u_sq, &d.grad_sq, &d.eta_sq, &d.gamma1, &d.t_eta_sq, &d.tail}) v->assign(S, 0.0);

  auto work = [&](std::size_t i) {
    const std::size_t n = samples[i];
    const double t = traj.times[n];
    const Vec un = u.col(n);
    d.t[i] = t;
    d.u_sq[i] = un.squaredNorm();
    d.grad_sq[i] = wnorm(un);
    const std::size_t J = std::min(n, Jd);
    if (J == 0) return;

    // eta^t(jh) = U(t) - U(t - jh); cumulative trapezoid of mu |eta|^2
    std::vector<double> I(J + 1, 0.0);
    double gam = 0.0, teta = 0.0;
    double prev_e = 0.0, prev_g = 0.0, prev_t = mu[0] * wnorm(un);
    for (std::size_t j = 1; j <= J; ++j) {
      const double e2 = wnorm(Ucum.col(n) - Ucum.col(n - j));
      const double fe = mu[j] * e2, fg = kap[j] * e2, ft = mu[j] * wnorm(u.col(n - j));
      I[j] = I[j - 1] + 0.5 * h * (prev_e + fe);
      gam += 0.5 * h * (prev_g + fg);
      teta += 0.5 * h * (prev_t + ft);
      prev_e = fe;
      prev_g = fg;
      prev_t = ft;
    }
    const bool inside = n <= Jd;  // otherwise the s > t region is below the cutoff
    const double Un2 = wnorm(Ucum.col(n));
    const double kt = inside ? k.kappa(t) : 0.0;
    const double total = I[J] + Un2 * kt;
    d.eta_sq[i] = total;
    d.gamma1[i] = gam + (inside ? Un2 * k.kappa_tail(t) : 0.0);
    d.t_eta_sq[i] = teta;

    auto cum = [&](double a) {
      const double x = a / h;
      if (x <= static_cast<double>(J)) {
        const auto j0 = static_cast<std::size_t>(std::floor(x));
        if (j0 >= J) return I[J];
        const double w = x - j0;
        return (1.0 - w) * I[j0] + w * I[j0 + 1];
      }
      return inside ? I[J] + Un2 * (kt - k.kappa(a)) : I[J];
    };
    double tl = 0.0;
    const double sig_max = std::max(k.s_max, 1.0);
    for (double sig = 1.0; sig <= sig_max; sig *= 2.0) {
      tl = std::max(tl, sig * (cum(1.0 / sig) + total - cum(sig)));
    }
    d.tail[i] = tl;
  };

  threads = std::max(1, std::min<int>(threads, static_cast<int>(S)));
  if (threads == 1) {
    for (std::size_t i = 0; i < S; ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < S; i += threads) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return d;
}

namespace {

void require_grid(const MemoryDiagnostics& d) {
  if (d.t.size() < 3) throw ValidationError("inequality checks need at least three grid points");
}

}  // namespace

double check_energy_inequality(const MemoryDiagnostics& d, double nu, const Vec& F,
                               const Vec& lambda) {
  require_grid(d);
  if (!(nu > 0.0)) throw ValidationError("nu must be positive");
  const double Fd = (F.array().square() / lambda.array()).sum();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < d.t.size(); ++i) {
    const double dE = (d.u_sq[i + 1] + d.eta_sq[i + 1] - d.u_sq[i - 1] - d.eta_sq[i - 1]) /
                      (d.t[i + 1] - d.t[i - 1]);
    worst = std::max(worst, dE + nu * d.grad_sq[i] - Fd / nu);
  }
  return worst;
}

double inequality_tolerance(const MemoryDiagnostics& d, double h, double nu) {
  double peak = 0.0;
  for (std::size_t i = 0; i < d.t.size(); ++i) peak = std::max(peak, d.u_sq[i] + d.eta_sq[i]);
  return 10.0 * h * peak * nu;
}

double check_gamma_inequality(const MemoryDiagnostics& d, const MemoryKernel& k, double beta) {
  require_grid(d);
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  const KernelCheck nec = check_nec(k, beta, kernel_grid(k));
  if (!nec.holds) {
    std::ostringstream os;
    os << "beta=" << beta << " fails kappa <= beta mu (defect " << nec.max_defect
       << " at s=" << nec.witness_s << ")";
    throw ValidationError(os.str());
  }
  const double C = 2.0 * beta * beta * k.kappa0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < d.t.size(); ++i) {
    const double dG = (d.gamma1[i + 1] - d.gamma1[i - 1]) / (d.t[i + 1] - d.t[i - 1]);
    const double r = dG + (d.gamma1[i] + beta * d.eta_sq[i]) / (4.0 * beta) - C * d.grad_sq[i];
    worst = std::max(worst, r);
  }
  return worst;
}

AbsorbingCheck check_absorbing_bound(const MemoryDiagnostics& d, const MemoryKernel& k,
                                     double nu, double lambda1, double forcing_dual_sq,
                                     double x0_norm_sq, double C_fit) {
  if (!(nu > 0.0) || !(lambda1 > 0.0)) throw ValidationError("nu and lambda1 must be positive");
  const double beta = k.beta_nec;
  AbsorbingCheck out;
  out.Lambda = 1.0 / (4.0 * lambda1 * nu) + 2.0 * beta * beta * k.kappa0 / nu;
  out.gamma_rate = 1.0 / (4.0 * std::max(beta, out.Lambda));
  out.max_ratio = 0.0;
  out.violated = false;
  out.bound_series.reserve(d.t.size());
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    const double b = C_fit * (std::exp(-out.gamma_rate * d.t[i]) * x0_norm_sq + forcing_dual_sq);
    out.bound_series.push_back(b);
    const double e = d.u_sq[i] + d.eta_sq[i];
    if (b > 0.0) out.max_ratio = std::max(out.max_ratio, e / b);
    if (e > b) out.violated = true;
  }
  return out;
}

double tail_constant(const MemoryDiagnostics& d) {
  double run = 0.0, C = 0.0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    run = std::max(run, d.grad_sq[i]);
    if (run > 0.0) C = std::max(C, (d.t_eta_sq[i] + d.tail[i]) / run);
  }
  return C;
}

}  // namespace memdyn
