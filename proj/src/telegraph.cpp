#include "memdyn/telegraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memdyn {

TelegraphLine::TelegraphLine(double L_, double C_, double R0_, double E_, LineBoundary b)
    : L(L_), C(C_), R0(R0_), E(E_), boundary(b) {
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("line: L must be positive");
  if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("line: C must be positive");
  if (!(R0 >= 0.0) || !std::isfinite(R0)) throw ValidationError("line: R0 must be nonnegative");
  if (!std::isfinite(E)) throw ValidationError("line: E must be finite");
}

double TelegraphLine::tau() const { return std::sqrt(L * C); }
double TelegraphLine::speed() const { return 1.0 / std::sqrt(L * C); }
double TelegraphLine::impedance() const { return std::sqrt(L / C); }
double TelegraphLine::r() const { return R0 * std::sqrt(C / L); }

WaveHistories decompose(const LineProfile& V0, const LineProfile& I0, const TelegraphLine& line,
                        int intervals) {
  const double c = line.speed(), z = line.impedance(), tau = line.tau();
  // clamp x to [0, 1]: theta = -tau maps to c*theta = -1 up to rounding
  auto X = [](double x) { return std::clamp(x, 0.0, 1.0); };
  auto phi = HistorySegment::from_function(
      [&](double th) {
        const double x = X(-c * th);
        return Vec::Constant(1, V0(x) + z * I0(x));
      },
      tau, intervals, 1);
  auto psi = HistorySegment::from_function(
      [&](double th) {
        const double x = X(c * th + 1.0);
        return Vec::Constant(1, V0(x) - z * I0(x));
      },
      tau, intervals, 1);
  return {std::move(phi), std::move(psi)};
}

HistorySegment wave_state(const WaveHistories& w) {
  if (!w.phi.same_grid(w.psi_tilde)) throw ValidationError("wave_state: waves on different grids");
  std::vector<Vec> v;
  v.reserve(w.phi.intervals() + 1);
  for (int j = 0; j <= w.phi.intervals(); ++j) {
    Vec x(2);
    x << w.phi.value(j)(0), w.psi_tilde.value(j)(0);
    v.push_back(x);
  }
  return HistorySegment(w.phi.tau(), std::move(v));
}

Mat line_matrix(const TelegraphLine& line) {
  const double r = line.r();
  Mat B(2, 2);
  B << 0.0, -(1.0 - r) / (1.0 + r), 1.0, 0.0;
  return B;
}

Vec line_forcing(const TelegraphLine& line) {
  Vec f(2);
  f << 2.0 * line.E / (1.0 + line.r()), 0.0;
  return f;
}

DifferenceSystem boundary_to_difference(const TelegraphLine& line) {
  return DifferenceSystem(line.tau(), line_matrix(line), line_forcing(line));
}

NddeSystem boundary_to_ndde(const TelegraphLine& line) {
  const Vec f = line_forcing(line);
  return NddeSystem("telegraph-dynamic", line.tau(), line_matrix(line),
                    [f](const Vec&, const Vec&) { return f; });
}

double dynamic_boundary_constant(const LineProfile& V0, const LineProfile& I0,
                                 const TelegraphLine& line) {
  return V0(0.0) + line.R0 * I0(0.0);
}

namespace {

Vec wave_at(const Trajectory& w, double s) {
  const double lo = w.times.front(), hi = w.times.back();
  const double eps = 1e-9 * std::max(1.0, std::abs(hi));
  if (s < lo - eps || s > hi + eps) {
    std::ostringstream os;
    os << "wave argument " << s << " outside the computed range [" << lo << ", " << hi << "]";
    throw RangeError(os.str());
  }
  return w.at(std::clamp(s, lo, hi));
}

}  // namespace

std::pair<double, double> reconstruct(const Trajectory& waves, const TelegraphLine& line,
                                      double x, double t) {
  if (waves.dim() != 2) throw ValidationError("reconstruct: expected a (phi, psi~) trajectory");
  if (x < -1e-12 || x > 1.0 + 1e-12) throw RangeError("reconstruct: x must lie in [0, 1]");
  x = std::clamp(x, 0.0, 1.0);
  const double tau = line.tau();
  const double fwd = wave_at(waves, t - x * tau)(0);
  const double bwd = wave_at(waves, t + x * tau - tau)(1);
  return {0.5 * (fwd + bwd), 0.5 / line.impedance() * (fwd - bwd)};
}

std::vector<FieldSample> field_grid(const Trajectory& waves, const TelegraphLine& line,
                                    double t0, double t1, int nt, int nx) {
  if (nt < 1 || nx < 2) throw ValidationError("field grid needs nt >= 1 and nx >= 2");
  if (t1 < t0) throw ValidationError("field grid needs t1 >= t0");
  std::vector<FieldSample> out;
  out.reserve(static_cast<std::size_t>(nt) * nx);
  for (int i = 0; i < nt; ++i) {
    const double t = nt == 1 ? t0 : t0 + (t1 - t0) * i / (nt - 1);
    for (int j = 0; j < nx; ++j) {
      const double x = static_cast<double>(j) / (nx - 1);
      const auto [V, I] = reconstruct(waves, line, x, t);
      out.push_back({t, x, V, I});
    }
  }
  return out;
}

CrossValidation cross_validate(const LineProfile& V0, const LineProfile& I0,
                               const TelegraphLine& line, double T, int intervals) {
  if (line.boundary != LineBoundary::Static) {
    throw ValidationError("cross_validate supports the static boundary only");
  }
  if (!(T > 0.0)) throw ValidationError("cross_validate: T must be positive");
  const double tau = line.tau();
  const DifferenceSystem sys = boundary_to_difference(line);
  const HistorySegment x0 = wave_state(decompose(V0, I0, line, intervals));
  const int k_max = static_cast<int>(std::ceil(T / tau)) + 1;
  const Trajectory w = solve_difference(sys, x0, k_max);

  CrossValidation cv{};
  cv.compatibility_defect = compatibility_defect(sys, x0);
  cv.jump_at_zero = (w.right_limits.front() - w.states[w.lag]).norm();

  const double r = line.r(), z = line.impedance(), E = line.E;
  const std::size_t lag = w.lag;
  const auto last = std::min(w.size() - 1, lag + static_cast<std::size_t>(std::llround(T / w.dt)));
  for (std::size_t j = lag + 1; j <= last; ++j) {
    const double t = w.times[j];
    // x = 0: V + R0 I = ((1 + r) phi(t) + (1 - r) psi(t)) / 2, psi(t) = psi~(t - tau)
    const double b0 = 0.5 * ((1.0 + r) * w.states[j](0) + (1.0 - r) * w.states[j - lag](1)) - E;
    // x = 1: I = (phi(t - tau) - psi(t + tau)) / (2z), psi(t + tau) = psi~(t)
    const double b1 = (w.states[j - lag](0) - w.states[j](1)) / (2.0 * z);
    cv.boundary_residual = std::max({cv.boundary_residual, std::abs(b0), std::abs(b1)});
    if (t >= 2.0 * tau - 1e-12 * tau) {
      for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto [V, I] = reconstruct(w, line, x, t);
        cv.settle_deviation = std::max(cv.settle_deviation, std::abs(V - E) + std::abs(I));
      }
    }
  }

  // Riemann invariants transported one grid cell along each characteristic
  const int nx = intervals;
  const double dx = 1.0 / nx;
  const double dt = w.dt;
  for (std::size_t j = lag; j + 1 <= last && w.times[j] + dt <= T + 1e-12 * T; ++j) {
    const double t = w.times[j];
    for (int i = 0; i < nx; ++i) {
      const double x = i * dx;
      const auto [Va, Ia] = reconstruct(w, line, x, t);
      const auto [Vb, Ib] = reconstruct(w, line, x + dx, t + dt);
      const auto [Vc, Ic] = reconstruct(w, line, x + dx, t);
      const auto [Vd, Id] = reconstruct(w, line, x, t + dt);
      const double fwd = (Vb + z * Ib) - (Va + z * Ia);
      const double bwd = (Vd - z * Id) - (Vc - z * Ic);
      cv.characteristic_residual =
          std::max({cv.characteristic_residual, std::abs(fwd), std::abs(bwd)});
    }
  }
  cv.max_discrepancy = std::max(cv.boundary_residual, cv.characteristic_residual);
  return cv;
}

}  // namespace memdyn
