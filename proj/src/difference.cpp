#include "memdyn/difference.hpp"

#include <cmath>
#include <limits>

namespace memdyn {

DifferenceSystem::DifferenceSystem(double tau_, Mat B_, Vec f_)
    : tau(tau_), B(std::move(B_)), f(std::move(f_)) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("difference: tau must be positive");
  if (B.rows() != B.cols() || B.rows() < 1) throw ValidationError("difference: B must be square");
  if (f.size() != B.rows()) throw ValidationError("difference: f has wrong dimension");
  if (!B.allFinite() || !f.allFinite()) throw ValidationError("difference: non-finite entries");
}

Trajectory solve_difference(const DifferenceSystem& sys, const HistorySegment& phi,
                            int k_max) {
  if (std::abs(phi.tau() - sys.tau) > 1e-12 * sys.tau) {
    throw ValidationError("solve_difference: history tau differs from system tau");
  }
  if (phi.dim() != sys.dim()) throw ValidationError("solve_difference: dimension mismatch");
  if (k_max < 1) throw ValidationError("solve_difference: k_max must be at least 1");

  Trajectory tr;
  tr.label = "difference";
  tr.tau = sys.tau;
  tr.lag = phi.intervals();
  tr.dt = phi.spacing();
  tr.step = tr.dt;
  const std::size_t lag = tr.lag;
  const std::size_t total = lag * (k_max + 1) + 1;
  tr.states.reserve(total);
  for (const auto& v : phi.values()) tr.states.push_back(v);
  for (std::size_t j = lag + 1; j < total; ++j) {
    tr.states.push_back(sys.B * tr.states[j - lag] + sys.f);
  }
  tr.times.reserve(total);
  tr.breakpoint.reserve(total);
  for (std::size_t j = 0; j < total; ++j) {
    const long rel = static_cast<long>(j) - static_cast<long>(lag);
    tr.times.push_back(rel * tr.dt);
    tr.breakpoint.push_back(rel >= 0 && rel % static_cast<long>(lag) == 0 ? 1 : 0);
  }
  Vec right = sys.B * phi.values().front() + sys.f;
  for (int k = 0; k <= k_max; ++k) {
    tr.right_limits.push_back(right);
    right = sys.B * right + sys.f;
  }
  return tr;
}

double compatibility_defect(const DifferenceSystem& sys, const HistorySegment& phi) {
  if (phi.dim() != sys.dim()) throw ValidationError("compatibility_defect: dimension mismatch");
  return (sys.B * phi.values().front() + sys.f - phi.values().back()).norm();
}

HistorySegment project_to_kernel(const HistorySegment& phi, const Mat& B) {
  if (B.rows() != phi.dim() || B.cols() != phi.dim()) {
    throw ValidationError("project_to_kernel: B has wrong shape");
  }
  const Vec defect = phi.values().back() - B * phi.values().front();
  const int n = phi.intervals();
  std::vector<Vec> out;
  out.reserve(n + 1);
  for (int j = 0; j <= n; ++j) {
    const double w = static_cast<double>(j) / n;
    out.push_back(phi.value(j) - w * defect);
  }
  // exact at the right end: phi~(0) = B phi(-tau)
  out.back() = B * phi.values().front();
  return HistorySegment(phi.tau(), std::move(out));
}

DecayFit measure_decay_rate(const DifferenceSystem& sys, const HistorySegment& phi,
                            int k_max) {
  if (sys.f.norm() != 0.0) throw ValidationError("measure_decay_rate: requires f = 0");
  if (k_max < 4) throw ValidationError("measure_decay_rate: k_max must be at least 4");
  if (compatibility_defect(sys, phi) >= 1e-10) {
    throw ValidationError("measure_decay_rate: history is not in the kernel of D0");
  }
  const Trajectory tr = solve_difference(sys, phi, k_max);
  const std::size_t lag = tr.lag;
  DecayFit fit{0.0, 0.0, {}};
  for (int k = 1; k <= k_max; ++k) {
    double m = 0.0;
    for (std::size_t j = lag * k + 1; j <= lag * (k + 1); ++j) m = std::max(m, tr.states[j].norm());
    fit.interval_max.push_back(m);
    if (m == 0.0) {
      fit.rate = -std::numeric_limits<double>::infinity();
      fit.intercept = -std::numeric_limits<double>::infinity();
      return fit;
    }
  }
  // least squares of log M_k on k
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (int k = 1; k <= k_max; ++k) {
    const double y = std::log(fit.interval_max[k - 1]);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
  }
  const double n = k_max;
  const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
  fit.intercept = (sy - slope * sk) / n;
  fit.rate = slope / sys.tau;
  return fit;
}

}  // namespace memdyn
