#include "memdyn/ndde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memdyn {

NddeSystem::NddeSystem(std::string label_, double tau_, Mat B_, DelayRhs g_)
    : label(std::move(label_)), tau(tau_), B(std::move(B_)), g(std::move(g_)) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("ndde: tau must be positive");
  if (B.rows() != B.cols() || B.rows() < 1) throw ValidationError("ndde: B must be square");
  if (!B.allFinite()) throw ValidationError("ndde: B has non-finite entries");
  if (!g) throw ValidationError("ndde: right-hand side is empty");
}

Vec NddeSystem::difference_operator(const HistorySegment& phi) const {
  return phi.values().back() - B * phi.values().front();
}

std::size_t Trajectory::index_of(double t) const {
  const double x = t / dt + lag;
  const double j = std::round(x);
  if (std::abs(x - j) > 0.25 || j < 0 || j >= static_cast<double>(states.size())) {
    std::ostringstream os;
    os << "trajectory: t=" << t << " is not a grid node in [" << times.front() << ", "
       << times.back() << "]";
    throw RangeError(os.str());
  }
  return static_cast<std::size_t>(j);
}

Vec Trajectory::at(double t) const {
  const double x = t / dt + lag;
  const double last = static_cast<double>(states.size() - 1);
  if (x < -0.5 || x > last + 0.5) {
    std::ostringstream os;
    os << "trajectory: t=" << t << " outside [" << times.front() << ", " << times.back() << "]";
    throw RangeError(os.str());
  }
  const double xc = std::clamp(x, 0.0, last);
  const auto j = static_cast<std::size_t>(std::floor(xc));
  if (j + 1 >= states.size()) return states.back();
  const double w = xc - static_cast<double>(j);
  if (w == 0.0) return states[j];
  return (1.0 - w) * states[j] + w * states[j + 1];
}

HistorySegment Trajectory::segment_at(std::size_t index) const {
  if (index < static_cast<std::size_t>(lag) || index >= states.size()) {
    throw RangeError("trajectory: segment index out of range");
  }
  std::vector<Vec> v(states.begin() + static_cast<std::ptrdiff_t>(index - lag),
                     states.begin() + static_cast<std::ptrdiff_t>(index + 1));
  return HistorySegment(tau, std::move(v));
}

HistorySegment Trajectory::segment(double t) const {
  const double x = t / dt + lag;
  const double j = std::round(x);
  if (std::abs(x - j) < 1e-9 * std::max(1.0, std::abs(x))) {
    return segment_at(index_of(t));
  }
  return HistorySegment::from_function([&](double th) { return at(t + th); }, tau, lag,
                                       dim());
}

double aligned_step(double tau, double h) {
  if (!(h > 0.0)) throw ValidationError("step h must be positive");
  const double n = std::ceil(tau / h * (1.0 - 1e-12));
  return tau / n;
}

HistorySegment to_integrator_grid(const HistorySegment& phi, double h) {
  const double ha = aligned_step(phi.tau(), h);
  const int lag = 2 * static_cast<int>(std::llround(phi.tau() / ha));
  return phi.resample(lag);
}

namespace {

void check_state(const Vec& x, double t, double threshold) {
  if (!x.allFinite()) {
    std::ostringstream os;
    os << "ndde: non-finite state at t=" << t;
    throw IntegrationError(os.str(), t);
  }
  if (x.norm() > threshold) {
    std::ostringstream os;
    os << "ndde: blowup, |x| exceeded " << threshold << " at t=" << t;
    throw BlowupError(os.str(), t);
  }
}

Vec eval_rhs(const NddeSystem& sys, const Vec& u, const Vec& v, double t) {
  Vec r = sys.g(u, v);
  if (r.size() != sys.dim() || !r.allFinite()) {
    std::ostringstream os;
    os << "ndde: right-hand side returned non-finite or mis-sized value at t=" << t;
    throw IntegrationError(os.str(), t);
  }
  return r;
}

}  // namespace

Trajectory integrate(const NddeSystem& sys, const HistorySegment& phi, double horizon,
                     double h, const IntegrateOptions& opts) {
  if (std::abs(phi.tau() - sys.tau) > 1e-12 * sys.tau) {
    throw ValidationError("integrate: history tau differs from system tau");
  }
  if (phi.dim() != sys.dim()) throw ValidationError("integrate: history dimension mismatch");
  if (!(horizon > 0.0)) throw ValidationError("integrate: horizon must be positive");
  const double ha = aligned_step(sys.tau, h);
  const long n_tau = std::llround(sys.tau / ha);
  if (n_tau < 4) throw ValidationError("integrate: tau/h must be at least 4");

  Trajectory tr;
  tr.label = sys.label;
  tr.tau = sys.tau;
  tr.step = ha;
  tr.dt = 0.5 * ha;
  tr.lag = static_cast<int>(2 * n_tau);
  const long steps = static_cast<long>(std::ceil(horizon / ha * (1.0 - 1e-12)));
  const std::size_t total = static_cast<std::size_t>(tr.lag) + 2 * steps + 1;
  tr.states.reserve(total);
  tr.times.reserve(total);
  tr.breakpoint.reserve(total);

  const HistorySegment hist = phi.resample(tr.lag);
  for (int j = 0; j <= tr.lag; ++j) tr.states.push_back(hist.value(j));

  const Mat& B = sys.B;
  const int lag = tr.lag;
  auto delayed = [&](std::size_t idx) -> const Vec& { return tr.states[idx - lag]; };

  std::size_t n = lag;  // index of t_n
  Vec y = tr.states[n] - B * delayed(n);
  Vec k1 = eval_rhs(sys, tr.states[n], delayed(n), 0.0);
  for (long s = 0; s < steps; ++s) {
    const double t = s * ha;
    const Vec& dmid = delayed(n + 1);
    const Vec& dend = delayed(n + 2);
    const Vec bmid = B * dmid;
    const Vec bend = B * dend;

    const Vec y2 = y + 0.5 * ha * k1;
    const Vec k2 = eval_rhs(sys, y2 + bmid, dmid, t + 0.5 * ha);
    const Vec y3 = y + 0.5 * ha * k2;
    const Vec k3 = eval_rhs(sys, y3 + bmid, dmid, t + 0.5 * ha);
    const Vec y4 = y + ha * k3;
    const Vec k4 = eval_rhs(sys, y4 + bend, dend, t + ha);
    const Vec y_next = y + (ha / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    Vec x_end = y_next + bend;
    check_state(x_end, t + ha, opts.blowup_threshold);
    const Vec k_end = eval_rhs(sys, x_end, dend, t + ha);

    // cubic Hermite midpoint of y
    const Vec y_mid = 0.5 * (y + y_next) + (ha / 8.0) * (k1 - k_end);
    Vec x_mid = y_mid + bmid;
    check_state(x_mid, t + 0.5 * ha, opts.blowup_threshold);

    tr.states.push_back(std::move(x_mid));
    tr.states.push_back(std::move(x_end));
    n += 2;
    y = y_next;
    k1 = k_end;
  }

  for (std::size_t j = 0; j < tr.states.size(); ++j) {
    const long rel = static_cast<long>(j) - lag;
    tr.times.push_back(rel * tr.dt);
    tr.breakpoint.push_back(rel >= 0 && rel % lag == 0 ? 1 : 0);
  }
  return tr;
}

HistorySegment semigroup(const NddeSystem& sys, const HistorySegment& phi, double t,
                         double h, const IntegrateOptions& opts) {
  if (t < 0.0) throw ValidationError("semigroup: t must be nonnegative");
  if (t == 0.0) return to_integrator_grid(phi, h);
  return integrate(sys, phi, t, h, opts).segment(t);
}

NddeSystem brayton_miranker(const BraytonMirankerParams& p) {
  if (!(p.q > 0.0 && p.q < 1.0)) throw ValidationError("q must lie in (0,1)");
  if (!(p.m > 0.0 && p.m < 1.0)) throw ValidationError("m must lie in (0,1)");
  if (!(p.b > 0.0)) throw ValidationError("b must be positive");
  if (!(p.c > 0.0)) throw ValidationError("c must be positive");
  if (!(p.alpha1 > 0.0 && p.alpha2 > 0.0)) throw ValidationError("alpha_1, alpha_2 must be positive");
  if (!std::isfinite(p.p)) throw ValidationError("p must be finite");
  Mat B(2, 2);
  B << 0.0, p.q, p.m, 0.0;
  auto g = [p](const Vec& u, const Vec& v) {
    const double s = 1.0 / (1.0 + v.squaredNorm());
    Vec r(2);
    r(0) = p.p - p.b * u(0) - p.alpha1 * u(0) * s;
    r(1) = -p.c * u(1) - p.alpha2 * u(1) * s;
    return r;
  };
  return NddeSystem("brayton_miranker", p.tau, std::move(B), std::move(g));
}

NddeSystem linear_ndde(double tau, Mat B, Mat A, Mat A_delay, Vec p) {
  const auto n = B.rows();
  if (A.rows() != n || A.cols() != n || A_delay.rows() != n || A_delay.cols() != n ||
      p.size() != n) {
    throw ValidationError("linear_ndde: dimension mismatch");
  }
  auto g = [A = std::move(A), Ad = std::move(A_delay), p = std::move(p)](const Vec& u,
                                                                         const Vec& v) {
    return Vec(A * u + Ad * v + p);
  };
  return NddeSystem("linear", tau, std::move(B), std::move(g));
}

}  // namespace memdyn
