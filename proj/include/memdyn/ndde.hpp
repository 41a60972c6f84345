#pragma once

// Neutral delay differential equations
//
//     d/dt ( x(t) - B x(t - tau) ) = g( x(t), x(t - tau) ),   t >= 0,
//     x(theta) = phi(theta),                                  theta in [-tau, 0],
//
// integrated by the method of steps on a grid aligned with the delay.

#include "memdyn/core.hpp"
#include "memdyn/history.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace memdyn {

using DelayRhs = std::function<Vec(const Vec& now, const Vec& delayed)>;

/// Parameter bundle (B, tau, g) of a neutral system.  The right-hand side is
/// assumed C^1; that is the caller's obligation and is not checked.
struct NddeSystem {
  NddeSystem(std::string label, double tau, Mat B, DelayRhs g);

  int dim() const noexcept { return static_cast<int>(B.rows()); }

  /// D0 phi = phi(0) - B phi(-tau).
  Vec difference_operator(const HistorySegment& phi) const;

  std::string label;
  double tau;
  Mat B;
  DelayRhs g;
};

/// Sampled solution on a uniform grid that starts at t = -tau.  Nodes are
/// `dt` apart and `lag` nodes span one delay, so t_j = (j - lag) * dt and
/// node `lag` is t = 0.  Breakpoints flag the nodes t = k*tau, k >= 0.
struct Trajectory {
  std::string label;
  double tau = 0.0;
  double step = 0.0;   // integrator step h (dt = h/2 for NDDE output)
  double dt = 0.0;
  int lag = 0;
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<std::uint8_t> breakpoint;
  /// Right limits x(k tau +) at the breakpoints, k = 0, 1, ...  Only filled
  /// by the difference-equation solver, where x may jump; the stored node
  /// value at a breakpoint is the left limit.
  std::vector<Vec> right_limits;

  int dim() const { return static_cast<int>(states.front().size()); }
  std::size_t size() const noexcept { return states.size(); }
  double horizon() const { return times.back(); }

  /// Index of the grid node at time t (within dt/4), or RangeError.
  std::size_t index_of(double t) const;
  /// Linear interpolation in time.
  Vec at(double t) const;
  /// x_t for the node `index`, which must satisfy index >= lag.
  HistorySegment segment_at(std::size_t index) const;
  /// x_t for any covered t >= 0 (interpolated if t is off-grid).
  HistorySegment segment(double t) const;
};

struct IntegrateOptions {
  double blowup_threshold = 1e12;
};

/// Rounds h down so that tau is an integer multiple: h' = tau / ceil(tau/h).
double aligned_step(double tau, double h);

/// Method of steps with classical RK4 on y(t) = x(t) - B x(t - tau).  The
/// trajectory is stored at h/2 so every stage time and every delayed
/// argument is a stored node; midpoints come from cubic Hermite
/// interpolation of y.  Requires tau/h >= 4 after alignment.
Trajectory integrate(const NddeSystem& sys, const HistorySegment& phi, double horizon,
                     double h, const IntegrateOptions& opts = {});

/// S(t) phi: the segment theta -> x(t + theta) on the integrator grid.
HistorySegment semigroup(const NddeSystem& sys, const HistorySegment& phi, double t,
                         double h, const IntegrateOptions& opts = {});

/// Integrator-grid resampling of an initial history (S(0) phi).
HistorySegment to_integrator_grid(const HistorySegment& phi, double h);

struct BraytonMirankerParams {
  double q = 0.5;
  double m = 0.5;
  double p = 0.0;
  double b = 1.0;
  double c = 1.0;
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double tau = 1.0;
};

/// Two-dimensional neutral system with B = [[0, q], [m, 0]] and
/// g(u, v) = (p - b u1 + F1, -c u2 + F2), F_i = -alpha_i u_i / (1 + |v|^2).
NddeSystem brayton_miranker(const BraytonMirankerParams& p);

/// g(u, v) = A u + A_delay v + p.
NddeSystem linear_ndde(double tau, Mat B, Mat A, Mat A_delay, Vec p);

}  // namespace memdyn
