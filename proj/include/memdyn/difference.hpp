#pragma once

// Continuous-time difference equations x(t) - B x(t - tau) = f.

#include "memdyn/core.hpp"
#include "memdyn/history.hpp"
#include "memdyn/ndde.hpp"

namespace memdyn {

struct DifferenceSystem {
  DifferenceSystem(double tau, Mat B, Vec f);

  int dim() const noexcept { return static_cast<int>(B.rows()); }

  double tau;
  Mat B;
  Vec f;
};

/// Exact recursion x(t) = B x(t - tau) + f on phi's grid for k_max delay
/// intervals.  Breakpoint nodes store the left limit; the right limits are
/// in Trajectory::right_limits.
Trajectory solve_difference(const DifferenceSystem& sys, const HistorySegment& phi,
                            int k_max);

/// |B phi(-tau) + f - phi(0)|, the jump of the solution at t = 0.
double compatibility_defect(const DifferenceSystem& sys, const HistorySegment& phi);

/// phi(theta) - w(theta) (phi(0) - B phi(-tau)) with the ramp
/// w(theta) = (theta + tau)/tau; the result lies in the kernel of D0.
HistorySegment project_to_kernel(const HistorySegment& phi, const Mat& B);

struct DecayFit {
  double rate;       // slope of log M_k against t = k tau
  double intercept;  // log M at k = 0 from the fit
  std::vector<double> interval_max;  // M_1 .. M_kmax
};

/// Least-squares decay exponent of the per-interval sup norms of the
/// homogeneous solution.  Requires f = 0, phi in the kernel of D0
/// (defect < 1e-10) and k_max >= 4.  Returns rate = -inf once the
/// solution vanishes on a whole interval.
DecayFit measure_decay_rate(const DifferenceSystem& sys, const HistorySegment& phi,
                            int k_max);

}  // namespace memdyn
