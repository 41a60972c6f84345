#pragma once

#include "memdyn/core.hpp"

#include <functional>
#include <span>
#include <vector>

namespace memdyn {

/// A continuous function on [-tau, 0] with values in R^n, stored on a
/// uniform grid theta_j = -tau + j*tau/N, j = 0..N.  Values between nodes
/// are recovered by linear interpolation.
///
/// Instances are immutable after construction.
class HistorySegment {
 public:
  /// Builds a segment from node values.  `values.size()` must be N+1 with
  /// N >= 2, all of dimension `dim`, all finite.
  HistorySegment(double tau, std::vector<Vec> values);

  /// Samples `f` on the grid.  Throws ValidationError naming the first node
  /// where `f` is not finite.
  static HistorySegment from_function(const std::function<Vec(double)>& f,
                                      double tau, int intervals, int dim);

  /// Constant segment.
  static HistorySegment constant(const Vec& value, double tau, int intervals);

  double tau() const noexcept { return tau_; }
  int dim() const noexcept { return static_cast<int>(values_.front().size()); }
  /// Number of grid intervals N (there are N+1 nodes).
  int intervals() const noexcept { return static_cast<int>(values_.size()) - 1; }
  double spacing() const noexcept { return tau_ / intervals(); }

  /// theta_j.  Node N is exactly 0 and node 0 exactly -tau.
  double node(int j) const noexcept;
  const Vec& value(int j) const { return values_.at(j); }
  std::span<const Vec> values() const noexcept { return values_; }

  /// Piecewise-linear value at theta.  Arguments up to half a grid step
  /// outside [-tau, 0] are clamped; anything further is a RangeError.
  Vec eval(double theta) const;

  /// max_j |value(j)|_2, the grid estimate of the sup norm.
  double sup_norm() const;

  /// Resamples onto a uniform grid with `intervals` intervals.
  HistorySegment resample(int intervals) const;

  HistorySegment operator+(const HistorySegment& other) const;
  HistorySegment operator-(const HistorySegment& other) const;
  HistorySegment operator*(double a) const;

  /// Returns true if both segments have the same tau, N and dim.
  bool same_grid(const HistorySegment& other) const noexcept;

 private:
  double tau_;
  std::vector<Vec> values_;
};

inline HistorySegment operator*(double a, const HistorySegment& seg) { return seg * a; }

/// sup-norm distance between two segments on matching grids.
double sup_distance(const HistorySegment& a, const HistorySegment& b);

}  // namespace memdyn
