#include "memdyn/history.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace memdyn {

HistorySegment::HistorySegment(double tau, std::vector<Vec> values)
    : tau_(tau), values_(std::move(values)) {
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) {
    throw ValidationError("history segment: tau must be positive and finite");
  }
  if (values_.size() < 3) {
    throw ValidationError("history segment: need at least 2 grid intervals");
  }
  const auto n = values_.front().size();
  if (n < 1) {
    throw ValidationError("history segment: dimension must be positive");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (values_[j].size() != n) {
      throw ValidationError("history segment: inconsistent dimension at node " +
                            std::to_string(j));
    }
    if (!values_[j].allFinite()) {
      throw ValidationError("history segment: non-finite value at node " +
                            std::to_string(j));
    }
  }
}

HistorySegment HistorySegment::from_function(const std::function<Vec(double)>& f,
                                             double tau, int intervals, int dim) {
  if (!(tau > 0.0)) throw ValidationError("from_function: tau must be positive");
  if (intervals < 2) throw ValidationError("from_function: N must be at least 2");
  if (dim < 1) throw ValidationError("from_function: dim must be positive");
  std::vector<Vec> values;
  values.reserve(intervals + 1);
  const double dt = tau / intervals;
  for (int j = 0; j <= intervals; ++j) {
    const double theta = (j == intervals) ? 0.0 : -tau + j * dt;
    Vec v = f(theta);
    if (v.size() != dim) {
      throw ValidationError("from_function: wrong dimension at node " + std::to_string(j));
    }
    if (!v.allFinite()) {
      throw ValidationError("from_function: non-finite value at node " + std::to_string(j));
    }
    values.push_back(std::move(v));
  }
  return HistorySegment(tau, std::move(values));
}

HistorySegment HistorySegment::constant(const Vec& value, double tau, int intervals) {
  if (intervals < 2) throw ValidationError("constant: N must be at least 2");
  return HistorySegment(tau, std::vector<Vec>(intervals + 1, value));
}

double HistorySegment::node(int j) const noexcept {
  const int n = intervals();
  if (j == n) return 0.0;
  return -tau_ + j * (tau_ / n);
}

Vec HistorySegment::eval(double theta) const {
  const double dt = spacing();
  if (!(theta >= -tau_ - 0.5 * dt && theta <= 0.5 * dt)) {
    std::ostringstream os;
    os << "history eval: theta=" << theta << " outside [" << -tau_ << ", 0]";
    throw RangeError(os.str());
  }
  const int n = intervals();
  const double x = std::clamp((theta + tau_) / dt, 0.0, static_cast<double>(n));
  // node arguments come back exactly even after the round trip through x
  const double xr = std::round(x);
  if (std::abs(x - xr) <= 1e-9 * std::max(1.0, xr)) return values_[static_cast<std::size_t>(xr)];
  int j = static_cast<int>(std::floor(x));
  if (j >= n) return values_.back();
  const double w = x - j;
  if (w == 0.0) return values_[j];
  return (1.0 - w) * values_[j] + w * values_[j + 1];
}

double HistorySegment::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, v.norm());
  return m;
}

HistorySegment HistorySegment::resample(int intervals) const {
  if (intervals == this->intervals()) return *this;
  return from_function([this](double th) { return eval(th); }, tau_, intervals, dim());
}

bool HistorySegment::same_grid(const HistorySegment& other) const noexcept {
  return tau_ == other.tau_ && values_.size() == other.values_.size() &&
         dim() == other.dim();
}

HistorySegment HistorySegment::operator+(const HistorySegment& other) const {
  if (!same_grid(other)) throw ValidationError("segment add: grids differ");
  std::vector<Vec> out(values_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = values_[j] + other.values_[j];
  return HistorySegment(tau_, std::move(out));
}

HistorySegment HistorySegment::operator-(const HistorySegment& other) const {
  if (!same_grid(other)) throw ValidationError("segment subtract: grids differ");
  std::vector<Vec> out(values_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = values_[j] - other.values_[j];
  return HistorySegment(tau_, std::move(out));
}

HistorySegment HistorySegment::operator*(double a) const {
  std::vector<Vec> out(values_.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = a * values_[j];
  return HistorySegment(tau_, std::move(out));
}

double sup_distance(const HistorySegment& a, const HistorySegment& b) {
  if (!a.same_grid(b)) throw ValidationError("sup_distance: grids differ");
  double m = 0.0;
  for (int j = 0; j <= a.intervals(); ++j) m = std::max(m, (a.value(j) - b.value(j)).norm());
  return m;
}

}  // namespace memdyn
