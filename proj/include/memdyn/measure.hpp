#pragma once

// Time averages, empirical invariant measures and invariance diagnostics
// for the semigroup generated by a neutral system.
//
// The long-time limit of (1/T) int_0^T phi(S(t) x0) dt is realized as the
// ordinary Cesaro limit.  running_average + cauchy_test report whether that
// limit has actually converged on the computed horizon; when it has not,
// callers should report the horizon average as such, not as a limit.

#include "memdyn/certify.hpp"
#include "memdyn/core.hpp"
#include "memdyn/history.hpp"
#include "memdyn/ndde.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace memdyn {

struct Observable {
  std::string label;
  std::function<double(const HistorySegment&)> map;
  /// Caller's statement that the map is bounded; not verified.
  bool bounded_hint = false;
};

namespace observables {
Observable constant(double c);
/// x(0)_i
Observable now(int component);
/// x(0)_i^2
Observable now_squared(int component);
/// x(-tau)_i
Observable delayed(int component);
/// |x_t|_inf
Observable sup_norm();
}  // namespace observables

double time_average(const Trajectory& traj, const Observable& obs, double burn_in);

struct RunningPoint {
  double T;  // elapsed time since the start of averaging
  double average;
};

/// Cumulative trapezoid averages A_T at every grid node after burn_in.
/// The first point (T = 0) carries the observable's value there.
std::vector<RunningPoint> running_average(const Trajectory& traj, const Observable& obs,
                                          double burn_in = 0.0);

struct CauchyResult {
  bool converged;
  double deviation;  // max |A_T' - A_T| over T' in [T/10, T]
  double limit;      // A_T at the final horizon
};

CauchyResult cauchy_test(const std::vector<RunningPoint>& series, double tol = 1e-6);

struct EmpiricalMeasure {
  std::vector<HistorySegment> snapshots;
  std::vector<double> weights;
  double burn_in = 0;
  double stride = 0;
  std::string source;
};

/// Snapshots S(t_j) phi at t_j = burn_in + j*stride <= T, j >= 1, with
/// uniform weights.
EmpiricalMeasure empirical_measure(const NddeSystem& sys, const HistorySegment& phi,
                                   double T, double h, double burn_in, double stride);

double expect(const EmpiricalMeasure& mu, const Observable& obs);

struct InvarianceReport {
  double t_star;
  std::vector<std::pair<std::string, double>> defects;
  double max_defect;
};

/// |E_mu[obs] - E_mu[obs o S(t_star)]| per observable.  With chain > 1 each
/// snapshot is advanced by `chain` successive steps of t_star/chain.
InvarianceReport invariance_defect(const EmpiricalMeasure& mu, const NddeSystem& sys,
                                   double t_star, double h,
                                   const std::vector<Observable>& suite, int chain = 1);

/// Draws an initial history from the stream seeded for one ensemble member.
using HistorySampler = std::function<HistorySegment(std::mt19937_64&)>;

struct EnsembleResult {
  double mean;
  double stderr_;
  std::vector<double> members;
};

/// Mean over n_traj members of the post-burn-in time average.  Member i
/// uses a generator seeded from (seed, i); members run on `threads`
/// workers and are reduced in index order.
EnsembleResult ensemble_average(const NddeSystem& sys, const HistorySampler& sampler,
                                int n_traj, double T, double h, const Observable& obs,
                                double burn_in, std::uint64_t seed, int threads = 1);

/// Per-member seed derivation used by ensemble_average.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// sup_{x in E} inf_{y in F} |x - y|_inf.
double hausdorff_semidistance(const std::vector<HistorySegment>& E,
                              const std::vector<HistorySegment>& F);

/// max(absorption_time, 20/|r_A0|) rounded up to a whole number of delays.
double default_burn_in(const DissipativityCertificate& cert, double phi_norm,
                       double r_a0);

/// Smooth random history: offset + amplitude*sin(frequency*theta + phase)
/// per component, scaled so that |phi|_inf equals `sup_norm`.
HistorySegment random_smooth_history(std::mt19937_64& rng, int dim, double tau,
                                     int intervals, double sup_norm);

}  // namespace memdyn
