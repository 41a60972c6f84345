#include "memdyn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

namespace memdyn {

namespace observables {

Observable constant(double c) {
  return {"const", [c](const HistorySegment&) { return c; }, true};
}

Observable now(int i) {
  return {"x(0)_" + std::to_string(i + 1),
          [i](const HistorySegment& s) { return s.values().back()(i); }, false};
}

Observable now_squared(int i) {
  return {"x(0)_" + std::to_string(i + 1) + "^2",
          [i](const HistorySegment& s) {
            const double x = s.values().back()(i);
            return x * x;
          },
          false};
}

Observable delayed(int i) {
  return {"x(-tau)_" + std::to_string(i + 1),
          [i](const HistorySegment& s) { return s.values().front()(i); }, false};
}

Observable sup_norm() {
  return {"|x_t|_inf", [](const HistorySegment& s) { return s.sup_norm(); }, false};
}

}  // namespace observables

namespace {

std::size_t first_index(const Trajectory& traj, double burn_in) {
  if (burn_in < 0.0) throw ValidationError("burn_in must be nonnegative");
  const double x = burn_in / traj.dt;
  const auto k = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return traj.lag + k;
}

double observe(const Trajectory& traj, const Observable& obs, std::size_t idx) {
  const double v = obs.map(traj.segment_at(idx));
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "observable '" << obs.label << "' is not finite at t=" << traj.times[idx];
    throw IntegrationError(os.str(), traj.times[idx]);
  }
  return v;
}

}  // namespace

double time_average(const Trajectory& traj, const Observable& obs, double burn_in) {
  const std::size_t start = first_index(traj, burn_in);
  if (start + 1 >= traj.size()) {
    throw ValidationError("time_average: burn_in must be below the trajectory horizon");
  }
  double integral = 0.0;
  double prev = observe(traj, obs, start);
  for (std::size_t j = start + 1; j < traj.size(); ++j) {
    const double cur = observe(traj, obs, j);
    integral += 0.5 * (prev + cur);
    prev = cur;
  }
  const double steps = static_cast<double>(traj.size() - 1 - start);
  return integral / steps;
}

std::vector<RunningPoint> running_average(const Trajectory& traj, const Observable& obs,
                                          double burn_in) {
  const std::size_t start = first_index(traj, burn_in);
  if (start + 1 >= traj.size()) {
    throw ValidationError("running_average: burn_in must be below the trajectory horizon");
  }
  std::vector<RunningPoint> out;
  out.reserve(traj.size() - start);
  double prev = observe(traj, obs, start);
  out.push_back({0.0, prev});
  double integral = 0.0;
  for (std::size_t j = start + 1; j < traj.size(); ++j) {
    const double cur = observe(traj, obs, j);
    integral += 0.5 * (prev + cur);
    prev = cur;
    const double steps = static_cast<double>(j - start);
    out.push_back({steps * traj.dt, integral / steps});
  }
  return out;
}

CauchyResult cauchy_test(const std::vector<RunningPoint>& series, double tol) {
  if (series.empty()) throw ValidationError("cauchy_test: empty series");
  const double T = series.back().T;
  const double limit = series.back().average;
  double dev = 0.0;
  for (const auto& p : series) {
    if (p.T >= 0.1 * T) dev = std::max(dev, std::abs(p.average - limit));
  }
  return {dev <= tol, dev, limit};
}

EmpiricalMeasure empirical_measure(const NddeSystem& sys, const HistorySegment& phi,
                                   double T, double h, double burn_in, double stride) {
  if (!(stride > 0.0)) throw ValidationError("empirical_measure: stride must be positive");
  if (!(burn_in >= 0.0)) throw ValidationError("empirical_measure: burn_in must be nonnegative");
  if (burn_in + stride > T * (1.0 + 1e-12)) {
    throw ValidationError("empirical_measure: burn_in + stride must not exceed T");
  }
  const Trajectory tr = integrate(sys, phi, T, h);
  EmpiricalMeasure mu;
  mu.burn_in = burn_in;
  mu.stride = stride;
  mu.source = sys.label + " from |phi|=" + std::to_string(phi.sup_norm());
  const double slack = 1e-9 * std::max(1.0, T);
  for (int j = 1;; ++j) {
    const double t = burn_in + j * stride;
    if (t > T + slack) break;
    mu.snapshots.push_back(tr.segment(std::min(t, tr.horizon())));
  }
  const double w = 1.0 / static_cast<double>(mu.snapshots.size());
  mu.weights.assign(mu.snapshots.size(), w);
  return mu;
}

double expect(const EmpiricalMeasure& mu, const Observable& obs) {
  if (mu.snapshots.empty()) throw ValidationError("expect: empty measure");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.snapshots.size(); ++i) {
    const double v = obs.map(mu.snapshots[i]);
    if (!std::isfinite(v)) {
      throw IntegrationError("expect: observable '" + obs.label + "' is not finite at snapshot " +
                                 std::to_string(i),
                             std::numeric_limits<double>::quiet_NaN());
    }
    acc += mu.weights[i] * v;
  }
  return acc;
}

InvarianceReport invariance_defect(const EmpiricalMeasure& mu, const NddeSystem& sys,
                                   double t_star, double h,
                                   const std::vector<Observable>& suite, int chain) {
  if (!(t_star > 0.0)) throw ValidationError("invariance_defect: t_star must be positive");
  if (chain < 1) throw ValidationError("invariance_defect: chain must be at least 1");
  EmpiricalMeasure moved = mu;
  for (auto& s : moved.snapshots) {
    for (int c = 0; c < chain; ++c) s = semigroup(sys, s, t_star / chain, h);
  }
  InvarianceReport rep{t_star, {}, 0.0};
  for (const auto& obs : suite) {
    const double d = std::abs(expect(mu, obs) - expect(moved, obs));
    rep.defects.emplace_back(obs.label, d);
    rep.max_defect = std::max(rep.max_defect, d);
  }
  return rep;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over a combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

EnsembleResult ensemble_average(const NddeSystem& sys, const HistorySampler& sampler,
                                int n_traj, double T, double h, const Observable& obs,
                                double burn_in, std::uint64_t seed, int threads) {
  if (n_traj < 1) throw ValidationError("ensemble_average: n_traj must be at least 1");
  threads = std::clamp(threads, 1, n_traj);
  std::vector<double> member(n_traj, 0.0);
  std::vector<std::exception_ptr> failure(n_traj);

  auto run_member = [&](int i) {
    try {
      std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
      const HistorySegment phi = sampler(rng);
      const Trajectory tr = integrate(sys, phi, T, h);
      member[i] = time_average(tr, obs, burn_in);
    } catch (...) {
      failure[i] = std::current_exception();
    }
  };

  if (threads == 1) {
    for (int i = 0; i < n_traj; ++i) run_member(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n_traj; i += threads) run_member(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (int i = 0; i < n_traj; ++i) {
    if (!failure[i]) continue;
    try {
      std::rethrow_exception(failure[i]);
    } catch (const BlowupError& e) {
      throw BlowupError("ensemble member " + std::to_string(i) + ": " + e.what(), e.time());
    } catch (const IntegrationError& e) {
      throw IntegrationError("ensemble member " + std::to_string(i) + ": " + e.what(),
                             e.time());
    }
  }

  double mean = 0.0;
  for (double v : member) mean += v;
  mean /= n_traj;
  double var = 0.0;
  for (double v : member) var += (v - mean) * (v - mean);
  const double se = n_traj > 1 ? std::sqrt(var / (n_traj - 1) / n_traj) : 0.0;
  return {mean, se, std::move(member)};
}

double hausdorff_semidistance(const std::vector<HistorySegment>& E,
                              const std::vector<HistorySegment>& F) {
  if (E.empty() || F.empty()) throw ValidationError("hausdorff_semidistance: empty set");
  double sup = 0.0;
  for (const auto& x : E) {
    double inf = std::numeric_limits<double>::infinity();
    for (const auto& y : F) inf = std::min(inf, sup_distance(x, y));
    sup = std::max(sup, inf);
  }
  return sup;
}

double default_burn_in(const DissipativityCertificate& cert, double phi_norm, double r_a0) {
  double t = absorption_time(cert, phi_norm);
  if (std::isfinite(r_a0) && r_a0 < 0.0) t = std::max(t, 20.0 / -r_a0);
  const double k = std::ceil(t / cert.tau - 1e-12);
  return std::max(k, 0.0) * cert.tau;
}

HistorySegment random_smooth_history(std::mt19937_64& rng, int dim, double tau,
                                     int intervals, double sup_norm) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  std::vector<double> offset(dim), amp(dim), omega(dim), phase(dim);
  for (int i = 0; i < dim; ++i) {
    offset[i] = unit(rng);
    amp[i] = unit(rng);
    omega[i] = freq(rng) * std::numbers::pi / tau;
    phase[i] = unit(rng) * std::numbers::pi;
  }
  HistorySegment raw = HistorySegment::from_function(
      [&](double th) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = offset[i] + amp[i] * std::sin(omega[i] * th + phase[i]);
        return v;
      },
      tau, intervals, dim);
  const double n = raw.sup_norm();
  if (n == 0.0) return raw;
  return raw * (sup_norm / n);
}

}  // namespace memdyn
