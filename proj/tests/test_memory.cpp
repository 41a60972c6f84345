#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "memdyn/memory.hpp"

#include <cmath>
#include <random>

using namespace memdyn;

namespace {

Vec squares(int m) {
  Vec l(m);
  for (int k = 0; k < m; ++k) l(k) = (k + 1.0) * (k + 1.0);
  return l;
}

MemoryKernel zero_kernel() { return kernel_tabulated({0.0, 1.0}, {0.0, 0.0}); }

GalerkinMemorySystem system_with(const MemoryKernel& k, int m, std::uint64_t seed,
                                 double scale, Vec F = Vec()) {
  std::mt19937_64 rng(seed);
  if (F.size() == 0) F = Vec::Zero(m);
  return GalerkinMemorySystem(squares(m), 1.0, F, random_structure_constants(m, scale, rng), k);
}

MemoryTrajectory constant_trajectory(const Vec& c, double T, double h) {
  MemoryTrajectory tr;
  tr.h = h;
  const auto N = static_cast<std::size_t>(std::lround(T / h));
  for (std::size_t n = 0; n <= N; ++n) {
    tr.times.push_back(n * h);
    tr.states.push_back(c);
  }
  return tr;
}

}  // namespace

TEST_CASE("kernel constructors") {
  const auto e = kernel_exponential(1.0, 2.0);
  CHECK(e.kappa0 == doctest::Approx(0.5));
  CHECK(e.kappa(0.3) == doctest::Approx(0.5 * std::exp(-0.6)));
  CHECK(e.beta_nec == doctest::Approx(0.5));

  const auto p = kernel_piecewise(1.0, 2.0);
  CHECK(p.kappa0 == doctest::Approx(2.0));
  CHECK(p.kappa(1.0) == doctest::Approx(1.0));
  CHECK(p.kappa(2.5) == 0.0);
  CHECK(p.mu(2.5) == 0.0);

  CHECK_THROWS_AS(kernel_exponential(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(kernel_piecewise(1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(kernel_tabulated({0.0, 1.0, 2.0}, {1.0, 0.5, 0.7}), ValidationError);
  CHECK_THROWS_AS(kernel_tabulated({0.5, 1.0}, {1.0, 0.5}), ValidationError);

  const auto t = kernel_tabulated({0.0, 1.0, 3.0}, {2.0, 1.0, 0.0});
  CHECK(t.kappa0 == doctest::Approx(1.5 + 1.0));
  CHECK(t.kappa(2.0) == doctest::Approx(0.25));
  CHECK(std::isnan(t.K));
  CHECK(std::isnan(t.delta));
}

TEST_CASE("kappa is the right tail of mu") {
  for (const auto& k : {kernel_exponential(1.0, 2.0), kernel_piecewise(3.0, 1.5),
                        kernel_tabulated({0.0, 0.5, 2.0, 4.0}, {1.0, 0.8, 0.2, 0.0})}) {
    const auto g = kernel_grid(k);
    CHECK(kernel_quadrature_residual(k, g) <= 1e-8 * k.kappa0);
    for (std::size_t i = 1; i < g.size(); ++i) {
      CHECK(k.mu(g[i]) <= k.mu(g[i - 1]));
      CHECK(k.mu(g[i]) >= 0.0);
    }
    CHECK(k.kappa(k.s_max) <= 1e-10 * k.kappa0);
  }
}

TEST_CASE("decay condition examples") {
  const auto e = kernel_exponential(1.0, 2.0);
  const auto r1 = check_decay_condition(e, 1.0, 2.0, kernel_grid(e));
  CHECK(r1.holds);
  CHECK(r1.max_defect <= 1e-12);

  const auto p = kernel_piecewise(1.0, 2.0);
  const auto g = kernel_grid(p);
  for (double delta : {0.1, 0.5, 3.0}) {
    CHECK(check_decay_condition(p, std::exp(delta * 2.0), delta, g).holds);
    const auto bad = check_decay_condition(p, 1.0, delta, g);
    CHECK_FALSE(bad.holds);
    CHECK(bad.witness_s < 2.0);
    CHECK(bad.witness_s + bad.witness_sigma >= 2.0);
  }
  CHECK_THROWS_AS(check_decay_condition(p, 0.5, 1.0, g), ValidationError);
}

TEST_CASE("NEC examples") {
  const auto e = kernel_exponential(1.0, 2.0);
  const auto r = check_nec(e, 0.5, kernel_grid(e));
  CHECK(r.holds);
  CHECK(r.max_defect <= 1e-12);

  const auto p = kernel_piecewise(1.0, 2.0);
  CHECK(check_nec(p, 2.0, kernel_grid(p)).holds);
  const auto bad = check_nec(p, 1.0, kernel_grid(p));
  CHECK_FALSE(bad.holds);
  CHECK(bad.witness_s == 0.0);
  CHECK_FALSE(check_nec(e, 0.25, kernel_grid(e)).holds);
}

TEST_CASE("antisymmetry is validated") {
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 0) * 2 + 1] = 1.0;  // c(0,0,1) without c(0,1,0) = -1
  CHECK_THROWS_AS(GalerkinMemorySystem(squares(2), 1.0, Vec::Zero(2), c, zero_kernel()),
                  ValidationError);
  c[(0 * 2 + 1) * 2 + 0] = -1.0;
  CHECK_NOTHROW(GalerkinMemorySystem(squares(2), 1.0, Vec::Zero(2), c, zero_kernel()));
  Vec bad(2);
  bad << 2.0, 1.0;
  CHECK_THROWS_AS(GalerkinMemorySystem(bad, 1.0, Vec::Zero(2), c, zero_kernel()), ValidationError);
}

TEST_CASE("nonlinearity is energy neutral") {
  const auto sys = system_with(zero_kernel(), 6, 3, 1.0);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 100; ++trial) {
    Vec u(6);
    for (int i = 0; i < 6; ++i) u(i) = n01(rng);
    CHECK(std::abs(sys.bilinear(u).dot(u)) <= 1e-12 * u.squaredNorm() * u.norm());
  }
}

TEST_CASE("zero data stays at zero") {
  const auto sys = system_with(kernel_exponential(1.0, 1.0), 3, 1, 1.0);
  const auto tr = integrate_memory(sys, Vec::Zero(3), 2.0, 0.01);
  for (const auto& u : tr.states) CHECK(u.norm() == 0.0);
  const auto d = memory_diagnostics(tr, sys.kernel(), sys.lambda());
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    CHECK(d.u_sq[i] == 0.0);
    CHECK(d.eta_sq[i] == 0.0);
    CHECK(d.gamma1[i] == 0.0);
    CHECK(d.t_eta_sq[i] == 0.0);
    CHECK(d.tail[i] == 0.0);
  }
  CHECK(check_energy_inequality(d, 1.0, Vec::Zero(3), sys.lambda()) == 0.0);
  CHECK(check_gamma_inequality(d, sys.kernel(), 1.0) == 0.0);
  const auto a = check_absorbing_bound(d, sys.kernel(), 1.0, 1.0, 0.0, 0.0);
  CHECK_FALSE(a.violated);
}

TEST_CASE("memoryless scalar mode decays exponentially") {
  const GalerkinMemorySystem sys(Vec::Ones(1), 1.0, Vec::Zero(1), {0.0}, zero_kernel());
  const auto tr = integrate_memory(sys, Vec::Ones(1), 3.0, 1e-3);
  double err = 0.0;
  for (std::size_t n = 0; n < tr.states.size(); ++n) {
    err = std::max(err, std::abs(tr.states[n](0) - std::exp(-tr.times[n])));
  }
  CHECK(err <= 1e-8);
}

TEST_CASE("diagnostics vanish at t = 0 and match the closed form for constant u") {
  Vec c(2);
  c << 1.0, -0.5;
  const Vec lambda = squares(2);
  const auto k = kernel_exponential(1.0, 1.0);
  const auto d = memory_diagnostics(constant_trajectory(c, 0.5, 1e-4), k, lambda);
  CHECK(d.eta_sq.front() == 0.0);
  CHECK(d.gamma1.front() == 0.0);
  CHECK(d.t_eta_sq.front() == 0.0);
  CHECK(d.tail.front() == 0.0);
  const double wc = (lambda.array() * c.array().square()).sum();
  CHECK(d.t.back() == doctest::Approx(0.5));
  CHECK(d.eta_sq.back() == doctest::Approx(0.18040802086209973 * wc).epsilon(1e-6));
  // t_eta_sq = int_0^t mu |c|^2 = (1 - e^{-t}) |c|^2
  CHECK(d.t_eta_sq.back() == doctest::Approx((1.0 - std::exp(-0.5)) * wc).epsilon(1e-6));
}

TEST_CASE("decaying run satisfies the differential inequalities") {
  for (const auto& k : {kernel_exponential(1.0, 1.0), kernel_piecewise(1.0, 1.0)}) {
    const GalerkinMemorySystem sys(Vec::Ones(1), 1.0, Vec::Zero(1), {0.0}, k);
    const double h = 1e-3;
    const auto tr = integrate_memory(sys, Vec::Ones(1), 5.0, h);
    const auto d = memory_diagnostics(tr, k, sys.lambda());
    const double tol = inequality_tolerance(d, h, 1.0);
    CHECK(check_energy_inequality(d, 1.0, Vec::Zero(1), sys.lambda()) <= tol);
    CHECK(check_gamma_inequality(d, k, k.beta_nec) <= tol);
    for (std::size_t i = 1; i < d.t.size(); ++i) {
      CHECK(d.u_sq[i] + d.eta_sq[i] <= d.u_sq[i - 1] + d.eta_sq[i - 1] + tol * h);
      CHECK(d.gamma1[i] <= k.beta_nec * d.eta_sq[i] * (1 + 1e-9) + 1e-15);
    }
    CHECK_THROWS_AS(check_gamma_inequality(d, k, 0.5 * k.beta_nec), ValidationError);
  }
}

TEST_CASE("nonlinear forced run") {
  Vec F(4);
  F << 1.0, 0.5, 0.0, -0.3;
  const auto k = kernel_exponential(2.0, 1.5);
  const auto sys = system_with(k, 4, 11, 0.5, F);
  Vec u0(4);
  u0 << 1.0, -1.0, 0.5, 0.2;
  const double h = 1e-3;
  const auto tr = integrate_memory(sys, u0, 4.0, h);
  const auto d = memory_diagnostics(tr, k, sys.lambda(), 1, 4);
  const double tol = inequality_tolerance(d, h, 1.0);
  CHECK(check_energy_inequality(d, 1.0, F, sys.lambda()) <= tol);
  CHECK(check_gamma_inequality(d, k, k.beta_nec) <= tol);
  const auto serial = memory_diagnostics(tr, k, sys.lambda(), 1, 1);
  CHECK(serial.eta_sq == d.eta_sq);
  CHECK(serial.tail == d.tail);
}

TEST_CASE("corrupted energy is flagged") {
  const auto k = kernel_exponential(1.0, 1.0);
  const GalerkinMemorySystem sys(Vec::Ones(1), 1.0, Vec::Zero(1), {0.0}, k);
  const double h = 1e-3;
  auto d = memory_diagnostics(integrate_memory(sys, Vec::Ones(1), 1.0, h), k, sys.lambda());
  const double tol = inequality_tolerance(d, h, 1.0);
  d.u_sq[d.t.size() / 2] *= 2.0;
  CHECK(check_energy_inequality(d, 1.0, Vec::Zero(1), sys.lambda()) > tol);
  MemoryDiagnostics tiny;
  tiny.t = {0.0, 1.0};
  tiny.u_sq = tiny.eta_sq = tiny.grad_sq = {0.0, 0.0};
  CHECK_THROWS_AS(check_energy_inequality(tiny, 1.0, Vec::Zero(1), Vec::Ones(1)), ValidationError);
}

TEST_CASE("absorbing bound constants") {
  const auto k = kernel_exponential(1.0, 1.0);
  const GalerkinMemorySystem sys(Vec::Ones(1), 1.0, Vec::Zero(1), {0.0}, k);
  const auto d = memory_diagnostics(integrate_memory(sys, Vec::Ones(1), 10.0, 1e-2), k,
                                    sys.lambda());
  const auto a = check_absorbing_bound(d, k, 1.0, 1.0, 0.0, 1.0);
  CHECK(a.Lambda == doctest::Approx(2.25));
  CHECK(a.gamma_rate == doctest::Approx(1.0 / 9.0));
  CHECK_FALSE(a.violated);
  CHECK(a.max_ratio < 1.0);
  CHECK(a.bound_series.size() == d.t.size());
}

TEST_CASE("halving the step moves eta_sq by a second-order amount") {
  Vec c(1);
  c << 1.0;
  const auto k = kernel_exponential(1.0, 1.0);
  const double exact = 0.18040802086209973;
  const auto coarse = memory_diagnostics(constant_trajectory(c, 0.5, 1e-2), k, Vec::Ones(1));
  const auto fine = memory_diagnostics(constant_trajectory(c, 0.5, 5e-3), k, Vec::Ones(1));
  const double e1 = std::abs(coarse.eta_sq.back() - exact);
  const double e2 = std::abs(fine.eta_sq.back() - exact);
  // trapezoid bound h^2 t max|f''| / 12 with f = mu s^2, |f''| <= 2
  const double apriori = 1e-4 * 0.5 * 2.0 / 12.0;
  CHECK(std::abs(coarse.eta_sq.back() - fine.eta_sq.back()) <= 4.0 * apriori);
  CHECK(e2 < e1);
}

TEST_CASE("tail constant is positive and finite on a nontrivial run") {
  const auto k = kernel_exponential(1.0, 1.0);
  const auto sys = system_with(k, 3, 5, 0.3);
  Vec u0(3);
  u0 << 1.0, 0.5, -0.5;
  const auto d = memory_diagnostics(integrate_memory(sys, u0, 3.0, 1e-2), k, sys.lambda());
  const double C = tail_constant(d);
  CHECK(C > 0.0);
  CHECK(std::isfinite(C));
  for (std::size_t i = 0; i < d.t.size(); ++i) CHECK(d.tail[i] >= 0.0);
}
