#pragma once

// Memory kernels and a mode-truncated Galerkin model with fading memory
//
//     du/dt + nu A u + int_0^inf mu(s) A eta(s) ds + B(u, u) = F,
//
// with A = diag(lambda_k) and eta^t(s) = int_0^s u(t - sigma) dsigma (zero
// past history).  The memory term equals A int_0^t kappa(sigma) u(t - sigma)
// dsigma with kappa(s) = int_s^inf mu, which is what the integrator uses.

#include "memdyn/core.hpp"

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace memdyn {

struct MemoryKernel {
  std::string family;  // exponential | piecewise_constant | tabulated
  std::map<std::string, double> params;
  std::function<double(double)> mu;
  std::function<double(double)> kappa;       // int_s^inf mu
  std::function<double(double)> kappa_tail;  // int_s^inf kappa
  double kappa0 = 0;    // kappa(0) = |mu|_{L1}
  double beta_nec = 0;  // smallest beta with kappa <= beta mu
  double K = 1;         // decay constants mu(s + r) <= K e^{-delta r} mu(s)
  double delta = 0;     // (NaN for tabulated kernels)
  double s_max = 0;     // kappa(s_max) <= 1e-10 kappa0
  std::vector<double> knots;  // points where mu is not smooth
};

MemoryKernel kernel_exponential(double mu0, double delta);
MemoryKernel kernel_piecewise(double mu0, double t_star);
/// Piecewise-linear mu through (grid, values), zero past the last node.
MemoryKernel kernel_tabulated(std::vector<double> grid, std::vector<double> values);

/// Uniform grid on [0, 2 s_max] (piecewise kernels get t* and its neighbours).
std::vector<double> kernel_grid(const MemoryKernel& k, int points = 401);

struct KernelCheck {
  bool holds;
  double max_defect;
  double witness_s;
  double witness_sigma;  // unused by check_nec
};

/// max over grid pairs of mu(s + r) - K e^{-delta r} mu(s).
KernelCheck check_decay_condition(const MemoryKernel& k, double K, double delta,
                                  const std::vector<double>& grid);

/// max over the grid of kappa(s) - beta mu(s) and kappa(s) - kappa0 e^{-s/beta}.
KernelCheck check_nec(const MemoryKernel& k, double beta, const std::vector<double>& grid);

/// Verifies kappa(s) = int_s^inf mu on the grid by independent quadrature.
double kernel_quadrature_residual(const MemoryKernel& k, const std::vector<double>& grid);

class GalerkinMemorySystem {
 public:
  /// c is m^3 entries, c(i,j,k) = c[(i*m + j)*m + k], with c(i,j,k) = -c(i,k,j).
  GalerkinMemorySystem(Vec lambda, double nu, Vec F, std::vector<double> c,
                       MemoryKernel kernel);

  int modes() const { return static_cast<int>(lambda_.size()); }
  const Vec& lambda() const { return lambda_; }
  double nu() const { return nu_; }
  const Vec& forcing() const { return F_; }
  const MemoryKernel& kernel() const { return kernel_; }
  double c(int i, int j, int k) const { return c_[(i * modes() + j) * modes() + k]; }

  /// (B(u,u))_i = sum_{j,k} c(j,i,k) u_j u_k
  Vec bilinear(const Vec& u) const;
  /// |F|^2_{V'} = sum F_k^2/lambda_k
  double forcing_dual_sq() const;

 private:
  Vec lambda_;
  double nu_;
  Vec F_;
  std::vector<double> c_;
  MemoryKernel kernel_;
};

/// Random structure constants with c(i,j,k) = -c(i,k,j), entries in [-scale, scale].
std::vector<double> random_structure_constants(int m, double scale, std::mt19937_64& rng);

struct MemoryTrajectory {
  double h = 0;
  std::vector<double> times;
  std::vector<Vec> states;
};

/// RK4 with the convolution term frozen at the start of each step.
MemoryTrajectory integrate_memory(const GalerkinMemorySystem& sys, const Vec& u0, double T,
                                  double h, double blowup_threshold = 1e12);

struct MemoryDiagnostics {
  std::vector<double> t;
  std::vector<double> u_sq;
  std::vector<double> grad_sq;
  std::vector<double> eta_sq;
  std::vector<double> gamma1;
  std::vector<double> t_eta_sq;
  std::vector<double> tail;
};

/// All series at every `stride`-th node of the trajectory.
MemoryDiagnostics memory_diagnostics(const MemoryTrajectory& traj, const MemoryKernel& k,
                                     const Vec& lambda, int stride = 1, int threads = 1);

/// max over interior nodes of d(u_sq + eta_sq)/dt + nu grad_sq - |F|^2_{V'}/nu.
double check_energy_inequality(const MemoryDiagnostics& d, double nu, const Vec& F,
                               const Vec& lambda);

/// Default tolerance for the two differential inequalities: 10 h E_peak nu.
double inequality_tolerance(const MemoryDiagnostics& d, double h, double nu);

/// max over interior nodes of dGamma/dt + (Gamma + beta eta_sq)/(4 beta)
/// - 2 beta^2 |mu|_{L1} grad_sq.  beta must satisfy check_nec.
double check_gamma_inequality(const MemoryDiagnostics& d, const MemoryKernel& k, double beta);

struct AbsorbingCheck {
  double Lambda;
  double gamma_rate;
  std::vector<double> bound_series;
  double max_ratio;  // max (u_sq + eta_sq) / bound
  bool violated;
};

AbsorbingCheck check_absorbing_bound(const MemoryDiagnostics& d, const MemoryKernel& k,
                                     double nu, double lambda1, double forcing_dual_sq,
                                     double x0_norm_sq, double C_fit = 100.0);

/// max_t (t_eta_sq + tail)(t) / max_{s<=t} grad_sq(s) over nodes where the
/// denominator is positive.
double tail_constant(const MemoryDiagnostics& d);

}  // namespace memdyn
