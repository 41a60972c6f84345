#pragma once

// Lossless transmission line on [0, 1] reduced to its traveling waves
//
//     V = (phi(t - x/c) + psi(t + x/c)) / 2,
//     I = sqrt(C/L) (phi(t - x/c) - psi(t + x/c)) / 2,
//
// with psi~(t) = psi(t + tau).  Under the resistive boundary
// V(0,t) + R0 I(0,t) = E, I(1,t) = 0 the pair x = (phi, psi~) solves
// x(t) = B x(t - tau) + f; under the differentiated boundary it solves
// d/dt (x(t) - B x(t - tau)) = f.

#include "memdyn/difference.hpp"
#include "memdyn/history.hpp"
#include "memdyn/ndde.hpp"

#include <functional>
#include <utility>

namespace memdyn {

enum class LineBoundary { Static, Dynamic };

struct TelegraphLine {
  TelegraphLine(double L, double C, double R0, double E,
                LineBoundary boundary = LineBoundary::Static);

  double tau() const;        // sqrt(LC)
  double speed() const;      // 1/sqrt(LC)
  double impedance() const;  // sqrt(L/C)
  double r() const;          // R0 sqrt(C/L)

  double L, C, R0, E;
  LineBoundary boundary;
};

using LineProfile = std::function<double(double)>;

struct WaveHistories {
  HistorySegment phi;
  HistorySegment psi_tilde;
};

/// phi(theta) = V0(-c theta) + z I0(-c theta), psi~(theta) = V0(c theta + 1)
/// - z I0(c theta + 1) on `intervals` steps of [-tau, 0].
WaveHistories decompose(const LineProfile& V0, const LineProfile& I0, const TelegraphLine& line,
                        int intervals);

/// The two scalar waves stacked into the state (phi, psi~).
HistorySegment wave_state(const WaveHistories& w);

Mat line_matrix(const TelegraphLine& line);
Vec line_forcing(const TelegraphLine& line);

DifferenceSystem boundary_to_difference(const TelegraphLine& line);

/// g(u, v) = f for every (u, v).
NddeSystem boundary_to_ndde(const TelegraphLine& line);

/// V(0,0) + R0 I(0,0) of the initial data: the constant K in
/// V(0,t) + R0 I(0,t) = E t + K obtained by integrating the dynamic boundary.
double dynamic_boundary_constant(const LineProfile& V0, const LineProfile& I0,
                                 const TelegraphLine& line);

/// (V, I) at (x, t) from a trajectory of (phi, psi~).
std::pair<double, double> reconstruct(const Trajectory& waves, const TelegraphLine& line,
                                      double x, double t);

struct FieldSample {
  double t, x, V, I;
};

/// Fields on nt x nx uniform nodes of [t0, t1] x [0, 1].
std::vector<FieldSample> field_grid(const Trajectory& waves, const TelegraphLine& line,
                                    double t0, double t1, int nt, int nx);

struct CrossValidation {
  double boundary_residual;        // both boundary conditions on grid times t > 0
  double characteristic_residual;  // V + zI along x - ct, V - zI along x + ct
  double compatibility_defect;
  double jump_at_zero;             // |x(0+) - x(0)|
  double settle_deviation;         // max |V - E| + |I| for t >= 2 tau
  double max_discrepancy;          // max of the first two
};

CrossValidation cross_validate(const LineProfile& V0, const LineProfile& I0,
                               const TelegraphLine& line, double T, int intervals);

}  // namespace memdyn
