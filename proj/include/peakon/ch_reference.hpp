#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace peakon {

/// Camassa-Holm peakon state; unlike the mCH ensemble the amplitudes evolve.
struct CHState {
  std::vector<double> positions;
  std::vector<double> amplitudes;

  std::size_t size() const { return positions.size(); }
};

struct CHRates {
  std::vector<double> dx;
  std::vector<double> dp;
};

/// dx_i = sum_j p_j e^{-|x_i - x_j|}, dp_i = sum_j p_i p_j sgn(x_i - x_j) e^{-|x_i - x_j|}.
/// The dp terms are accumulated pairwise with opposite signs so sum_i dp_i cancels.
CHRates ch_rhs(const CHState& state);

/// H0 = 1/2 sum_{i,j} p_i p_j e^{-|x_i - x_j|}.
double ch_hamiltonian(const CHState& state);

struct CHTrajectory {
  std::vector<double> times;
  std::vector<CHState> states;
  double dt = 0.0;
  /// max_t |H0(t) - H0(0)| / |H0(0)|.
  double h0_drift = 0.0;
  /// max_t |sum p(t) - sum p(0)|.
  double momentum_drift = 0.0;
};

/// Fixed-step RK4. Throws NumericalAbort when the relative H0 drift exceeds 1e-6 or,
/// for all-positive amplitudes, when neighboring peakons collide.
CHTrajectory integrate_ch(const CHState& state0, double dt, double t_end, std::size_t store_every = 1);

/// CSV with header t,x1..xN,p1..pN.
void write_ch_csv(std::ostream& os, const CHTrajectory& traj);

/// {"H0_drift": ..., "momentum_drift": ...}
std::string ch_drift_json(const CHTrajectory& traj);

}  // namespace peakon
