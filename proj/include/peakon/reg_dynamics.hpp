#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakon/ensemble.hpp"
#include "peakon/kernels.hpp"
#include "peakon/test_function.hpp"

namespace peakon {

struct RegDynConfig {
  Mollifier moll{0.05};
  /// Fixed step; empty means min(eps / 20, 1e-3).
  std::optional<double> dt;
  double t_end = 1.0;
  std::size_t store_every = 1;
  /// Abort as soon as a neighbor gap is no longer positive and finite.
  bool gap_floor_check = true;
  /// Use the embedded Dormand-Prince 5(4) pair instead of fixed-step RK4.
  bool adaptive = false;
  double rtol = 1e-8;

  double resolved_dt() const;
};

/// dx_i/dt = (rho_eps * U_eps)(x_i) with U_eps = 4 (sum_j p_j f2(. - x_j)) (sum_j p_j f1(. - x_j)),
/// by Gauss-Hermite quadrature. Node values are computed in parallel (OpenMP) and reduced
/// serially in a fixed order, so the result is bitwise identical to velocity_field_serial.
/// Throws std::invalid_argument for unordered positions and NumericalAbort for
/// non-finite quadrature values.
std::vector<double> velocity_field(const PeakonEnsemble& ens, const Mollifier& moll);

/// Single-threaded reference implementation of velocity_field.
std::vector<double> velocity_field_serial(const PeakonEnsemble& ens, const Mollifier& moll);

/// Right-hand side in gap coordinates y = (x_1, S_1, ..., S_{N-1}), S_k = x_{k+1} - x_k.
/// dS_k/dt is assembled from increments of f1/f2 across the gap, so it keeps full
/// relative precision when S_k is many orders of magnitude below eps.
void regularized_gap_rhs(std::span<const double> amplitudes, std::span<const double> state,
                         const Mollifier& moll, std::span<double> rates, bool parallel = true);

/// C_eps = M0^2 (C0 / eps + 1): rate in the lower bound gap(t) >= gap(0) e^{-C_eps t}.
double gap_decay_rate(double total_variation_mass, const Mollifier& moll);

/// Integrate the regularized system on [0, t_end]. Stores positions and gaps every
/// store_every steps and at t_end. meta.extra records the integrator, the largest
/// particle speed seen and the smallest gap.
Trajectory integrate_regularized(const PeakonEnsemble& ens0, const RegDynConfig& cfg);

struct ConsistencyResult {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// E = sum_i p_i int dt int rho_eps(z) { [phi_t(x_i + z) - phi_t(x_i)]
///                                     + U_eps(x_i + z) [phi_x(x_i + z) - phi_x(x_i)] } dz
/// along a regularized trajectory; time integration by composite Simpson on the stored times.
ConsistencyResult consistency_error(const Trajectory& traj, std::span<const double> amplitudes,
                                    const TestFunction& phi, const Mollifier& moll);

}  // namespace peakon
