#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peakon/ensemble.hpp"
#include "peakon/limit_dynamics.hpp"

namespace peakon {

/// Signed measure on [-L, L]: point masses plus a piecewise-constant density on a
/// uniform grid of density.size() bins covering [-L, L].
struct Measure1D {
  double L = 1.0;
  std::vector<std::pair<double, double>> atoms;  ///< (location, weight)
  std::vector<double> density;

  /// |m|(R) = sum |w| + sum |rho_k| * binwidth.
  double total_variation() const;
  double signed_mass() const;
  double bin_width() const { return density.empty() ? 0.0 : 2.0 * L / static_cast<double>(density.size()); }
  /// m([a, b)).
  double mass_of(double a, double b) const;
  /// Throws ConfigError for L <= 0, atoms outside [-L, L] or non-finite values.
  void validate() const;

  /// Parse {"L": ..., "atoms": [[loc, w], ...], "density": {"values": [...]}}.
  static Measure1D from_json_text(const std::string& text);
  static Measure1D load(const std::string& path);
  std::string to_json_text() const;
};

struct Discretization {
  PeakonEnsemble ensemble;
  double h = 0.0;
  /// All N cell centers and masses, including empty cells.
  std::vector<double> centers;
  std::vector<double> masses;
  /// Cell indices (0-based) that were dropped because their mass is zero.
  std::vector<std::size_t> dropped;
};

/// Cells [c_i - h/2, c_i + h/2) with c_i = -L + (i - 1/2) h, h = 2L/N and p_i = m0(cell).
/// Zero-mass cells are dropped from the ensemble and listed in `dropped`.
/// Throws ConfigError for an atom at +L or when every cell is empty.
Discretization discretize_measure(const Measure1D& m0, std::size_t n);

struct Checkpoint {
  double t = 0.0;
  FieldProfile field;
  double mass_signed = 0.0;
  double mass_abs = 0.0;
  double support_lo = 0.0;
  double support_hi = 0.0;
  bool tv_ok = false;
  bool sup_ok = false;
  bool support_ok = false;
  bool mass_ok = false;
};

struct TimeDifference {
  double t0 = 0.0;
  double t1 = 0.0;
  L1Difference l1;
  bool lipschitz_ok = false;
};

struct DiagnosticsReport {
  double m0_total_variation = 0.0;
  double L = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<TimeDifference> l1_time_differences;

  bool all_pass() const;
  std::string to_json_text() const;
};

/// Evaluate the uniform bounds at the requested times: TV(u) <= M0, TV(u_x) <= 2 M0,
/// sup|u|, sup|u_x| <= M0/2, constant signed mass, supp within |x| <= L + M0^2 t / 2,
/// and between consecutive checkpoints ||u(t)-u(s)||_1 <= M0^3 |t-s| / 2,
/// ||u_x(t)-u_x(s)||_1 <= M0^3 |t-s|. M0 is the total variation of m0.
DiagnosticsReport diagnostics(const Trajectory& traj, std::span<const double> amplitudes, const Measure1D& m0,
                              std::span<const double> times);

struct ConvergenceRow {
  std::size_t n = 0;
  std::size_t n_next = 0;
  L1Difference l1;
};

struct ConvergenceStudy {
  std::vector<std::size_t> n_list;
  std::vector<DiagnosticsReport> reports;
  std::vector<ConvergenceRow> rows;
  std::vector<Trajectory> trajectories;
  std::vector<Discretization> discretizations;

  /// Successive L1 differences of u strictly decreasing.
  bool cauchy_decreasing() const;
  std::string to_json_text() const;
};

struct ConvergenceOptions {
  /// "sticky", "dispersive_limit" or "regularized".
  std::string mode = "sticky";
  std::optional<double> epsilon;
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t checkpoints = 5;
};

/// Run every N in n_list (in parallel) and compare u^N(., T) with the next entry's field.
ConvergenceStudy convergence_study(const Measure1D& m0, const std::vector<std::size_t>& n_list,
                                   const ConvergenceOptions& options);

}  // namespace peakon
