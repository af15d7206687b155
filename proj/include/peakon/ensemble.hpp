#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace peakon {

/// N peakons u(x) = sum_i p_i G(x - x_i). Amplitudes are fixed for the lifetime
/// of the ensemble; dynamics produce new snapshots.
class PeakonEnsemble {
 public:
  PeakonEnsemble(std::vector<double> amplitudes, std::vector<double> positions,
                 std::string label = {});

  std::size_t size() const { return amplitudes_.size(); }
  std::span<const double> amplitudes() const { return amplitudes_; }
  std::span<const double> positions() const { return positions_; }
  const std::string& label() const { return label_; }

  /// M0 = sum_i |p_i|.
  double total_variation_mass() const { return m0_; }
  double signed_mass() const;

  bool is_nondecreasing() const;
  bool is_strictly_increasing() const;

  /// Same amplitudes and label, new positions.
  PeakonEnsemble with_positions(std::vector<double> positions) const;

 private:
  std::vector<double> amplitudes_;
  std::vector<double> positions_;
  std::string label_;
  double m0_ = 0.0;
};

enum class EventKind { merge, split };

std::string to_string(EventKind kind);

/// A merge or split. Indices are 0-based particle indices.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::merge;
  std::vector<std::size_t> indices;
  /// For splits: the particles of the left block. Empty for merges.
  std::vector<std::size_t> left_block;
};

struct TrajectoryMeta {
  std::string method;
  std::optional<double> epsilon;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t store_every = 1;
  /// Further self-describing settings (mollifier family, tolerances, flags).
  std::map<std::string, std::string> extra;
};

/// Time-stamped particle positions with an event log.
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> positions;
  /// Neighbor gaps x_{k+1} - x_k carried at full relative precision by integrators
  /// that track them; empty otherwise.
  std::vector<std::vector<double>> gaps;
  std::vector<Event> events;
  TrajectoryMeta meta;

  std::size_t size() const { return times.size(); }
  std::size_t particles() const { return positions.empty() ? 0 : positions.front().size(); }

  /// Positions at time t by linear interpolation between stored times.
  std::vector<double> positions_at(double t) const;

  /// Throws std::invalid_argument unless times are strictly increasing and rows are consistent.
  void validate() const;
};

// ---- field evaluation -------------------------------------------------------

/// u^N(x) = sum_i p_i G(x - x_i).
double eval_u(const PeakonEnsemble& ens, double x);
double eval_u(std::span<const double> amplitudes, std::span<const double> positions, double x);

/// u_x^N(x); the peak sitting exactly at x contributes 0.
double eval_ux(const PeakonEnsemble& ens, double x);
double eval_ux(std::span<const double> amplitudes, std::span<const double> positions, double x);

/// H0 = sum_{i,j} p_i p_j G(x_i - x_j). Diagnostic only (not conserved for N >= 2).
double mch_h0(const PeakonEnsemble& ens);

/// Time-dependent Hamiltonian sum_{i<j} p_i p_j e^{x_i - x_j} of the ordered system.
/// `t` enters only through the comoving form; with physical positions it is unused.
/// Throws std::invalid_argument for unordered positions.
double hamiltonian_H(const PeakonEnsemble& ens, double t);

/// The same quantity in comoving coordinates X_i = x_i - p_i^2 t / 6.
double hamiltonian_H_comoving(std::span<const double> amplitudes,
                              std::span<const double> comoving, double t);

/// Exact extrema and variation of u and u_x, from the piecewise-exponential
/// structure of the field between consecutive peaks.
struct FieldProfile {
  double tv_u = 0.0;
  double tv_ux = 0.0;
  double sup_u = 0.0;
  double sup_ux = 0.0;
};

FieldProfile analyze_field(std::span<const double> amplitudes, std::span<const double> positions);
inline FieldProfile analyze_field(const PeakonEnsemble& ens) {
  return analyze_field(ens.amplitudes(), ens.positions());
}

/// L1 norms of u_a - u_b and (u_a)_x - (u_b)_x over the real line. Panels are split
/// at the union of both position sets and at the sign changes inside each panel;
/// each piece is then integrated in closed form.
struct L1Difference {
  double u = 0.0;
  double ux = 0.0;
};

L1Difference l1_difference(std::span<const double> amplitudes_a, std::span<const double> positions_a,
                           std::span<const double> amplitudes_b, std::span<const double> positions_b);

// ---- serialization ----------------------------------------------------------

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// CSV with header t,x1,...,xN; extra column groups (e.g. p1..pN) may be appended.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Parse a CSV written by write_trajectory_csv (position columns only).
Trajectory read_trajectory_csv(std::istream& is);

/// JSON array of {time, kind, indices}; indices are 1-based particle labels.
std::string events_to_json(const std::vector<Event>& events);
void write_events_json(const std::string& path, const std::vector<Event>& events);

}  // namespace peakon
