#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peakon/ensemble.hpp"

namespace peakon {

/// Particles grouped into clusters that share one position. Blocks are contiguous
/// runs of particle indices and cluster positions are strictly increasing.
struct ClusterState {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<double> positions;
  std::vector<double> amplitudes;

  /// Group coincident entries of nondecreasing positions.
  static ClusterState from_positions(std::span<const double> amplitudes, std::span<const double> positions);

  std::size_t size() const { return clusters.size(); }
  std::size_t particles() const;
  /// Position of every particle (cluster position repeated over its block).
  std::vector<double> particle_positions() const;
  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;
};

/// Per-cluster velocity
///   (sum_j p_j G(x_i - x_j))^2 - (sum_{j outside the cluster} p_j G_x(x_i - x_j))^2 - (P_cluster)^2 / 12,
/// evaluated directly over particles. `amplitudes` are the particle amplitudes.
std::vector<double> limiting_rhs(const ClusterState& state, std::span<const double> amplitudes);

/// Velocities of strictly ordered distinct peakons:
///   p_i^2/6 + 1/2 sum_{j<i} p_i p_j e^{x_j - x_i} + 1/2 sum_{j>i} p_i p_j e^{x_i - x_j}
///   + sum_{m<i<n} p_m p_n e^{x_m - x_n},
/// in O(N) with one-sided exponential sums. Throws std::invalid_argument unless strictly increasing.
std::vector<double> ordered_rhs(std::span<const double> positions, std::span<const double> amplitudes);

/// Same formula without the ordering check, written for any labels:
/// `rank_ordered` uses the actual order of positions (peakons pass through each other),
/// otherwise index order is used even after positions have crossed.
std::vector<double> unordered_rhs(std::span<const double> positions, std::span<const double> amplitudes,
                                  bool rank_ordered);

enum class LimitMode { sticky, dispersive_limit };

std::string to_string(LimitMode mode);

struct LimitDynConfig {
  LimitMode mode = LimitMode::sticky;
  double collide_tol = 1e-10;
  double split_probe_gap = 1e-8;
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t store_every = 1;
  /// Guard against event chatter inside one step.
  std::size_t max_events_per_step = 64;
};

/// Event-driven RK4 on clusters. Merges happen when a gap closes (located by bisection
/// to collide_tol); in dispersive_limit mode a cluster also splits when the split probe
/// turns positive (located by bisection on the probe). Event times are stored as samples.
Trajectory limit_integrate(const PeakonEnsemble& ens0, const LimitDynConfig& cfg);

Trajectory sticky_integrate(const PeakonEnsemble& ens0, LimitDynConfig cfg);
Trajectory dispersive_limit_integrate(const PeakonEnsemble& ens0, LimitDynConfig cfg);

/// Largest v_B - v_A over contiguous partitions of cluster `c` into blocks A | B placed
/// at distance `gap` around the cluster position. Returns the value and the size of
/// the left block (leftmost on ties); size 0 for single-particle clusters.
struct SplitProbe {
  double value = 0.0;
  std::size_t left_size = 0;
};
SplitProbe split_probe(const ClusterState& state, std::size_t c, std::span<const double> amplitudes, double gap);

/// Fixed-step RK4 of the ordered formula with no collision handling: `rank_ordered`
/// relabels by position (crossing continuation), otherwise index order is kept
/// (the continuation that stops being a weak solution after the first collision).
Trajectory naive_integrate(const PeakonEnsemble& ens0, double dt, double t_end, bool rank_ordered);

/// Collision time 6 (c2 - c1) / (p1^2 - p2^2) of two isolated peakons; empty when p1^2 <= p2^2.
std::optional<double> two_peakon_collision_time(double c1, double c2, double p1, double p2);

struct ThreePeakonThresholds {
  double s2_star = 0.0;
  /// Predicted split time; empty when s2_star <= 0 (the pair never splits).
  std::optional<double> t2;
};

/// S2* solves (p2^2 - p1^2)/6 + (p1 + p2) p3 e^{-S}/2 = 0, i.e. S2* = ln(3 p3 / (p1 - p2));
/// T2 = t_merge + 6 (S2(t_merge) - S2*) / ((p1 + p2)^2 - p3^2).
/// Requires p1 > p2 > 0, p3 > 0, p1 + p2 > p3 and S2(t_merge) > S2*.
ThreePeakonThresholds three_peakon_thresholds(double p1, double p2, double p3, double t_merge,
                                              double s2_at_merge);

}  // namespace peakon
