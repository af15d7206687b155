#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "peakon/ensemble.hpp"
#include "peakon/kernels.hpp"
#include "peakon/test_function.hpp"

namespace peakon {

/// D_i = F_i - v_i where F is the ordered peakon right-hand side.
/// Throws std::invalid_argument unless positions are strictly increasing.
std::vector<double> defect(std::span<const double> positions, std::span<const double> amplitudes,
                           std::span<const double> velocities);

struct ResidualOptions {
  /// Refinement levels 0..levels-1. Level L uses 2^L subpanels per x panel and
  /// 2 + L Gauss-Legendre nodes per time interval.
  int levels = 4;
  double tolerance = 1e-4;
  /// Evaluate u^eps = sum p_j G^eps(x - x_j) instead of the peakon field.
  std::optional<Mollifier> moll;
};

struct ResidualReport {
  TestFunction phi;
  double value = 0.0;
  std::vector<std::pair<int, double>> history;
  bool converged = false;
  bool consistent = false;

  std::string verdict() const { return consistent ? "consistent_with_weak" : "inconsistent"; }
};

/// L(u, phi) at one refinement level, without the initial pairing.
double weak_functional(const Trajectory& traj, std::span<const double> amplitudes, const TestFunction& phi,
                       int level, const std::optional<Mollifier>& moll = std::nullopt);

/// L(u, phi) + sum_i p_i phi(x_i(0), 0) under refinement. x panels are split at every peak
/// inside the support (and at x_i +- k eps for mollified fields); time is split at every
/// stored sample, positions being linear in between. The refinement counts as converged
/// when the last change is no larger than the one before it (or below 1e-12), and the
/// verdict is consistent iff converged and |value| <= tolerance.
/// Throws std::invalid_argument when phi's time support extends past the trajectory.
ResidualReport weak_residual(const Trajectory& traj, std::span<const double> amplitudes, const TestFunction& phi,
                             const ResidualOptions& options = {});

std::string residual_report_json(const ResidualReport& report);

}  // namespace peakon
