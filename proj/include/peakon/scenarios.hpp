#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "peakon/ensemble.hpp"
#include "peakon/meanfield.hpp"

namespace peakon {

/// A complete run description. Every field has a concrete value after
/// builtin_scenario / scenario_from_json, and the whole struct is written into report.json.
struct ScenarioConfig {
  std::string scenario = "custom";
  /// regularized | sticky | dispersive_limit | ch | meanfield | limit_suite
  std::string mode = "regularized";
  std::optional<double> epsilon;
  std::vector<double> amplitudes;
  std::vector<double> positions;
  std::optional<Measure1D> measure;
  std::vector<std::size_t> n_list;
  /// For meanfield: the discretized run mode (sticky, dispersive_limit or regularized).
  std::string meanfield_mode = "sticky";
  double t_end = 1.0;
  std::optional<double> dt;
  std::size_t store_every = 1;
  std::string mollifier = "gaussian";
  int quad_nodes = 64;
  double collide_tol = 1e-10;
  double split_probe_gap = 1e-8;
  /// Also write the sticky and dispersive-limit runs next to a regularized run.
  bool overlay = true;

  /// Throws ConfigError when the mode's required fields are missing or invalid.
  void validate() const;
  /// dt with mode defaults applied.
  double resolved_dt() const;
  nlohmann::json to_json() const;
};

std::vector<std::string> builtin_scenario_names();

/// Throws ConfigError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// {"scenario": optional built-in base, then any ScenarioConfig field by name;
///  "measure" is an inline measure object, "measure_file" a path}.
ScenarioConfig scenario_from_json(const std::string& text);

struct ScenarioResult {
  Trajectory trajectory;
  std::optional<Trajectory> sticky_reference;
  std::optional<Trajectory> limit_reference;
  nlohmann::json diagnostics;
  nlohmann::json report;
};

/// Run a scenario. When out_dir is nonempty, writes trajectory.csv, events.json,
/// diagnostics.json and report.json there (plus overlay files when present).
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir = {});

/// eps sweep of I_eps and the two-peakon pair-speed integral with Richardson limits.
nlohmann::json run_limit_suite(const std::vector<double>& eps_list = {0.2, 0.1, 0.05, 0.02},
                               const std::string& mollifier = "gaussian", int quad_nodes = 64);

}  // namespace peakon
