#include "peakon/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "peakon/ch_reference.hpp"
#include "peakon/errors.hpp"
#include "peakon/kernels.hpp"
#include "peakon/limit_dynamics.hpp"
#include "peakon/quadrature.hpp"
#include "peakon/reg_dynamics.hpp"

namespace peakon {

namespace {

const std::vector<std::string> kModes = {"regularized", "sticky", "dispersive_limit", "ch", "meanfield", "limit_suite"};

bool is_particle_mode(const std::string& mode) {
  return mode == "regularized" || mode == "sticky" || mode == "dispersive_limit" || mode == "ch";
}

Mollifier make_mollifier(const ScenarioConfig& cfg) {
  return Mollifier(*cfg.epsilon, cfg.quad_nodes, mollifier_family_from_string(cfg.mollifier));
}

LimitDynConfig limit_config(const ScenarioConfig& cfg, LimitMode mode, double dt) {
  LimitDynConfig lc;
  lc.mode = mode;
  lc.dt = dt;
  lc.t_end = cfg.t_end;
  lc.store_every = cfg.store_every;
  lc.collide_tol = cfg.collide_tol;
  lc.split_probe_gap = cfg.split_probe_gap;
  return lc;
}

nlohmann::json meta_json(const TrajectoryMeta& meta) {
  nlohmann::json j;
  j["method"] = meta.method;
  j["epsilon"] = meta.epsilon ? nlohmann::json(*meta.epsilon) : nlohmann::json(nullptr);
  j["dt"] = meta.dt;
  j["steps"] = meta.steps;
  j["store_every"] = meta.store_every;
  nlohmann::json extra = nlohmann::json::object();
  for (const auto& [k, v] : meta.extra) extra[k] = v;
  j["settings"] = extra;
  return j;
}

nlohmann::json events_json(const std::vector<Event>& events) { return nlohmann::json::parse(events_to_json(events)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text << '\n';
}

// Bounds and Hamiltonian diagnostics for a particle trajectory.
nlohmann::json particle_diagnostics(const Trajectory& traj, std::span<const double> amps, double t_end) {
  Measure1D atoms;
  double reach = 0.0;
  for (double x : traj.positions.front()) reach = std::max(reach, std::fabs(x));
  atoms.L = reach > 0.0 ? reach : 1.0;
  for (std::size_t i = 0; i < amps.size(); ++i) atoms.atoms.emplace_back(traj.positions.front()[i], amps[i]);

  constexpr std::size_t kCheckpoints = 11;
  std::vector<double> times(kCheckpoints);
  for (std::size_t k = 0; k < kCheckpoints; ++k) times[k] = t_end * static_cast<double>(k) / (kCheckpoints - 1);
  const DiagnosticsReport rep = diagnostics(traj, amps, atoms, times);
  nlohmann::json j = nlohmann::json::parse(rep.to_json_text());

  const double m0 = atoms.total_variation();
  nlohmann::json h0 = nlohmann::json::array();
  nlohmann::json ham = nlohmann::json::array();
  const std::vector<double> amp_vec(amps.begin(), amps.end());
  for (double t : times) {
    const PeakonEnsemble ens(amp_vec, traj.positions_at(t));
    h0.push_back(mch_h0(ens));
    ham.push_back(ens.is_nondecreasing() ? nlohmann::json(hamiltonian_H(ens, t)) : nlohmann::json(nullptr));
  }
  j["checkpoint_times"] = times;
  j["mch_H0"] = h0;
  j["hamiltonian"] = ham;

  // Lipschitz bound on stored samples: |x_i(t) - x_i(s)| <= M0^2 |t - s| / 2.
  double max_rate = 0.0;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double dt = traj.times[k] - traj.times[k - 1];
    for (std::size_t i = 0; i < amps.size(); ++i) {
      max_rate = std::max(max_rate, std::fabs(traj.positions[k][i] - traj.positions[k - 1][i]) / dt);
    }
  }
  j["max_displacement_rate"] = max_rate;
  j["speed_bound"] = 0.5 * m0 * m0;
  j["lipschitz_ok"] = max_rate <= 0.5 * m0 * m0 + 1e-9;
  return j;
}

// Split-threshold prediction for a three-peakon run whose first event merges peakons 1 and 2.
std::optional<nlohmann::json> split_thresholds(const Trajectory& limit, std::span<const double> p) {
  if (p.size() != 3 || limit.events.empty()) return std::nullopt;
  const Event& first = limit.events.front();
  if (first.kind != EventKind::merge || first.indices != std::vector<std::size_t>{0, 1}) return std::nullopt;
  if (!(p[0] > p[1] && p[1] > 0.0 && p[2] > 0.0 && p[0] + p[1] > p[2])) return std::nullopt;
  const std::vector<double> x = limit.positions_at(first.time);
  try {
    const ThreePeakonThresholds th = three_peakon_thresholds(p[0], p[1], p[2], first.time, x[2] - x[1]);
    nlohmann::json j;
    j["S2_star"] = th.s2_star;
    j["T2"] = th.t2 ? nlohmann::json(*th.t2) : nlohmann::json(nullptr);
    j["t_merge"] = first.time;
    j["S2_at_merge"] = x[2] - x[1];
    nlohmann::json observed = nullptr;
    for (const auto& e : limit.events) {
      if (e.kind == EventKind::split) {
        observed = e.time;
        break;
      }
    }
    j["observed_split_time"] = observed;
    if (th.t2 && !observed.is_null()) {
      j["relative_difference"] = std::fabs(observed.get<double>() - *th.t2) / *th.t2;
    }
    j["label"] = "conjecture test: split time equals T2";
    return j;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (std::find(kModes.begin(), kModes.end(), mode) == kModes.end()) {
    throw ConfigError("unknown mode '" + mode + "'");
  }
  if (mode == "limit_suite") return;
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end must be positive");
  if (dt && !(*dt > 0.0)) throw ConfigError("dt must be positive");
  if (store_every == 0) throw ConfigError("store_every must be positive");
  if (quad_nodes < 2) throw ConfigError("quad_nodes must be at least 2");
  mollifier_family_from_string(mollifier);
  if (mode == "regularized" && !epsilon) throw ConfigError("mode 'regularized' requires epsilon");
  if (epsilon && !(*epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (is_particle_mode(mode)) {
    if (amplitudes.empty()) throw ConfigError("mode '" + mode + "' requires amplitudes and positions");
    if (amplitudes.size() != positions.size()) throw ConfigError("amplitudes and positions differ in length");
  }
  if (mode == "meanfield") {
    if (!measure) throw ConfigError("mode 'meanfield' requires a measure");
    if (n_list.empty()) throw ConfigError("mode 'meanfield' requires N values");
    if (meanfield_mode == "regularized" && !epsilon) throw ConfigError("regularized meanfield runs require epsilon");
  }
}

double ScenarioConfig::resolved_dt() const {
  if (dt) return *dt;
  if (mode == "regularized" && epsilon) return std::min(*epsilon / 20.0, 1e-3);
  return 1e-3;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["scenario"] = scenario;
  j["mode"] = mode;
  j["epsilon"] = epsilon ? nlohmann::json(*epsilon) : nlohmann::json(nullptr);
  j["amplitudes"] = amplitudes;
  j["positions"] = positions;
  j["measure"] = measure ? nlohmann::json::parse(measure->to_json_text()) : nlohmann::json(nullptr);
  j["N"] = n_list;
  j["meanfield_mode"] = meanfield_mode;
  j["t_end"] = t_end;
  j["dt"] = resolved_dt();
  j["store_every"] = store_every;
  j["mollifier"] = mollifier;
  j["quad_nodes"] = quad_nodes;
  j["collide_tol"] = collide_tol;
  j["split_probe_gap"] = split_probe_gap;
  j["overlay"] = overlay;
  return j;
}

std::vector<std::string> builtin_scenario_names() {
  return {"fig1", "fig2", "fig3a", "fig3b", "two_peakon", "one_peakon", "ch_pair", "meanfield_uniform", "limit_suite"};
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c;
  c.scenario = name;
  if (name == "fig1") {
    // Runs past the second merge so the merged cluster's motion is visible.
    c.amplitudes = {4, 2, 1};
    c.positions = {-7, -5, -3};
    c.epsilon = 0.02;
    c.t_end = 3.0;
  } else if (name == "fig2") {
    // Ends after the {2,3} merge and before the 1-to-{2,3} distance reaches ln 12,
    // beyond which the split probe of the {2,3} pair turns positive.
    c.amplitudes = {4, 2, 3};
    c.positions = {-7, -6, -2};
    c.epsilon = 0.02;
    c.t_end = 2.0;
  } else if (name == "fig3a" || name == "fig3b") {
    c.mode = "sticky";
    c.amplitudes = {4, 3, 2};
    c.positions = {-4, name == "fig3a" ? -3.0 : -2.0, 4};
    c.t_end = 4.0;
  } else if (name == "two_peakon") {
    c.amplitudes = {2, 1};
    c.positions = {0, 1};
    c.epsilon = 0.05;
    c.t_end = 4.0;
  } else if (name == "one_peakon") {
    c.amplitudes = {1};
    c.positions = {0};
    c.epsilon = 0.02;
    c.t_end = 1.0;
  } else if (name == "ch_pair") {
    c.mode = "ch";
    c.amplitudes = {2, 1};
    c.positions = {0, 5};
    c.t_end = 25.0;
  } else if (name == "meanfield_uniform") {
    c.mode = "meanfield";
    Measure1D m;
    m.L = 1.0;
    m.density = {0.5};
    c.measure = m;
    c.n_list = {8, 16, 32, 64};
    c.t_end = 1.0;
  } else if (name == "limit_suite") {
    c.mode = "limit_suite";
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return c;
}

ScenarioConfig scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ScenarioConfig c;
  try {
    if (j.contains("scenario")) c = builtin_scenario(j["scenario"].get<std::string>());
    for (const auto& [key, value] : j.items()) {
      if (key == "scenario") continue;
      if (key == "mode") c.mode = value.get<std::string>();
      else if (key == "epsilon") c.epsilon = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      else if (key == "amplitudes") c.amplitudes = value.get<std::vector<double>>();
      else if (key == "positions") c.positions = value.get<std::vector<double>>();
      else if (key == "measure") c.measure = value.is_null() ? std::nullopt : std::optional<Measure1D>(Measure1D::from_json_text(value.dump()));
      else if (key == "measure_file") c.measure = Measure1D::load(value.get<std::string>());
      else if (key == "N") c.n_list = value.is_array() ? value.get<std::vector<std::size_t>>() : std::vector<std::size_t>{value.get<std::size_t>()};
      else if (key == "meanfield_mode") c.meanfield_mode = value.get<std::string>();
      else if (key == "t_end") c.t_end = value.get<double>();
      else if (key == "dt") c.dt = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
      else if (key == "store_every") c.store_every = value.get<std::size_t>();
      else if (key == "mollifier") c.mollifier = value.get<std::string>();
      else if (key == "quad_nodes") c.quad_nodes = value.get<int>();
      else if (key == "collide_tol") c.collide_tol = value.get<double>();
      else if (key == "split_probe_gap") c.split_probe_gap = value.get<double>();
      else if (key == "overlay") c.overlay = value.get<bool>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.contains("scenario")) c.scenario = "custom";
  c.validate();
  return c;
}

nlohmann::json run_limit_suite(const std::vector<double>& eps_list, const std::string& mollifier, int quad_nodes) {
  const MollifierFamily family = mollifier_family_from_string(mollifier);
  nlohmann::json j;
  j["mollifier"] = mollifier;
  j["quad_nodes"] = quad_nodes;
  j["epsilon"] = eps_list;

  std::vector<double> i_eps;
  std::vector<double> i_err;
  std::vector<double> pair;
  double node_change = 0.0;
  nlohmann::json uniformity = nlohmann::json::array();
  const std::vector<double> s_values = {0.5, 1.0, 2.0};
  for (double eps : eps_list) {
    const Mollifier moll(eps, quad_nodes, family);
    const double v = mollified_gx_square_at_zero(moll);
    i_eps.push_back(v);
    i_err.push_back(std::fabs(v - 1.0 / 12.0));
    const Mollifier fine(eps, 2 * quad_nodes, family);
    node_change = std::max(node_change, std::fabs(mollified_gx_square_at_zero(fine) - v));
    pair.push_back(pair_speed_integral(moll, 1.0));

    nlohmann::json row;
    row["epsilon"] = eps;
    std::vector<double> vals;
    for (double s : s_values) vals.push_back(pair_speed_integral(moll, s));
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double bound = pair_speed_tail_bound(moll, s_values.front());
    row["s"] = s_values;
    row["values"] = vals;
    row["spread"] = *hi - *lo;
    row["tail_bound"] = bound;
    row["within_bound"] = (*hi - *lo) <= bound;
    uniformity.push_back(row);
  }
  bool monotone = true;
  for (std::size_t k = 1; k < i_err.size(); ++k) monotone = monotone && i_err[k] < i_err[k - 1];
  bool bounds_shrink = true;
  for (std::size_t k = 1; k < uniformity.size(); ++k) {
    bounds_shrink = bounds_shrink && uniformity[k]["tail_bound"].get<double>() < uniformity[k - 1]["tail_bound"].get<double>();
  }
  const double i_limit = neville_extrapolate(eps_list, i_eps);
  const double pair_limit = neville_extrapolate(eps_list, pair);

  j["I_eps"] = {{"values", i_eps},
                {"errors", i_err},
                {"monotone_error_decrease", monotone},
                {"extrapolated", i_limit},
                {"extrapolation_error", std::fabs(i_limit - 1.0 / 12.0)},
                {"target", 1.0 / 12.0},
                {"node_doubling_change", node_change}};
  j["pair_speed"] = {{"s", 1.0},
                     {"values", pair},
                     {"extrapolated", pair_limit},
                     {"extrapolation_error", std::fabs(pair_limit - 1.0 / 6.0)},
                     {"target", 1.0 / 6.0}};
  j["s_uniformity"] = uniformity;
  j["tail_bounds_shrink"] = bounds_shrink;
  return j;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ScenarioResult res;
  res.report["config"] = cfg.to_json();
  const double dt = cfg.resolved_dt();
  std::string trajectory_csv;

  if (cfg.mode == "limit_suite") {
    res.report["limit_suite"] = run_limit_suite({0.2, 0.1, 0.05, 0.02}, cfg.mollifier, cfg.quad_nodes);
  } else if (cfg.mode == "ch") {
    CHState s0{cfg.positions, cfg.amplitudes};
    const CHTrajectory ch = integrate_ch(s0, dt, cfg.t_end, cfg.store_every);
    std::ostringstream os;
    write_ch_csv(os, ch);
    trajectory_csv = os.str();
    res.trajectory.times = ch.times;
    for (const auto& st : ch.states) res.trajectory.positions.push_back(st.positions);
    res.trajectory.meta.method = "ch";
    res.trajectory.meta.dt = ch.dt;
    res.diagnostics = nlohmann::json::parse(ch_drift_json(ch));
    const CHRates rates = ch_rhs(ch.states.back());
    res.report["final_speeds"] = rates.dx;
    res.report["final_amplitudes"] = ch.states.back().amplitudes;
  } else if (cfg.mode == "meanfield") {
    ConvergenceOptions opt;
    opt.mode = cfg.meanfield_mode;
    opt.epsilon = cfg.epsilon;
    opt.t_end = cfg.t_end;
    opt.dt = dt;
    const ConvergenceStudy study = convergence_study(*cfg.measure, cfg.n_list, opt);
    res.trajectory = study.trajectories.back();
    res.diagnostics = nlohmann::json::parse(study.to_json_text());
    res.report["cauchy_decreasing"] = study.cauchy_decreasing();
    bool all = true;
    for (const auto& r : study.reports) all = all && r.all_pass();
    res.report["all_bounds_pass"] = all;
    res.report["trajectory_N"] = cfg.n_list.back();
  } else {
    const PeakonEnsemble ens(cfg.amplitudes, cfg.positions, cfg.scenario);
    if (cfg.mode == "regularized") {
      RegDynConfig rc;
      rc.moll = make_mollifier(cfg);
      rc.dt = dt;
      rc.t_end = cfg.t_end;
      rc.store_every = cfg.store_every;
      res.trajectory = integrate_regularized(ens, rc);
      if (cfg.overlay) {
        const double limit_dt = std::min(dt, 1e-3);
        res.sticky_reference = limit_integrate(ens, limit_config(cfg, LimitMode::sticky, limit_dt));
        res.limit_reference = limit_integrate(ens, limit_config(cfg, LimitMode::dispersive_limit, limit_dt));
      }
    } else {
      const LimitMode mode = cfg.mode == "sticky" ? LimitMode::sticky : LimitMode::dispersive_limit;
      res.trajectory = limit_integrate(ens, limit_config(cfg, mode, dt));
      if (mode == LimitMode::dispersive_limit) res.limit_reference = res.trajectory;
    }
    res.diagnostics = particle_diagnostics(res.trajectory, ens.amplitudes(), cfg.t_end);
    res.report["events"] = events_json(res.trajectory.events);
    if (res.sticky_reference) res.report["sticky_events"] = events_json(res.sticky_reference->events);
    if (res.limit_reference && cfg.mode == "regularized") {
      res.report["dispersive_limit_events"] = events_json(res.limit_reference->events);
    }
    if (res.limit_reference) {
      if (auto th = split_thresholds(*res.limit_reference, ens.amplitudes())) res.report["split_thresholds"] = *th;
    }
    if (ens.size() == 2 && cfg.positions[0] < cfg.positions[1]) {
      const auto tc = two_peakon_collision_time(cfg.positions[0], cfg.positions[1], cfg.amplitudes[0], cfg.amplitudes[1]);
      res.report["predicted_collision_time"] = tc ? nlohmann::json(*tc) : nlohmann::json(nullptr);
    }
    const auto& tr = res.trajectory;
    if (tr.size() >= 2) {
      const std::size_t k = tr.size() - 1;
      std::vector<double> slopes(ens.size());
      for (std::size_t i = 0; i < ens.size(); ++i) {
        slopes[i] = (tr.positions[k][i] - tr.positions[k - 1][i]) / (tr.times[k] - tr.times[k - 1]);
      }
      res.report["final_slopes"] = slopes;
    }
  }
  res.report["trajectory"] = meta_json(res.trajectory.meta);

  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    if (cfg.mode != "limit_suite") {
      if (trajectory_csv.empty()) {
        write_trajectory_csv((dir / "trajectory.csv").string(), res.trajectory);
      } else {
        write_text(dir / "trajectory.csv", trajectory_csv.substr(0, trajectory_csv.size() - 1));
      }
      write_events_json((dir / "events.json").string(), res.trajectory.events);
      if (res.sticky_reference) {
        write_trajectory_csv((dir / "reference_trajectory.csv").string(), *res.sticky_reference);
        write_events_json((dir / "reference_events.json").string(), res.sticky_reference->events);
      }
      if (res.limit_reference && cfg.mode == "regularized") {
        write_trajectory_csv((dir / "limit_trajectory.csv").string(), *res.limit_reference);
        write_events_json((dir / "limit_events.json").string(), res.limit_reference->events);
      }
    }
    write_text(dir / "diagnostics.json", res.diagnostics.is_null() ? "{}" : res.diagnostics.dump(2));
    write_text(dir / "report.json", res.report.dump(2));
  }
  return res;
}

}  // namespace peakon
