#include "peakon/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "peakon/errors.hpp"
#include "peakon/kernels.hpp"
#include "peakon/reg_dynamics.hpp"

namespace peakon {

double Measure1D::total_variation() const {
  double m = 0.0;
  for (const auto& [loc, w] : atoms) m += std::fabs(w);
  for (double v : density) m += std::fabs(v) * bin_width();
  return m;
}

double Measure1D::signed_mass() const {
  double m = 0.0;
  for (const auto& [loc, w] : atoms) m += w;
  for (double v : density) m += v * bin_width();
  return m;
}

double Measure1D::mass_of(double a, double b) const {
  double m = 0.0;
  for (const auto& [loc, w] : atoms) {
    if (loc >= a && loc < b) m += w;
  }
  const double width = bin_width();
  for (std::size_t k = 0; k < density.size(); ++k) {
    const double lo = -L + width * static_cast<double>(k);
    const double hi = k + 1 == density.size() ? L : -L + width * static_cast<double>(k + 1);
    const double overlap = std::min(hi, b) - std::max(lo, a);
    if (overlap > 0.0) m += density[k] * overlap;
  }
  return m;
}

void Measure1D::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("measure: L must be positive and finite");
  for (const auto& [loc, w] : atoms) {
    if (!std::isfinite(loc) || !std::isfinite(w)) throw ConfigError("measure: non-finite atom");
    if (loc < -L || loc > L) {
      throw ConfigError("measure: atom at " + format_double(loc) + " lies outside [-L, L] with L = " + format_double(L));
    }
  }
  for (double v : density) {
    if (!std::isfinite(v)) throw ConfigError("measure: non-finite density value");
  }
}

Measure1D Measure1D::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measure: invalid JSON: ") + e.what());
  }
  Measure1D m;
  try {
    m.L = j.at("L").get<double>();
    if (j.contains("atoms")) {
      for (const auto& a : j.at("atoms")) {
        if (!a.is_array() || a.size() != 2) throw ConfigError("measure: atoms must be [location, weight] pairs");
        m.atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
      }
    }
    if (j.contains("density")) m.density = j.at("density").at("values").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measure: ") + e.what());
  }
  m.validate();
  return m;
}

Measure1D Measure1D::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("measure: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_text(ss.str());
}

std::string Measure1D::to_json_text() const {
  nlohmann::json j;
  j["L"] = L;
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [loc, w] : atoms) a.push_back({loc, w});
  j["atoms"] = a;
  j["density"] = {{"values", density}};
  return j.dump();
}

Discretization discretize_measure(const Measure1D& m0, std::size_t n) {
  if (n == 0) throw ConfigError("discretize_measure: N must be at least 1");
  m0.validate();
  for (const auto& [loc, w] : m0.atoms) {
    if (loc == m0.L) throw ConfigError("discretize_measure: atom at +L belongs to no half-open cell");
  }
  const double h = 2.0 * m0.L / static_cast<double>(n);
  std::vector<double> centers(n);
  std::vector<double> masses(n);
  std::vector<double> amps;
  std::vector<double> pos;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = -m0.L + h * static_cast<double>(i);
    const double hi = i + 1 == n ? m0.L : -m0.L + h * static_cast<double>(i + 1);
    centers[i] = -m0.L + (static_cast<double>(i) + 0.5) * h;
    masses[i] = m0.mass_of(lo, hi);
    if (masses[i] == 0.0) {
      dropped.push_back(i);
    } else {
      amps.push_back(masses[i]);
      pos.push_back(centers[i]);
    }
  }
  if (amps.empty()) throw ConfigError("discretize_measure: every cell has zero mass");
  return Discretization{PeakonEnsemble(std::move(amps), std::move(pos), "meanfield-N" + std::to_string(n)), h,
                        std::move(centers), std::move(masses), std::move(dropped)};
}

bool DiagnosticsReport::all_pass() const {
  for (const auto& c : checkpoints) {
    if (!(c.tv_ok && c.sup_ok && c.support_ok && c.mass_ok)) return false;
  }
  for (const auto& d : l1_time_differences) {
    if (!d.lipschitz_ok) return false;
  }
  return true;
}

std::string DiagnosticsReport::to_json_text() const {
  nlohmann::json j;
  j["M0"] = m0_total_variation;
  j["L"] = L;
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& c : checkpoints) {
    cps.push_back({{"t", c.t},
                   {"tv_u", c.field.tv_u},
                   {"tv_ux", c.field.tv_ux},
                   {"sup_u", c.field.sup_u},
                   {"sup_ux", c.field.sup_ux},
                   {"mass_signed", c.mass_signed},
                   {"mass_abs", c.mass_abs},
                   {"support", {c.support_lo, c.support_hi}},
                   {"tv_ok", c.tv_ok},
                   {"sup_ok", c.sup_ok},
                   {"support_ok", c.support_ok},
                   {"mass_ok", c.mass_ok}});
  }
  j["checkpoints"] = cps;
  nlohmann::json diffs = nlohmann::json::array();
  for (const auto& d : l1_time_differences) {
    diffs.push_back({{"t0", d.t0}, {"t1", d.t1}, {"l1_u", d.l1.u}, {"l1_ux", d.l1.ux}, {"lipschitz_ok", d.lipschitz_ok}});
  }
  j["l1_time_differences"] = diffs;
  j["all_pass"] = all_pass();
  return j.dump(2);
}

DiagnosticsReport diagnostics(const Trajectory& traj, std::span<const double> amplitudes, const Measure1D& m0,
                              std::span<const double> times) {
  constexpr double slack = 1e-9;
  DiagnosticsReport rep;
  const double m = m0.total_variation();
  rep.m0_total_variation = m;
  rep.L = m0.L;
  const double target_mass = m0.signed_mass();
  std::vector<std::vector<double>> snapshots;
  for (double t : times) {
    std::vector<double> x = traj.positions_at(t);
    Checkpoint c;
    c.t = t;
    c.field = analyze_field(amplitudes, x);
    for (double p : amplitudes) {
      c.mass_signed += p;
      c.mass_abs += std::fabs(p);
    }
    c.support_lo = *std::min_element(x.begin(), x.end());
    c.support_hi = *std::max_element(x.begin(), x.end());
    c.tv_ok = c.field.tv_u <= m + slack && c.field.tv_ux <= 2.0 * m + slack;
    c.sup_ok = c.field.sup_u <= 0.5 * m + slack && c.field.sup_ux <= 0.5 * m + slack;
    const double reach = m0.L + 0.5 * m * m * t + slack;
    c.support_ok = std::max(std::fabs(c.support_lo), std::fabs(c.support_hi)) <= reach;
    c.mass_ok = std::fabs(c.mass_signed - target_mass) <= 1e-12 * std::max(1.0, m) && c.mass_abs <= m + slack;
    rep.checkpoints.push_back(c);
    snapshots.push_back(std::move(x));
  }
  for (std::size_t k = 1; k < snapshots.size(); ++k) {
    TimeDifference d;
    d.t0 = times[k - 1];
    d.t1 = times[k];
    d.l1 = l1_difference(amplitudes, snapshots[k - 1], amplitudes, snapshots[k]);
    const double dt = std::fabs(d.t1 - d.t0);
    d.lipschitz_ok = d.l1.u <= 0.5 * m * m * m * dt + slack && d.l1.ux <= m * m * m * dt + slack;
    rep.l1_time_differences.push_back(d);
  }
  return rep;
}

bool ConvergenceStudy::cauchy_decreasing() const {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!(rows[k].l1.u < rows[k - 1].l1.u)) return false;
  }
  return true;
}

std::string ConvergenceStudy::to_json_text() const {
  nlohmann::json j;
  j["N"] = n_list;
  nlohmann::json rj = nlohmann::json::array();
  for (const auto& r : rows) rj.push_back({{"N", r.n}, {"N_next", r.n_next}, {"l1_u", r.l1.u}, {"l1_ux", r.l1.ux}});
  j["l1_differences"] = rj;
  j["cauchy_decreasing"] = cauchy_decreasing();
  nlohmann::json reps = nlohmann::json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    nlohmann::json r = nlohmann::json::parse(reports[k].to_json_text());
    r["N"] = n_list[k];
    r["dropped_cells"] = discretizations[k].dropped;
    reps.push_back(r);
  }
  j["diagnostics"] = reps;
  return j.dump(2);
}

ConvergenceStudy convergence_study(const Measure1D& m0, const std::vector<std::size_t>& n_list,
                                   const ConvergenceOptions& options) {
  if (n_list.empty()) throw ConfigError("convergence_study: empty N list");
  for (std::size_t k = 1; k < n_list.size(); ++k) {
    if (!(n_list[k] > n_list[k - 1])) throw ConfigError("convergence_study: N list must be increasing");
  }
  if (options.checkpoints < 2) throw ConfigError("convergence_study: need at least two checkpoints");
  if (options.mode == "regularized" && !options.epsilon) {
    throw ConfigError("convergence_study: regularized mode requires epsilon");
  }
  if (options.mode != "regularized" && options.mode != "sticky" && options.mode != "dispersive_limit") {
    throw ConfigError("convergence_study: unknown mode '" + options.mode + "'");
  }
  std::vector<double> checkpoints(options.checkpoints);
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    checkpoints[k] = options.t_end * static_cast<double>(k) / static_cast<double>(checkpoints.size() - 1);
  }

  const std::size_t count = n_list.size();
  ConvergenceStudy study;
  study.n_list = n_list;
  for (std::size_t n : n_list) study.discretizations.push_back(discretize_measure(m0, n));
  study.trajectories.resize(count);
  study.reports.resize(count);
  std::vector<std::exception_ptr> errors(count);

#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < static_cast<long long>(count); ++k) {
    try {
      const PeakonEnsemble& ens = study.discretizations[k].ensemble;
      Trajectory traj;
      if (options.mode == "regularized") {
        RegDynConfig cfg;
        cfg.moll = Mollifier(*options.epsilon);
        cfg.t_end = options.t_end;
        cfg.dt = options.dt;
        traj = integrate_regularized(ens, cfg);
      } else {
        LimitDynConfig cfg;
        cfg.mode = options.mode == "sticky" ? LimitMode::sticky : LimitMode::dispersive_limit;
        cfg.t_end = options.t_end;
        cfg.dt = options.dt;
        traj = limit_integrate(ens, cfg);
      }
      study.reports[k] = diagnostics(traj, ens.amplitudes(), m0, checkpoints);
      study.trajectories[k] = std::move(traj);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const auto& a = study.discretizations[k].ensemble;
    const auto& b = study.discretizations[k + 1].ensemble;
    const auto xa = study.trajectories[k].positions.back();
    const auto xb = study.trajectories[k + 1].positions.back();
    study.rows.push_back({n_list[k], n_list[k + 1], l1_difference(a.amplitudes(), xa, b.amplitudes(), xb)});
  }
  return study;
}

}  // namespace peakon
