#include "peakon/ch_reference.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "peakon/ensemble.hpp"
#include "peakon/errors.hpp"
#include "peakon/ode.hpp"

namespace peakon {

CHRates ch_rhs(const CHState& state) {
  const std::size_t n = state.size();
  if (state.amplitudes.size() != n) throw std::invalid_argument("ch_rhs: size mismatch");
  const auto& x = state.positions;
  const auto& p = state.amplitudes;
  CHRates r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    r.dx[i] += p[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = x[i] - x[j];
      const double e = std::exp(-std::fabs(d));
      r.dx[i] += p[j] * e;
      r.dx[j] += p[i] * e;
      if (d == 0.0) continue;
      const double term = (d > 0.0 ? 1.0 : -1.0) * p[i] * p[j] * e;
      r.dp[i] += term;
      r.dp[j] -= term;
    }
  }
  return r;
}

double ch_hamiltonian(const CHState& state) {
  const auto& x = state.positions;
  const auto& p = state.amplitudes;
  double h = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    h += 0.5 * p[i] * p[i];
    for (std::size_t j = i + 1; j < x.size(); ++j) h += p[i] * p[j] * std::exp(-std::fabs(x[i] - x[j]));
  }
  return h;
}

CHTrajectory integrate_ch(const CHState& state0, double dt, double t_end, std::size_t store_every) {
  const std::size_t n = state0.size();
  if (n == 0 || state0.amplitudes.size() != n) throw std::invalid_argument("integrate_ch: malformed state");
  if (store_every == 0) throw ConfigError("integrate_ch: store_every must be positive");
  const std::size_t steps = fixed_step_count(t_end, dt);
  const double h = t_end / static_cast<double>(steps);
  const bool positive = std::all_of(state0.amplitudes.begin(), state0.amplitudes.end(), [](double v) { return v > 0.0; });

  State y(2 * n);
  std::copy(state0.positions.begin(), state0.positions.end(), y.begin());
  std::copy(state0.amplitudes.begin(), state0.amplitudes.end(), y.begin() + static_cast<long>(n));
  auto unpack = [&](const State& s) {
    CHState st;
    st.positions.assign(s.begin(), s.begin() + static_cast<long>(n));
    st.amplitudes.assign(s.begin() + static_cast<long>(n), s.end());
    return st;
  };
  auto rhs = [&](double, const State& s, State& out) {
    const CHRates r = ch_rhs(unpack(s));
    std::copy(r.dx.begin(), r.dx.end(), out.begin());
    std::copy(r.dp.begin(), r.dp.end(), out.begin() + static_cast<long>(n));
  };

  // Ordering is checked against the initial order of the labels.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return state0.positions[a] < state0.positions[b]; });

  CHTrajectory traj;
  traj.dt = h;
  const double h0 = ch_hamiltonian(state0);
  double m0 = 0.0;
  for (double p : state0.amplitudes) m0 += p;
  traj.times.push_back(0.0);
  traj.states.push_back(state0);

  Rk4Stepper stepper(2 * n);
  for (std::size_t step = 1; step <= steps; ++step) {
    stepper.step(rhs, h * static_cast<double>(step - 1), y, h);
    const double t = step == steps ? t_end : h * static_cast<double>(step);
    CHState st = unpack(y);
    const double drift = std::fabs(ch_hamiltonian(st) - h0) / std::max(std::fabs(h0), 1e-300);
    double m = 0.0;
    for (double p : st.amplitudes) m += p;
    traj.h0_drift = std::max(traj.h0_drift, drift);
    traj.momentum_drift = std::max(traj.momentum_drift, std::fabs(m - m0));
    if (!(drift <= 1e-6)) {
      throw NumericalAbort("integrate_ch: Hamiltonian drift " + format_double(drift) + " at t = " + format_double(t) +
                           " exceeds 1e-6; reduce dt");
    }
    if (positive) {
      for (std::size_t k = 1; k < n; ++k) {
        if (!(st.positions[order[k]] > st.positions[order[k - 1]])) {
          throw NumericalAbort("integrate_ch: peakons " + std::to_string(order[k - 1] + 1) + " and " +
                               std::to_string(order[k] + 1) + " collided at t = " + format_double(t));
        }
      }
    }
    if (step % store_every == 0 || step == steps) {
      traj.times.push_back(t);
      traj.states.push_back(std::move(st));
    }
  }
  return traj;
}

void write_ch_csv(std::ostream& os, const CHTrajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << ",x" << (i + 1);
  for (std::size_t i = 0; i < n; ++i) os << ",p" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_double(traj.times[k]);
    for (double x : traj.states[k].positions) os << ',' << format_double(x);
    for (double p : traj.states[k].amplitudes) os << ',' << format_double(p);
    os << '\n';
  }
}

std::string ch_drift_json(const CHTrajectory& traj) {
  nlohmann::json j;
  j["H0_drift"] = traj.h0_drift;
  j["momentum_drift"] = traj.momentum_drift;
  return j.dump(2);
}

}  // namespace peakon
