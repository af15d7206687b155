#include "peakon/reg_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "peakon/ode.hpp"
#include "peakon/quadrature.hpp"

namespace peakon {

namespace {

// Below this many (particle, node) pairs the OpenMP region costs more than it saves.
constexpr std::size_t kParallelThreshold = 512;

// A[i * Q + q] = sum_j p_j f2(y - x_j), B[...] = sum_j p_j f1(y - x_j) at y = x_i + z_q.
// Positions enter only through the differences rel[i] - rel[j].
void node_sums(std::span<const double> p, std::span<const double> rel, const Mollifier& moll,
               std::vector<double>& a, std::vector<double>& b, bool parallel) {
  const std::size_t n = p.size();
  const auto z = moll.offsets();
  const std::size_t nq = z.size();
  const std::size_t total = n * nq;
  a.resize(total);
  b.resize(total);
  const long long count = static_cast<long long>(total);
#pragma omp parallel for schedule(static) if (parallel && total >= kParallelThreshold)
  for (long long idx = 0; idx < count; ++idx) {
    const std::size_t i = static_cast<std::size_t>(idx) / nq;
    const std::size_t q = static_cast<std::size_t>(idx) % nq;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (rel[i] - rel[j]) + z[q];
      sa += p[j] * moll.f2(d);
      sb += p[j] * moll.f1(d);
    }
    a[idx] = sa;
    b[idx] = sb;
  }
}

void check_finite(const std::vector<double>& v, std::size_t nq, const char* what) {
  for (std::size_t idx = 0; idx < v.size(); ++idx) {
    if (!std::isfinite(v[idx])) {
      throw NumericalAbort(std::string("velocity_field: non-finite ") + what + " for particle " +
                           std::to_string(idx / nq + 1) + " at quadrature node " + std::to_string(idx % nq));
    }
  }
}

std::vector<double> velocity_impl(const PeakonEnsemble& ens, const Mollifier& moll, bool parallel) {
  if (!ens.is_strictly_increasing()) {
    throw std::invalid_argument("velocity_field: positions must be strictly increasing");
  }
  const auto p = ens.amplitudes();
  const auto x = ens.positions();
  std::vector<double> a;
  std::vector<double> b;
  node_sums(p, x, moll, a, b, parallel);
  const auto w = moll.weights();
  const std::size_t nq = w.size();
  check_finite(a, nq, "f2 sum");
  check_finite(b, nq, "f1 sum");
  std::vector<double> v(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) s += w[q] * 4.0 * a[i * nq + q] * b[i * nq + q];
    v[i] = s;
  }
  return v;
}

}  // namespace

double RegDynConfig::resolved_dt() const {
  if (dt) {
    if (!(*dt > 0.0)) throw ConfigError("dt must be positive");
    return *dt;
  }
  return std::min(moll.epsilon() / 20.0, 1e-3);
}

std::vector<double> velocity_field(const PeakonEnsemble& ens, const Mollifier& moll) {
  return velocity_impl(ens, moll, true);
}

std::vector<double> velocity_field_serial(const PeakonEnsemble& ens, const Mollifier& moll) {
  return velocity_impl(ens, moll, false);
}

void regularized_gap_rhs(std::span<const double> amplitudes, std::span<const double> state,
                         const Mollifier& moll, std::span<double> rates, bool parallel) {
  const std::size_t n = amplitudes.size();
  if (state.size() != n || rates.size() != n) throw std::invalid_argument("regularized_gap_rhs: size mismatch");
  // Positions relative to x_1.
  std::vector<double> rel(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) rel[k] = rel[k - 1] + state[k];

  std::vector<double> a;
  std::vector<double> b;
  node_sums(amplitudes, rel, moll, a, b, parallel);
  const auto z = moll.offsets();
  const auto w = moll.weights();
  const std::size_t nq = w.size();
  check_finite(a, nq, "f2 sum");
  check_finite(b, nq, "f1 sum");

  // Increments across gap k: da = A_{k+1} - A_k, db = B_{k+1} - B_k at matching nodes.
  // Wide gaps difference the sums directly; narrow gaps sum per-pair Taylor increments.
  const double narrow = 1e-3 * moll.epsilon();
  std::vector<double> da(n > 1 ? (n - 1) * nq : 0);
  std::vector<double> db(da.size());
  const long long count = static_cast<long long>(da.size());
#pragma omp parallel for schedule(static) if (parallel && da.size() >= kParallelThreshold)
  for (long long idx = 0; idx < count; ++idx) {
    const std::size_t k = static_cast<std::size_t>(idx) / nq;
    const std::size_t q = static_cast<std::size_t>(idx) % nq;
    const double gap = state[k + 1];
    if (gap >= narrow) {
      da[idx] = a[(k + 1) * nq + q] - a[k * nq + q];
      db[idx] = b[(k + 1) * nq + q] - b[k * nq + q];
      continue;
    }
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (rel[k] - rel[j]) + z[q];
      sa += amplitudes[j] * moll.f2_increment(d, gap);
      sb += amplitudes[j] * moll.f1_increment(d, gap);
    }
    da[idx] = sa;
    db[idx] = sb;
  }

  double v1 = 0.0;
  for (std::size_t q = 0; q < nq; ++q) v1 += w[q] * 4.0 * a[q] * b[q];
  rates[0] = v1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const std::size_t lo = k * nq + q;
      const std::size_t hi = (k + 1) * nq + q;
      s += w[q] * 4.0 * (a[hi] * db[lo] + b[lo] * da[lo]);
    }
    rates[k + 1] = s;
  }
}

double gap_decay_rate(double total_variation_mass, const Mollifier& moll) {
  return total_variation_mass * total_variation_mass * (moll.c0() / moll.epsilon() + 1.0);
}

Trajectory integrate_regularized(const PeakonEnsemble& ens0, const RegDynConfig& cfg) {
  if (!(cfg.t_end > 0.0)) throw ConfigError("regularized: t_end must be positive");
  if (cfg.store_every == 0) throw ConfigError("regularized: store_every must be positive");
  if (!ens0.is_strictly_increasing()) {
    throw std::invalid_argument("regularized: initial positions must be strictly increasing");
  }
  const std::size_t n = ens0.size();
  const auto amps = ens0.amplitudes();
  const auto x0 = ens0.positions();

  State y(n);
  y[0] = x0[0];
  for (std::size_t k = 1; k < n; ++k) y[k] = x0[k] - x0[k - 1];

  Trajectory traj;
  traj.meta.method = "regularized";
  traj.meta.epsilon = cfg.moll.epsilon();
  traj.meta.store_every = cfg.store_every;
  traj.meta.extra["mollifier"] = to_string(cfg.moll.family());
  traj.meta.extra["quad_nodes"] = std::to_string(cfg.moll.quad_nodes());
  traj.meta.extra["integrator"] = cfg.adaptive ? "dopri5" : "rk4";
  traj.meta.extra["coordinates"] = "gaps";

  double max_speed = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  auto record = [&](double t, const State& s) {
    std::vector<double> pos(n);
    std::vector<double> gaps(n > 1 ? n - 1 : 0);
    pos[0] = s[0];
    for (std::size_t k = 1; k < n; ++k) {
      gaps[k - 1] = s[k];
      pos[k] = pos[k - 1] + s[k];
      min_gap = std::min(min_gap, s[k]);
    }
    traj.times.push_back(t);
    traj.positions.push_back(std::move(pos));
    traj.gaps.push_back(std::move(gaps));
  };
  auto check_state = [&](double t, const State& s, std::size_t step) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(s[k])) {
        throw NumericalAbort("regularized: non-finite state at step " + std::to_string(step) +
                             " (t = " + format_double(t) + ")");
      }
    }
    if (!cfg.gap_floor_check) return;
    for (std::size_t k = 1; k < n; ++k) {
      if (!(s[k] > 0.0)) {
        throw NumericalAbort("regularized: gap " + std::to_string(k) + " collapsed to " + format_double(s[k]) +
                             " at step " + std::to_string(step) + " (t = " + format_double(t) +
                             "); dt is too large for this epsilon");
      }
    }
  };
  auto track_speed = [&](const State& rates) {
    double v = rates[0];
    max_speed = std::max(max_speed, std::fabs(v));
    for (std::size_t k = 1; k < n; ++k) {
      v += rates[k];
      max_speed = std::max(max_speed, std::fabs(v));
    }
  };
  auto rhs = [&](double, const State& s, State& out) { regularized_gap_rhs(amps, s, cfg.moll, out); };

  record(0.0, y);
  if (!cfg.adaptive) {
    const double dt = cfg.resolved_dt();
    const std::size_t steps = fixed_step_count(cfg.t_end, dt);
    const double h = cfg.t_end / static_cast<double>(steps);
    traj.meta.dt = h;
    traj.meta.steps = steps;
    Rk4Stepper stepper(n);
    for (std::size_t step = 1; step <= steps; ++step) {
      const double t0 = h * static_cast<double>(step - 1);
      stepper.step(rhs, t0, y, h);
      track_speed(stepper.last_slope());
      const double t = step == steps ? cfg.t_end : h * static_cast<double>(step);
      check_state(t, y, step);
      if (step % cfg.store_every == 0 || step == steps) record(t, y);
    }
  } else {
    AdaptiveOptions opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.rtol * 1e-4;
    opt.h_initial = cfg.resolved_dt();
    std::size_t step = 0;
    State rates(n);
    const std::size_t accepted = integrate_dopri5(rhs, 0.0, y, cfg.t_end, opt, [&](double t, const State& s) {
      ++step;
      check_state(t, s, step);
      rhs(t, s, rates);
      track_speed(rates);
      if (step % cfg.store_every == 0 || t == cfg.t_end) record(t, s);
    });
    traj.meta.dt = opt.h_initial;
    traj.meta.steps = accepted;
    traj.meta.extra["rtol"] = format_double(cfg.rtol);
  }
  if (traj.times.size() >= 2 && traj.times[traj.times.size() - 2] == traj.times.back()) {
    traj.times.pop_back();
    traj.positions.pop_back();
    traj.gaps.pop_back();
  }
  traj.meta.extra["max_speed"] = format_double(max_speed);
  if (n > 1) traj.meta.extra["min_gap"] = format_double(min_gap);
  return traj;
}

ConsistencyResult consistency_error(const Trajectory& traj, std::span<const double> amplitudes,
                                    const TestFunction& phi, const Mollifier& moll) {
  ConsistencyResult result;
  if (traj.size() < 2) throw std::invalid_argument("consistency_error: trajectory needs at least two samples");
  if (traj.particles() != amplitudes.size()) {
    throw std::invalid_argument("consistency_error: amplitude count does not match trajectory");
  }
  const double t_lo = std::max(phi.t_min(), 0.0);
  if (t_lo < traj.times.front() || phi.t_max() > traj.times.back()) {
    result.warnings.push_back("test function time support [" + format_double(phi.t_min()) + ", " +
                              format_double(phi.t_max()) + "] is not covered by the trajectory span [" +
                              format_double(traj.times.front()) + ", " + format_double(traj.times.back()) + "]");
  }
  const std::size_t n = amplitudes.size();
  const auto z = moll.offsets();
  const auto w = moll.weights();
  const std::size_t nq = z.size();

  std::vector<double> integrand(traj.size(), 0.0);
  std::vector<double> rel(n);
  std::vector<double> a;
  std::vector<double> b;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const double t = traj.times[s];
    if (t <= phi.t_min() || t >= phi.t_max()) continue;
    const auto& x = traj.positions[s];
    // Differences from the gap record when available, so narrow gaps stay exact.
    rel[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      rel[k] = rel[k - 1] + (traj.gaps.empty() ? x[k] - x[k - 1] : traj.gaps[s][k - 1]);
    }
    node_sums(amplitudes, rel, moll, a, b, false);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = x[i];
      const double phit0 = phi.derivative(xi, t, 0, 1);
      const double phix0 = phi.derivative(xi, t, 1, 0);
      double inner = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        const double y = xi + z[q];
        const double u_eps = 4.0 * a[i * nq + q] * b[i * nq + q];
        inner += w[q] * ((phi.derivative(y, t, 0, 1) - phit0) + u_eps * (phi.derivative(y, t, 1, 0) - phix0));
      }
      total += amplitudes[i] * inner;
    }
    integrand[s] = total;
  }
  result.value = composite_simpson(traj.times, integrand);
  return result;
}

}  // namespace peakon
