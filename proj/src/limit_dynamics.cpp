#include "peakon/limit_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "peakon/errors.hpp"
#include "peakon/kernels.hpp"
#include "peakon/ode.hpp"

namespace peakon {

ClusterState ClusterState::from_positions(std::span<const double> amplitudes, std::span<const double> positions) {
  if (amplitudes.size() != positions.size() || amplitudes.empty()) {
    throw std::invalid_argument("ClusterState: amplitudes and positions must be nonempty and equal length");
  }
  ClusterState st;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i > 0 && positions[i] < positions[i - 1]) {
      throw std::invalid_argument("ClusterState: positions must be nondecreasing");
    }
    if (i > 0 && positions[i] == positions[i - 1]) {
      st.clusters.back().push_back(i);
      st.amplitudes.back() += amplitudes[i];
    } else {
      st.clusters.push_back({i});
      st.positions.push_back(positions[i]);
      st.amplitudes.push_back(amplitudes[i]);
    }
  }
  return st;
}

std::size_t ClusterState::particles() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.size();
  return n;
}

std::vector<double> ClusterState::particle_positions() const {
  std::vector<double> out(particles());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (std::size_t i : clusters[c]) out[i] = positions[c];
  }
  return out;
}

void ClusterState::validate() const {
  if (clusters.size() != positions.size() || clusters.size() != amplitudes.size()) {
    throw std::invalid_argument("ClusterState: inconsistent sizes");
  }
  std::size_t next = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (clusters[c].empty()) throw std::invalid_argument("ClusterState: empty cluster");
    for (std::size_t i : clusters[c]) {
      if (i != next++) throw std::invalid_argument("ClusterState: clusters must be contiguous index blocks");
    }
    if (c > 0 && !(positions[c] > positions[c - 1])) {
      throw std::invalid_argument("ClusterState: cluster positions must be strictly increasing");
    }
  }
}

std::vector<double> limiting_rhs(const ClusterState& state, std::span<const double> amplitudes) {
  const std::vector<double> x = state.particle_positions();
  if (x.size() != amplitudes.size()) throw std::invalid_argument("limiting_rhs: amplitude count mismatch");
  std::vector<double> v(state.size());
  for (std::size_t c = 0; c < state.size(); ++c) {
    const double xi = state.positions[c];
    double u = 0.0;
    double ux_far = 0.0;
    double own = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      u += amplitudes[j] * kernel_G(xi - x[j]);
      if (x[j] != xi) {
        ux_far += amplitudes[j] * kernel_Gx(xi - x[j]);
      } else {
        own += amplitudes[j];
      }
    }
    v[c] = u * u - ux_far * ux_far - own * own / 12.0;
  }
  return v;
}

namespace {

// Ordered formula in index order; exponents are nonpositive whenever positions are ordered.
void index_order_rhs(std::span<const double> x, std::span<const double> p, std::span<double> v) {
  const std::size_t n = x.size();
  std::vector<double> left(n, 0.0);
  std::vector<double> right(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) left[i] = (left[i - 1] + p[i - 1]) * std::exp(x[i - 1] - x[i]);
  for (std::size_t i = n - 1; i-- > 0;) right[i] = (right[i + 1] + p[i + 1]) * std::exp(x[i] - x[i + 1]);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = p[i] * p[i] / 6.0 + 0.5 * p[i] * left[i] + 0.5 * p[i] * right[i] + left[i] * right[i];
  }
}

}  // namespace

std::vector<double> unordered_rhs(std::span<const double> positions, std::span<const double> amplitudes,
                                  bool rank_ordered) {
  const std::size_t n = positions.size();
  if (amplitudes.size() != n) throw std::invalid_argument("unordered_rhs: size mismatch");
  std::vector<double> v(n);
  if (!rank_ordered) {
    index_order_rhs(positions, amplitudes, v);
    return v;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  std::vector<double> xs(n);
  std::vector<double> ps(n);
  for (std::size_t k = 0; k < n; ++k) {
    xs[k] = positions[order[k]];
    ps[k] = amplitudes[order[k]];
  }
  std::vector<double> vs(n);
  index_order_rhs(xs, ps, vs);
  for (std::size_t k = 0; k < n; ++k) v[order[k]] = vs[k];
  return v;
}

std::vector<double> ordered_rhs(std::span<const double> positions, std::span<const double> amplitudes) {
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      throw std::invalid_argument("ordered_rhs: positions must be strictly increasing");
    }
  }
  return unordered_rhs(positions, amplitudes, false);
}

std::string to_string(LimitMode mode) { return mode == LimitMode::sticky ? "sticky" : "dispersive_limit"; }

SplitProbe split_probe(const ClusterState& state, std::size_t c, std::span<const double> amplitudes, double gap) {
  SplitProbe best;
  const auto& block = state.clusters.at(c);
  if (block.size() < 2) return best;
  const std::size_t k = state.size();
  std::vector<double> x;
  std::vector<double> p;
  x.reserve(k + 1);
  p.reserve(k + 1);
  bool found = false;
  double left_mass = 0.0;
  for (std::size_t cut = 1; cut < block.size(); ++cut) {
    left_mass += amplitudes[block[cut - 1]];
    const double right_mass = state.amplitudes[c] - left_mass;
    const double total = left_mass + right_mass;
    // Offsets keep the amplitude-weighted mean of the cluster fixed.
    double a = 0.5 * gap;
    double b = 0.5 * gap;
    if (std::fabs(total) > 1e-14 * (std::fabs(left_mass) + std::fabs(right_mass))) {
      a = gap * right_mass / total;
      b = gap * left_mass / total;
    }
    x.clear();
    p.clear();
    for (std::size_t m = 0; m < k; ++m) {
      if (m == c) {
        x.push_back(state.positions[c] - a);
        p.push_back(left_mass);
        x.push_back(state.positions[c] + b);
        p.push_back(right_mass);
      } else {
        x.push_back(state.positions[m]);
        p.push_back(state.amplitudes[m]);
      }
    }
    const std::vector<double> v = unordered_rhs(x, p, false);
    const double rel = v[c + 1] - v[c];
    if (!found || rel > best.value) {
      best.value = rel;
      best.left_size = cut;
      found = true;
    }
  }
  return best;
}

namespace {

class ClusterIntegrator {
 public:
  ClusterIntegrator(const PeakonEnsemble& ens0, const LimitDynConfig& cfg)
      : cfg_(cfg),
        amps_(ens0.amplitudes().begin(), ens0.amplitudes().end()),
        state_(ClusterState::from_positions(ens0.amplitudes(), ens0.positions())) {}

  Trajectory run() {
    const std::size_t steps = fixed_step_count(cfg_.t_end, cfg_.dt);
    const double h = cfg_.t_end / static_cast<double>(steps);
    traj_.meta.method = to_string(cfg_.mode);
    traj_.meta.dt = h;
    traj_.meta.steps = steps;
    traj_.meta.store_every = cfg_.store_every;
    traj_.meta.extra["collide_tol"] = format_double(cfg_.collide_tol);
    if (cfg_.mode == LimitMode::dispersive_limit) {
      traj_.meta.extra["split_probe_gap"] = format_double(cfg_.split_probe_gap);
      traj_.meta.extra["split_rule"] = amps_.size() >= 4
                                           ? "contiguous-partition probe (experimental for four or more peakons)"
                                           : "contiguous-partition probe";
    }
    double t = 0.0;
    record(t);
    for (std::size_t step = 1; step <= steps; ++step) {
      const double target = step == steps ? cfg_.t_end : h * static_cast<double>(step);
      std::size_t events = 0;
      while (true) {
        if (events > cfg_.max_events_per_step) {
          throw NumericalAbort("limit dynamics: more than " + std::to_string(cfg_.max_events_per_step) +
                               " events in step " + std::to_string(step) + " (t = " + format_double(t) + ")");
        }
        if (apply_immediate_events(t)) {
          ++events;
          continue;
        }
        const double tau = target - t;
        if (!(tau > 0.0)) break;
        const State x0 = state_.positions;
        const State x1 = advance(x0, tau);
        const bool merge_hit = min_gap(x1) <= cfg_.collide_tol;
        const bool split_hit = cfg_.mode == LimitMode::dispersive_limit && max_probe(x1) > 0.0;
        if (!merge_hit && !split_hit) {
          state_.positions = x1;
          t = target;
          break;
        }
        double t_merge = std::numeric_limits<double>::infinity();
        double t_split = std::numeric_limits<double>::infinity();
        if (merge_hit) t_merge = locate_merge(x0, tau, step, t);
        if (split_hit) t_split = locate_split(x0, tau);
        const double s = std::min(t_merge, t_split);
        state_.positions = advance(x0, s);
        t = (s == tau) ? target : t + s;
        if (t_merge <= t_split) {
          merge_close_pairs(t);
        } else {
          split_best(t);
        }
        ++events;
        record(t);
      }
      if (step % cfg_.store_every == 0 || step == steps) record(t);
    }
    traj_.meta.extra["final_clusters"] = std::to_string(state_.size());
    return std::move(traj_);
  }

 private:
  State advance(const State& x0, double tau) {
    if (tau == 0.0) return x0;
    State x = x0;
    Rk4Stepper stepper(x.size());
    auto rhs = [&](double, const State& y, State& out) {
      const std::vector<double> v = unordered_rhs(y, state_.amplitudes, false);
      std::copy(v.begin(), v.end(), out.begin());
    };
    stepper.step(rhs, 0.0, x, tau);
    return x;
  }

  static double min_gap(const State& x) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t c = 1; c < x.size(); ++c) g = std::min(g, x[c] - x[c - 1]);
    return g;
  }

  double max_probe(const State& x) {
    ClusterState probe = state_;
    probe.positions = x;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < probe.size(); ++c) {
      if (probe.clusters[c].size() < 2) continue;
      best = std::max(best, split_probe(probe, c, amps_, cfg_.split_probe_gap).value);
    }
    return best;
  }

  double locate_merge(const State& x0, double tau, std::size_t step, double t) {
    double lo = 0.0;
    double hi = tau;
    if (!(min_gap(x0) > cfg_.collide_tol)) {
      throw NumericalAbort("limit dynamics: event location failed in step " + std::to_string(step) +
                           " (t = " + format_double(t) + "): no gap sign change inside the step");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = min_gap(advance(x0, mid));
      if (std::fabs(g) <= cfg_.collide_tol) return mid;
      if (g > cfg_.collide_tol) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-15 * std::max(1.0, t)) break;
    }
    return hi;
  }

  double locate_split(const State& x0, double tau) {
    double lo = 0.0;
    double hi = tau;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (max_probe(advance(x0, mid)) > 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  }

  // Merges or splits that are due at the current state (used right after another event).
  bool apply_immediate_events(double t) {
    if (state_.size() > 1 && min_gap(state_.positions) <= cfg_.collide_tol) {
      merge_close_pairs(t);
      record(t);
      return true;
    }
    if (cfg_.mode == LimitMode::dispersive_limit && max_probe(state_.positions) > 0.0) {
      split_best(t);
      record(t);
      return true;
    }
    return false;
  }

  void merge_close_pairs(double t) {
    ClusterState next;
    std::size_t c = 0;
    while (c < state_.size()) {
      std::size_t end = c + 1;
      while (end < state_.size() && state_.positions[end] - state_.positions[end - 1] <= cfg_.collide_tol) ++end;
      std::vector<std::size_t> block;
      double mass = 0.0;
      double weight = 0.0;
      double moment = 0.0;
      for (std::size_t m = c; m < end; ++m) {
        block.insert(block.end(), state_.clusters[m].begin(), state_.clusters[m].end());
        mass += state_.amplitudes[m];
        weight += std::fabs(state_.amplitudes[m]);
        moment += std::fabs(state_.amplitudes[m]) * state_.positions[m];
      }
      if (end - c > 1) traj_.events.push_back(Event{t, EventKind::merge, block, {}});
      next.clusters.push_back(std::move(block));
      next.positions.push_back(end - c > 1 ? moment / weight : state_.positions[c]);
      next.amplitudes.push_back(mass);
      c = end;
    }
    state_ = std::move(next);
  }

  void split_best(double t) {
    std::size_t best_c = 0;
    SplitProbe best;
    best.value = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < state_.size(); ++c) {
      if (state_.clusters[c].size() < 2) continue;
      const SplitProbe probe = split_probe(state_, c, amps_, cfg_.split_probe_gap);
      if (probe.value > best.value) {
        best = probe;
        best_c = c;
      }
    }
    const auto& block = state_.clusters[best_c];
    std::vector<std::size_t> left(block.begin(), block.begin() + static_cast<long>(best.left_size));
    std::vector<std::size_t> right(block.begin() + static_cast<long>(best.left_size), block.end());
    double left_mass = 0.0;
    for (std::size_t i : left) left_mass += amps_[i];
    const double right_mass = state_.amplitudes[best_c] - left_mass;
    const double total = left_mass + right_mass;
    const double gap = cfg_.split_probe_gap;
    double a = 0.5 * gap;
    double b = 0.5 * gap;
    if (std::fabs(total) > 1e-14 * (std::fabs(left_mass) + std::fabs(right_mass))) {
      a = gap * right_mass / total;
      b = gap * left_mass / total;
    }
    const double xc = state_.positions[best_c];
    traj_.events.push_back(Event{t, EventKind::split, block, left});

    ClusterState next;
    for (std::size_t c = 0; c < state_.size(); ++c) {
      if (c == best_c) {
        next.clusters.push_back(left);
        next.positions.push_back(xc - a);
        next.amplitudes.push_back(left_mass);
        next.clusters.push_back(right);
        next.positions.push_back(xc + b);
        next.amplitudes.push_back(right_mass);
      } else {
        next.clusters.push_back(state_.clusters[c]);
        next.positions.push_back(state_.positions[c]);
        next.amplitudes.push_back(state_.amplitudes[c]);
      }
    }
    state_ = std::move(next);
  }

  void record(double t) {
    std::vector<double> pos = state_.particle_positions();
    if (!traj_.times.empty() && t <= traj_.times.back()) {
      traj_.positions.back() = std::move(pos);
      return;
    }
    traj_.times.push_back(t);
    traj_.positions.push_back(std::move(pos));
  }

  LimitDynConfig cfg_;
  std::vector<double> amps_;
  ClusterState state_;
  Trajectory traj_;
};

}  // namespace

Trajectory limit_integrate(const PeakonEnsemble& ens0, const LimitDynConfig& cfg) {
  if (!(cfg.collide_tol > 0.0)) throw ConfigError("collide_tol must be positive");
  if (!(cfg.split_probe_gap > cfg.collide_tol)) throw ConfigError("split_probe_gap must exceed collide_tol");
  if (!(cfg.t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (cfg.store_every == 0) throw ConfigError("store_every must be positive");
  if (!ens0.is_nondecreasing()) throw std::invalid_argument("limit dynamics: initial positions must be nondecreasing");
  return ClusterIntegrator(ens0, cfg).run();
}

Trajectory sticky_integrate(const PeakonEnsemble& ens0, LimitDynConfig cfg) {
  cfg.mode = LimitMode::sticky;
  return limit_integrate(ens0, cfg);
}

Trajectory dispersive_limit_integrate(const PeakonEnsemble& ens0, LimitDynConfig cfg) {
  cfg.mode = LimitMode::dispersive_limit;
  return limit_integrate(ens0, cfg);
}

Trajectory naive_integrate(const PeakonEnsemble& ens0, double dt, double t_end, bool rank_ordered) {
  const std::size_t steps = fixed_step_count(t_end, dt);
  const double h = t_end / static_cast<double>(steps);
  const std::vector<double> p(ens0.amplitudes().begin(), ens0.amplitudes().end());
  State x(ens0.positions().begin(), ens0.positions().end());
  Trajectory traj;
  traj.meta.method = rank_ordered ? "crossing_continuation" : "fixed_label_continuation";
  traj.meta.dt = h;
  traj.meta.steps = steps;
  traj.times.push_back(0.0);
  traj.positions.push_back(x);
  Rk4Stepper stepper(x.size());
  auto rhs = [&](double, const State& y, State& out) {
    const std::vector<double> v = unordered_rhs(y, p, rank_ordered);
    std::copy(v.begin(), v.end(), out.begin());
  };
  for (std::size_t step = 1; step <= steps; ++step) {
    stepper.step(rhs, h * static_cast<double>(step - 1), x, h);
    traj.times.push_back(step == steps ? t_end : h * static_cast<double>(step));
    traj.positions.push_back(x);
  }
  return traj;
}

std::optional<double> two_peakon_collision_time(double c1, double c2, double p1, double p2) {
  if (!(c1 < c2)) throw std::invalid_argument("two_peakon_collision_time: requires c1 < c2");
  const double rel = p1 * p1 - p2 * p2;
  if (!(rel > 0.0)) return std::nullopt;
  return 6.0 * (c2 - c1) / rel;
}

ThreePeakonThresholds three_peakon_thresholds(double p1, double p2, double p3, double t_merge,
                                              double s2_at_merge) {
  if (!(p1 > p2 && p2 > 0.0 && p3 > 0.0 && p1 + p2 > p3)) {
    throw std::invalid_argument("three_peakon_thresholds: requires p1 > p2 > 0, p3 > 0 and p1 + p2 > p3");
  }
  ThreePeakonThresholds out;
  out.s2_star = std::log(3.0 * p3 / (p1 - p2));
  if (out.s2_star <= 0.0) return out;
  if (!(s2_at_merge > out.s2_star)) {
    throw std::invalid_argument("three_peakon_thresholds: S2 at the merge must exceed S2*");
  }
  const double q = p1 + p2;
  out.t2 = t_merge + 6.0 * (s2_at_merge - out.s2_star) / (q * q - p3 * p3);
  return out;
}

}  // namespace peakon
