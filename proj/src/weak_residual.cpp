#include "peakon/weak_residual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "peakon/limit_dynamics.hpp"
#include "peakon/quadrature.hpp"

namespace peakon {

std::vector<double> defect(std::span<const double> positions, std::span<const double> amplitudes,
                           std::span<const double> velocities) {
  if (velocities.size() != positions.size()) throw std::invalid_argument("defect: size mismatch");
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      throw std::invalid_argument("defect: positions must be distinct and increasing; use weak_residual for clusters");
    }
  }
  std::vector<double> d = ordered_rhs(positions, amplitudes);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= velocities[i];
  return d;
}

namespace {

struct FieldValue {
  double u = 0.0;
  double ux = 0.0;
};

FieldValue field(std::span<const double> p, std::span<const double> x, double y, const Mollifier* moll) {
  FieldValue f;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = y - x[j];
    if (moll) {
      f.u += p[j] * moll->g(d);
      f.ux += p[j] * moll->gx(d);
    } else {
      f.u += p[j] * kernel_G(d);
      f.ux += p[j] * kernel_Gx(d);
    }
  }
  return f;
}

// int over x of the weak-form integrand at fixed t.
double x_integral(std::span<const double> p, std::span<const double> x, const TestFunction& phi, double t,
                  int level, const Mollifier* moll) {
  std::vector<double> breaks{phi.x_min(), phi.x_max()};
  auto add = [&](double b) {
    if (b > phi.x_min() && b < phi.x_max()) breaks.push_back(b);
  };
  for (double xi : x) {
    add(xi);
    if (moll) {
      for (double k : {1.0, 2.0, 4.0, 8.0}) {
        add(xi - k * moll->epsilon());
        add(xi + k * moll->epsilon());
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const QuadratureRule& gl = gauss_legendre_cached(16);
  const int sub = 1 << level;
  auto integrand = [&](double y) {
    const FieldValue f = field(p, x, y, moll);
    const double u = f.u;
    const double ux = f.ux;
    const double phi_t = phi.derivative(y, t, 0, 1);
    const double phi_txx = phi.derivative(y, t, 2, 1);
    const double phi_x = phi.derivative(y, t, 1, 0);
    const double phi_xx = phi.derivative(y, t, 2, 0);
    const double phi_xxx = phi.derivative(y, t, 3, 0);
    return u * (phi_t - phi_txx) - ux * ux * ux * phi_xx / 3.0 - u * u * u * phi_xxx / 3.0 +
           (u * u * u + u * ux * ux) * phi_x;
  };
  double total = 0.0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double width = (breaks[b + 1] - breaks[b]) / sub;
    for (int s = 0; s < sub; ++s) {
      const double lo = breaks[b] + width * s;
      total += integrate_gl(gl, lo, lo + width, integrand);
    }
  }
  return total;
}

}  // namespace

double weak_functional(const Trajectory& traj, std::span<const double> amplitudes, const TestFunction& phi,
                       int level, const std::optional<Mollifier>& moll) {
  if (traj.size() < 2) throw std::invalid_argument("weak_functional: trajectory needs at least two samples");
  if (traj.particles() != amplitudes.size()) throw std::invalid_argument("weak_functional: amplitude count mismatch");
  const double t_lo = std::max(phi.t_min(), traj.times.front());
  const double t_hi = phi.t_max();
  if (t_hi <= t_lo) return 0.0;
  if (t_hi > traj.times.back()) {
    throw std::invalid_argument("weak_functional: test function support ends at t = " + format_double(t_hi) +
                                " beyond the trajectory end " + format_double(traj.times.back()));
  }
  const Mollifier* mp = moll ? &*moll : nullptr;
  const QuadratureRule& gl = gauss_legendre_cached(2 + level);
  std::vector<double> pos(amplitudes.size());

  auto first = std::upper_bound(traj.times.begin(), traj.times.end(), t_lo);
  std::size_t k = static_cast<std::size_t>(first - traj.times.begin());
  double a = t_lo;
  double total = 0.0;
  while (a < t_hi) {
    const double b = std::min(k < traj.size() ? traj.times[k] : t_hi, t_hi);
    // Positions are linear on [times[k-1], times[k]].
    const std::size_t lo_idx = k - 1;
    const std::size_t hi_idx = std::min(k, traj.size() - 1);
    const double t0 = traj.times[lo_idx];
    const double t1 = traj.times[hi_idx];
    total += integrate_gl(gl, a, b, [&](double t) {
      const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
      for (std::size_t i = 0; i < pos.size(); ++i) {
        pos[i] = traj.positions[lo_idx][i] + w * (traj.positions[hi_idx][i] - traj.positions[lo_idx][i]);
      }
      return x_integral(amplitudes, pos, phi, t, level, mp);
    });
    a = b;
    ++k;
  }
  return total;
}

ResidualReport weak_residual(const Trajectory& traj, std::span<const double> amplitudes, const TestFunction& phi,
                             const ResidualOptions& options) {
  if (options.levels < 3) throw std::invalid_argument("weak_residual: need at least three refinement levels");
  ResidualReport report;
  report.phi = phi;
  double initial = 0.0;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) initial += amplitudes[i] * phi(traj.positions.front()[i], 0.0);
  for (int level = 0; level < options.levels; ++level) {
    const double v = weak_functional(traj, amplitudes, phi, level, options.moll) + initial;
    report.history.emplace_back(level, v);
  }
  const std::size_t n = report.history.size();
  report.value = report.history.back().second;
  const double last = std::fabs(report.history[n - 1].second - report.history[n - 2].second);
  const double prev = std::fabs(report.history[n - 2].second - report.history[n - 3].second);
  report.converged = last <= std::max(prev, 1e-12);
  report.consistent = report.converged && std::fabs(report.value) <= options.tolerance;
  return report;
}

std::string residual_report_json(const ResidualReport& report) {
  nlohmann::json j;
  j["phi"] = {{"id", report.phi.id},
              {"centers", {report.phi.x_center, report.phi.t_center}},
              {"radii", {report.phi.x_radius, report.phi.t_radius}}};
  j["value"] = report.value;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [level, v] : report.history) hist.push_back({{"level", level}, {"value", v}});
  j["history"] = hist;
  j["converged"] = report.converged;
  j["verdict"] = report.verdict();
  return j.dump(2);
}

}  // namespace peakon
