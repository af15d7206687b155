#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "peakon/errors.hpp"

namespace peakon {

using State = std::vector<double>;

/// Classical fourth-order Runge-Kutta step. `rhs(t, y, dydt)` writes the
/// derivative into dydt (already sized). Scratch buffers are reused across steps.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  template <class Rhs>
  void step(Rhs&& rhs, double t, State& y, double h) {
    const std::size_t n = y.size();
    rhs(t, y, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
    rhs(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    rhs(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    rhs(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

  /// Derivative at the start of the last step.
  const State& last_slope() const { return k1_; }

 private:
  State k1_, k2_, k3_, k4_, tmp_;
};

struct AdaptiveOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double h_initial = 1e-3;
  double h_min = 1e-14;
  double h_max = 0.1;
  std::size_t max_steps = 10'000'000;
};

/// Dormand-Prince 5(4) with an elementary error-per-step controller. The observer
/// is called as observer(t, y) after every accepted step, including the last one.
template <class Rhs, class Observer>
std::size_t integrate_dopri5(Rhs&& rhs, double t0, State& y, double t1, const AdaptiveOptions& opt,
                             Observer&& observer) {
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                          a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  const std::size_t n = y.size();
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n);
  double t = t0;
  double h = std::min(opt.h_initial, t1 - t0);
  std::size_t accepted = 0;
  rhs(t, y, k1);
  for (std::size_t iter = 0; t < t1; ++iter) {
    if (iter >= opt.max_steps) throw NumericalAbort("dopri5: step budget exhausted at t = " + std::to_string(t));
    if (t + h > t1) h = t1 - t;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + h / 5.0, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + 3.0 * h / 10.0, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + 4.0 * h / 5.0, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    }
    rhs(t + 8.0 * h / 9.0, tmp, k5);
    for (std::size_t i = 0; i < n; ++i) {
      tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    }
    rhs(t + h, tmp, k6);
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    }
    rhs(t + h, ynew, k7);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
      err = std::max(err, std::fabs(e) / scale);
    }
    if (!std::isfinite(err)) throw NumericalAbort("dopri5: non-finite error estimate at t = " + std::to_string(t));
    if (err <= 1.0) {
      t = (t1 - (t + h) < 1e-14 * std::max(1.0, std::fabs(t1))) ? t1 : t + h;
      y.swap(ynew);
      k1.swap(k7);
      ++accepted;
      observer(t, static_cast<const State&>(y));
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h = std::min(opt.h_max, h * factor);
    if (h < opt.h_min && t < t1) {
      throw NumericalAbort("dopri5: step size underflow at t = " + std::to_string(t));
    }
  }
  return accepted;
}

/// Number of fixed steps so that steps * h lands exactly on t_end with h <= dt.
inline std::size_t fixed_step_count(double t_end, double dt) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw ConfigError("t_end and dt must be positive");
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

}  // namespace peakon
