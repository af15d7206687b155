#include "peakon/test_function.hpp"

#include <cmath>
#include <stdexcept>

namespace peakon {

TestFunction::TestFunction(double xc, double xr, double tc, double tr, std::string name)
    : x_center(xc), x_radius(xr), t_center(tc), t_radius(tr), id(std::move(name)) {
  if (!(xr > 0.0) || !(tr > 0.0)) throw std::invalid_argument("TestFunction: radii must be positive");
}

double TestFunction::bump(double s, int order) {
  const double q = 1.0 - s * s;
  // Below this q the bump and its first derivatives are under e^{-1000}.
  if (q < 1e-3) return 0.0;
  const double b = std::exp(-1.0 / q);
  if (order == 0) return b;
  // B = exp(g), g' = -2s/q^2.
  const double q2 = q * q;
  const double q3 = q2 * q;
  const double g1 = -2.0 * s / q2;
  const double g2 = -2.0 / q2 - 8.0 * s * s / q3;
  switch (order) {
    case 1:
      return b * g1;
    case 2:
      return b * (g1 * g1 + g2);
    case 3: {
      const double g3 = -24.0 * s / q3 - 48.0 * s * s * s / (q3 * q);
      return b * (g1 * g1 * g1 + 3.0 * g1 * g2 + g3);
    }
    default:
      throw std::invalid_argument("TestFunction::bump: order must be in [0, 3]");
  }
}

double TestFunction::derivative(double x, double t, int dx, int dt) const {
  if (dx < 0 || dx > 3 || dt < 0 || dt > 1) {
    throw std::invalid_argument("TestFunction::derivative: supports dx <= 3, dt <= 1");
  }
  const double sx = (x - x_center) / x_radius;
  const double st = (t - t_center) / t_radius;
  if (std::fabs(sx) >= 1.0 || std::fabs(st) >= 1.0) return 0.0;
  return bump(sx, dx) / std::pow(x_radius, dx) * bump(st, dt) / std::pow(t_radius, dt);
}

}  // namespace peakon
