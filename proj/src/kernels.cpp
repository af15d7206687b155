#include "peakon/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "peakon/quadrature.hpp"

namespace peakon {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kInvSqrtPi = 0.564189583547756286948079451561;

// (1 - s^2)^4 = 1 - 4 s^2 + 6 s^4 - 4 s^6 + s^8, coefficients by power.
constexpr std::array<double, 9> kBumpPoly = {1, 0, -4, 0, 6, 0, -4, 0, 1};

double bump_poly_derivative(double s, int order) {
  double sum = 0.0;
  for (int p = static_cast<int>(kBumpPoly.size()) - 1; p >= order; --p) {
    double coef = kBumpPoly[p];
    if (coef == 0.0) continue;
    for (int k = 0; k < order; ++k) coef *= (p - k);
    sum += coef * std::pow(s, p - order);
  }
  return sum;
}

}  // namespace

std::string to_string(MollifierFamily family) {
  switch (family) {
    case MollifierFamily::gaussian:
      return "gaussian";
    case MollifierFamily::polynomial_bump:
      return "polynomial_bump";
  }
  return "unknown";
}

MollifierFamily mollifier_family_from_string(const std::string& name) {
  if (name == "gaussian") return MollifierFamily::gaussian;
  if (name == "polynomial_bump" || name == "bump") return MollifierFamily::polynomial_bump;
  throw ConfigError("unknown mollifier family '" + name + "'");
}

double erfcx(double w) {
  if (w < 26.0) return std::exp(w * w) * std::erfc(w);
  // Asymptotic series; the first omitted term is below 1e-15 relative for w >= 26.
  const double inv2w2 = 1.0 / (2.0 * w * w);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * inv2w2;
    sum += term;
  }
  return sum * kInvSqrtPi / w;
}

Mollifier::Mollifier(double epsilon, int quad_nodes, MollifierFamily family)
    : epsilon_(epsilon), quad_nodes_(quad_nodes), family_(family) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("Mollifier: epsilon must be positive and finite");
  }
  if (quad_nodes < 2) throw std::invalid_argument("Mollifier: quad_nodes must be >= 2");

  auto rule = std::make_shared<Rule>();
  if (family == MollifierFamily::gaussian) {
    const QuadratureRule gh = gauss_hermite(quad_nodes);
    rule->offsets.resize(gh.size());
    rule->weights.resize(gh.size());
    for (std::size_t k = 0; k < gh.size(); ++k) {
      rule->offsets[k] = epsilon * std::numbers::sqrt2 * gh.nodes[k];
      rule->weights[k] = gh.weights[k] * kInvSqrtPi;
    }
  } else {
    const QuadratureRule& gl = gauss_legendre_cached(32);
    double mass = 0.0;
    for (std::size_t k = 0; k < gl.size(); ++k) mass += gl.weights[k] * bump_poly_derivative(gl.nodes[k], 0);
    rule->bump_norm = 1.0 / mass;
    double moment = 0.0;
    for (std::size_t k = 0; k < gl.size(); ++k) {
      const double s = gl.nodes[k];
      moment += gl.weights[k] * rule->bump_norm * bump_poly_derivative(s, 0) * std::exp(epsilon * s);
    }
    rule->bump_moment = moment;

    const QuadratureRule conv = gauss_legendre(quad_nodes);
    rule->offsets.resize(conv.size());
    rule->weights.resize(conv.size());
    for (std::size_t k = 0; k < conv.size(); ++k) {
      rule->offsets[k] = epsilon * conv.nodes[k];
      rule->weights[k] = conv.weights[k] * rule->bump_norm * bump_poly_derivative(conv.nodes[k], 0);
    }
  }
  rule_ = std::move(rule);
}

double Mollifier::c0() const {
  return family_ == MollifierFamily::gaussian ? kInvSqrt2Pi : rule_->bump_norm;
}

double Mollifier::density_derivative(double x, int order) const {
  if (order < 0 || order > 3) throw std::invalid_argument("density_derivative: order must be in [0, 3]");
  const double u = x / epsilon_;
  const double scale = std::pow(epsilon_, -1 - order);
  if (family_ == MollifierFamily::gaussian) {
    const double phi = kInvSqrt2Pi * std::exp(-0.5 * u * u);
    double hermite = 1.0;
    switch (order) {
      case 1: hermite = -u; break;
      case 2: hermite = u * u - 1.0; break;
      case 3: hermite = -(u * u * u - 3.0 * u); break;
      default: break;
    }
    return scale * hermite * phi;
  }
  if (std::fabs(u) >= 1.0) return 0.0;
  return scale * rule_->bump_norm * bump_poly_derivative(u, order);
}

double Mollifier::f1(double x) const {
  return family_ == MollifierFamily::gaussian ? f1_gaussian(x) : f1_bump(x);
}

double Mollifier::f1_gaussian(double x) const {
  // f1(x) = 1/2 e^{eps^2/2 - x} Phi((x - eps^2)/eps). For negative arguments of Phi
  // the exponentials are combined to exp(-x^2 / (2 eps^2)) and the tail is carried
  // by erfcx, so neither factor overflows.
  const double eps = epsilon_;
  const double z = (x - eps * eps) / eps;
  if (z >= 0.0) {
    const double phi = 1.0 - 0.5 * std::erfc(z / std::numbers::sqrt2);
    return 0.5 * std::exp(0.5 * eps * eps - x) * phi;
  }
  const double w = -z / std::numbers::sqrt2;
  return 0.25 * std::exp(-0.5 * (x / eps) * (x / eps)) * erfcx(w);
}

double Mollifier::f1_bump(double x) const {
  const double eps = epsilon_;
  if (x <= -eps) return 0.0;
  if (x >= eps) return 0.5 * std::exp(-x) * rule_->bump_moment;
  const QuadratureRule& gl = gauss_legendre_cached(32);
  const double upper = x / eps;
  const double norm = rule_->bump_norm;
  return 0.5 * integrate_gl(gl, -1.0, upper, [&](double s) {
           return norm * bump_poly_derivative(s, 0) * std::exp(eps * s - x);
         });
}

double Mollifier::f1_increment(double x, double step) const {
  if (std::fabs(step) >= 1e-3 * epsilon_) return f1(x + step) - f1(x);
  // Taylor expansion through the derivative recursion f1' = rho/2 - f1.
  const double r0 = 0.5 * density_derivative(x, 0);
  const double r1 = 0.5 * density_derivative(x, 1);
  const double r2 = 0.5 * density_derivative(x, 2);
  const double r3 = 0.5 * density_derivative(x, 3);
  const double f = f1(x);
  const double d1 = r0 - f;
  const double d2 = r1 - d1;
  const double d3 = r2 - d2;
  const double d4 = r3 - d3;
  const double h = step;
  return h * (d1 + h * (d2 / 2.0 + h * (d3 / 6.0 + h * d4 / 24.0)));
}

double mollified_gx_square_at_zero(const Mollifier& moll) {
  return moll.convolve(
      [&](double y) {
        const double gx = moll.gx(y);
        return gx * gx;
      },
      0.0);
}

double pair_speed_integral(const Mollifier& moll, double s) {
  return moll.convolve(
      [&](double y) {
        return 4.0 * (moll.f1(y) * moll.f2(y) - moll.f1(s + y) * moll.f2(s + y));
      },
      0.0);
}

double pair_speed_tail_bound(const Mollifier& moll, double delta) {
  const double shift = delta / moll.epsilon();
  if (moll.family() == MollifierFamily::gaussian) {
    // Y - X ~ N(0, 2) for independent standard normals.
    return 0.5 * std::erfc(shift / 2.0);
  }
  // P(Y - X > shift) for two independent bump variables; the difference lives on [-2, 2].
  if (shift >= 2.0) return 0.0;
  const QuadratureRule& gl = gauss_legendre_cached(32);
  const Mollifier unit(1.0, 32, MollifierFamily::polynomial_bump);
  auto rho = [&](double s) { return unit.density(s); };
  return integrate_gl(gl, -1.0, 1.0, [&](double x) {
    const double lo = std::min(1.0, x + shift);
    return rho(x) * integrate_gl(gl, lo, 1.0, rho);
  });
}

}  // namespace peakon
