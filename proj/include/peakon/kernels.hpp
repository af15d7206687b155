#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "peakon/errors.hpp"

namespace peakon {

/// Shape of the unscaled mollifier profile rho.
enum class MollifierFamily {
  gaussian,         ///< (2 pi)^{-1/2} exp(-x^2/2); closed-form f1/f2 via erfc
  polynomial_bump,  ///< c (1 - x^2)^4 on [-1, 1], normalized numerically; quadrature fallback
};

std::string to_string(MollifierFamily family);
MollifierFamily mollifier_family_from_string(const std::string& name);

/// The smoothing family rho_eps(x) = rho(x / eps) / eps together with the
/// quadrature rule used for every rho_eps-weighted integral.
///
/// Immutable after construction; copies share the precomputed rule.
class Mollifier {
 public:
  explicit Mollifier(double epsilon, int quad_nodes = 64,
                     MollifierFamily family = MollifierFamily::gaussian);

  double epsilon() const { return epsilon_; }
  int quad_nodes() const { return quad_nodes_; }
  MollifierFamily family() const { return family_; }

  /// ||rho||_inf of the unscaled profile.
  double c0() const;

  /// rho_eps(x) and its derivatives up to third order.
  double density(double x) const { return density_derivative(x, 0); }
  double density_derivative(double x, int order) const;

  /// f1(x) = 1/2 int_{-inf}^x rho_eps(y) e^{y-x} dy and f2(x) = f1(-x).
  double f1(double x) const;
  double f2(double x) const { return f1(-x); }

  /// f1(x + step) - f1(x), accurate to full relative precision when step << eps.
  double f1_increment(double x, double step) const;
  /// f2(x + step) - f2(x).
  double f2_increment(double x, double step) const { return -f1_increment(-x - step, step); }

  /// G^eps = rho_eps * G = f1 + f2.
  double g(double x) const { return f1(x) + f2(x); }
  /// d/dx G^eps = f2 - f1.
  double gx(double x) const { return f2(x) - f1(x); }

  /// Offsets z_k and weights w_k with  int rho_eps(x - y) f(y) dy ~= sum_k w_k f(x + z_k).
  std::span<const double> offsets() const { return rule_->offsets; }
  std::span<const double> weights() const { return rule_->weights; }

  /// Quadrature approximation of (rho_eps * f)(x). Throws NumericalAbort when the
  /// integrand is non-finite at any node.
  template <class F>
  double convolve(F&& f, double x) const {
    double sum = 0.0;
    const auto& z = rule_->offsets;
    const auto& w = rule_->weights;
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double v = f(x + z[k]);
      if (!std::isfinite(v)) {
        throw NumericalAbort("convolve_with_mollifier: non-finite integrand at node " +
                             std::to_string(k) + " (y = " + std::to_string(x + z[k]) + ")");
      }
      sum += w[k] * v;
    }
    return sum;
  }

 private:
  struct Rule {
    std::vector<double> offsets;
    std::vector<double> weights;
    double bump_norm = 1.0;          // c in c (1 - s^2)^4
    double bump_moment = 1.0;        // int rho(s) e^{eps s} ds
  };

  double f1_gaussian(double x) const;
  double f1_bump(double x) const;

  double epsilon_;
  int quad_nodes_;
  MollifierFamily family_;
  std::shared_ptr<const Rule> rule_;
};

/// Peakon kernel G(x) = e^{-|x|} / 2.
inline double kernel_G(double x) { return 0.5 * std::exp(-std::fabs(x)); }

/// Pointwise derivative of G away from 0; returns 0 at x = 0 by convention.
inline double kernel_Gx(double x) {
  if (x == 0.0) return 0.0;
  return x > 0.0 ? -0.5 * std::exp(-x) : 0.5 * std::exp(x);
}

inline double f1(double x, const Mollifier& moll) { return moll.f1(x); }
inline double f2(double x, const Mollifier& moll) { return moll.f2(x); }
inline double kernel_G_eps(double x, const Mollifier& moll) { return moll.g(x); }
inline double kernel_Gx_eps(double x, const Mollifier& moll) { return moll.gx(x); }

template <class F>
double convolve_with_mollifier(F&& f, double x, const Mollifier& moll) {
  return moll.convolve(std::forward<F>(f), x);
}

/// I_eps = (rho_eps * (G_x^eps)^2)(0); tends to 1/12 as eps -> 0.
double mollified_gx_square_at_zero(const Mollifier& moll);

/// Two-peakon relative-speed integral
///   4 int rho_eps(x) [f1 f2 (x) - f1 f2 (s + x)] dx,
/// which tends to 1/6 uniformly in s >= delta > 0.
double pair_speed_integral(const Mollifier& moll, double s);

/// Upper bound on the s-dependent part of pair_speed_integral for all s >= delta:
///   int rho(x) int_{x + delta/eps}^inf rho(y) dy dx.
double pair_speed_tail_bound(const Mollifier& moll, double delta);

/// Scaled complementary error function exp(w^2) erfc(w), finite for all w >= 0.
double erfcx(double w);

}  // namespace peakon
