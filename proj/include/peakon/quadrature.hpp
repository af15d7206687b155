#pragma once

#include <span>
#include <vector>

namespace peakon {

/// Nodes and weights of a one-dimensional quadrature rule.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Hermite rule for weight exp(-t^2) on the real line (physicists' convention).
QuadratureRule gauss_hermite(int n);

/// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Cached Gauss-Legendre rule; the returned reference stays valid for the program lifetime.
const QuadratureRule& gauss_legendre_cached(int n);

/// Integrate f over [a, b] with the given Gauss-Legendre rule.
template <class F>
double integrate_gl(const QuadratureRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return half * sum;
}

/// Composite Simpson rule on a nonuniform increasing grid. Pairs of intervals use
/// the variable-step Simpson formula; an odd trailing interval uses the trapezoid rule.
double composite_simpson(std::span<const double> t, std::span<const double> y);

/// Extrapolate samples f(h_k) to h = 0 with Neville's polynomial scheme.
double neville_extrapolate(std::span<const double> h, std::span<const double> f);

}  // namespace peakon
