#include "peakon/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace peakon {

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);

  // Golub-Welsch eigenvalues as starting guesses, then Newton on the
  // orthonormal Hermite recursion in long double for nodes and weights.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = es.eigenvalues();  // ascending

  const long double pim4 = 0.7511255444649424828587030047762276930510L;  // pi^(-1/4)
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    long double z = guess[n - 1 - i];
    long double pp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p1 = pim4;
      long double p2 = 0.0L;
      for (int j = 0; j < n; ++j) {
        const long double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0L / (j + 1)) * p2 - std::sqrt(static_cast<long double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0L * n) * p2;
      const long double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-17L * std::max(1.0L, std::fabs(z))) break;
    }
    rule.nodes[i] = static_cast<double>(z);
    rule.nodes[n - 1 - i] = static_cast<double>(-z);
    const double w = static_cast<double>(2.0L / (pp * pp));
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    long double z = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double pp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p1 = 1.0L;
      long double p2 = 0.0L;
      for (int j = 0; j < n; ++j) {
        const long double p3 = p2;
        p2 = p1;
        p1 = ((2.0L * j + 1.0L) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0L);
      const long double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-18L) break;
    }
    rule.nodes[i] = static_cast<double>(-z);
    rule.nodes[n - 1 - i] = static_cast<double>(z);
    const double w = static_cast<double>(2.0L / ((1.0L - z * z) * pp * pp));
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
  return rule;
}

const QuadratureRule& gauss_legendre_cached(int n) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

double composite_simpson(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("composite_simpson: size mismatch");
  const std::size_t n = t.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    const double hs = h0 + h1;
    sum += hs / 6.0 *
           ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
  }
  if (i + 1 < n) sum += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return sum;
}

double neville_extrapolate(std::span<const double> h, std::span<const double> f) {
  if (h.size() != f.size() || h.empty()) {
    throw std::invalid_argument("neville_extrapolate: need matching, nonempty samples");
  }
  std::vector<double> p(f.begin(), f.end());
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      p[i] = (-h[i + m] * p[i] + h[i] * p[i + 1]) / (h[i] - h[i + m]);
    }
  }
  return p[0];
}

}  // namespace peakon
