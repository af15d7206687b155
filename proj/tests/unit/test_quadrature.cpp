#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "peakon/quadrature.hpp"

using namespace peakon;

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {2, 5, 16}) {
    const auto& rule = gauss_legendre_cached(n);
    const int deg = 2 * n - 1;
    const double v = integrate_gl(rule, -1.0, 2.0, [&](double x) { return std::pow(x, deg) + 1.0; });
    const double exact = (std::pow(2.0, deg + 1) - 1.0) / (deg + 1) + 3.0;
    CHECK(v == doctest::Approx(exact).epsilon(1e-13));
  }
}

TEST_CASE("gauss_hermite weights and moments") {
  for (int n : {1, 2, 40, 64, 200, 400}) {
    const auto r = gauss_hermite(n);
    double w = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      w += r.weights[k];
      m2 += r.weights[k] * r.nodes[k] * r.nodes[k];
    }
    CHECK(w == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
    if (n > 1) CHECK(m2 == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-13));
  }
  const auto r = gauss_hermite(40);
  double w = 0.0, m2 = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    w += r.weights[k];
    m1 += r.weights[k] * r.nodes[k];
    m2 += r.weights[k] * r.nodes[k] * r.nodes[k];
  }
  CHECK(w == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(std::fabs(m1) < 1e-14);
  CHECK(m2 == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-13));
}

TEST_CASE("composite_simpson exactness") {
  // Quadratics on a nonuniform grid, seven points so three Simpson pairs.
  const std::vector<double> t = {0.0, 0.1, 0.35, 0.5, 0.9, 1.0, 1.3};
  std::vector<double> y;
  for (double s : t) y.push_back(3 * s * s - 2 * s + 1);
  CHECK(composite_simpson(t, y) == doctest::Approx(std::pow(1.3, 3) - 1.3 * 1.3 + 1.3).epsilon(1e-13));
  // Cubics on a uniform grid.
  std::vector<double> tu, yu;
  for (int k = 0; k <= 8; ++k) {
    tu.push_back(0.25 * k);
    yu.push_back(std::pow(0.25 * k, 3));
  }
  CHECK(composite_simpson(tu, yu) == doctest::Approx(4.0).epsilon(1e-14));
  // Odd interval count: trailing trapezoid on a linear function is exact.
  const std::vector<double> t2 = {0.0, 0.5, 1.0, 2.0}, y2 = {1.0, 2.0, 3.0, 5.0};
  CHECK(composite_simpson(t2, y2) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("neville_extrapolate recovers a polynomial's value at zero") {
  const std::vector<double> h = {0.2, 0.1, 0.05, 0.02};
  std::vector<double> f;
  for (double x : h) f.push_back(0.25 - 0.3 * x + 2 * x * x - x * x * x);
  CHECK(neville_extrapolate(h, f) == doctest::Approx(0.25).epsilon(1e-13));
}
