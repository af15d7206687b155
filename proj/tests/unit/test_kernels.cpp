#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "peakon/kernels.hpp"
#include "peakon/quadrature.hpp"

using namespace peakon;

TEST_CASE("kernel_G and kernel_Gx values") {
  CHECK(kernel_G(0.0) == 0.5);
  CHECK(kernel_G(std::log(2.0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(kernel_G(-1.0) == kernel_G(1.0));
  CHECK(kernel_Gx(1.0) == doctest::Approx(-0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_Gx(-1.0) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_Gx(0.0) == 0.0);
}

TEST_CASE("f1 + f2 and f2 - f1 reproduce the mollified kernel and its derivative") {
  const Mollifier moll(0.1);
  for (double x : {-2.0, 0.0, 1.0}) {
    // Independent: rho_eps * G by quadrature of the kernel itself.
    const double g = oracle::integrate([&](double y) { return oracle::gaussian_density(x - y, 0.1) * kernel_G(y); },
                                       x - 4.0, x + 4.0);
    CHECK(std::fabs(moll.f1(x) + moll.f2(x) - g) <= 1e-10);
    CHECK(std::fabs(moll.g(x) - g) <= 1e-10);
    const double gx = oracle::integrate([&](double y) { return oracle::gaussian_density(x - y, 0.1) * kernel_Gx(y); },
                                        x - 4.0, x + 4.0);
    CHECK(std::fabs(moll.f2(x) - moll.f1(x) - gx) <= 1e-10);
  }
}

TEST_CASE("f1(0) at eps 0.1 matches adaptive quadrature") {
  const Mollifier moll(0.1);
  CHECK(std::fabs(moll.f1(0.0) - oracle::f1_gaussian(0.0, 0.1)) <= 1e-10);
}

TEST_CASE("closed-form f1 matches quadrature on a log-spaced (x, eps) grid") {
  for (double eps : {0.005, 0.02, 0.1, 0.5}) {
    const Mollifier moll(eps);
    for (double mag : {1e-3, 1e-2, 0.1, 1.0, 5.0, 30.0}) {
      for (double x : {-mag, mag}) {
        const double ref = oracle::f1_gaussian(x, eps);
        CHECK_MESSAGE(std::fabs(moll.f1(x) - ref) <= 1e-10, "eps=" << eps << " x=" << x);
      }
    }
  }
}

TEST_CASE("f1/f2 pointwise properties at random points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-6.0, 6.0), ule(std::log(0.005), std::log(0.5));
  for (int k = 0; k < 120; ++k) {
    const double eps = std::exp(ule(rng));
    const double x = ux(rng);
    const Mollifier moll(eps);
    const double a = moll.f1(x), b = moll.f2(x);
    CHECK(a >= 0.0);
    CHECK(b >= 0.0);
    CHECK(a <= 0.5);
    CHECK(b <= 0.5);
    CHECK(std::fabs(moll.f1(-x) - b) <= 1e-15);
    CHECK(std::fabs(a + b - moll.g(x)) <= 1e-10);
    CHECK(std::fabs(b - a - moll.gx(x)) <= 1e-10);
    CHECK(std::fabs(moll.g(x)) <= 0.5);
  }
}

TEST_CASE("derivative of f1 obeys the C0/(2 eps) + 1/2 bound") {
  for (double eps : {0.01, 0.05, 0.2}) {
    const Mollifier moll(eps);
    const double bound = moll.c0() / (2.0 * eps) + 0.5;
    const double h = 1e-4 * eps;
    for (double x = -1.0; x <= 1.0; x += 0.013) {
      const double d = (moll.f1(x + h) - moll.f1(x - h)) / (2 * h);
      CHECK(std::fabs(d) <= bound);
    }
  }
}

TEST_CASE("f1_increment agrees with the derivative recursion for tiny steps") {
  const Mollifier moll(0.02);
  for (double x : {-0.05, 0.0, 0.013, 0.2}) {
    const double step = 1e-30;
    const double slope = 0.5 * moll.density(x) - moll.f1(x);
    CHECK(moll.f1_increment(x, step) / step == doctest::Approx(slope).epsilon(1e-12));
    // Moderate step: plain difference is accurate.
    CHECK(moll.f1_increment(x, 0.01) == doctest::Approx(moll.f1(x + 0.01) - moll.f1(x)).epsilon(1e-12));
    CHECK(moll.f2_increment(x, 0.01) == doctest::Approx(moll.f2(x + 0.01) - moll.f2(x)).epsilon(1e-12));
  }
}

TEST_CASE("mollified kernel converges to G") {
  const Mollifier moll(0.01);
  CHECK(std::fabs(moll.g(1.0) - kernel_G(1.0)) <= 1e-3);
  CHECK(moll.gx(0.0) == 0.0);
}

TEST_CASE("convolve_with_mollifier") {
  const Mollifier moll(0.05);
  CHECK(std::fabs(convolve_with_mollifier([](double) { return 1.0; }, 0.3, moll) - 1.0) <= 1e-14);
  CHECK(std::fabs(convolve_with_mollifier([](double y) { return y; }, 0.0, moll)) <= 1e-14);
  // Smooth integrand: E exp(eps Z) = exp(eps^2 / 2).
  CHECK(convolve_with_mollifier([](double y) { return std::exp(y); }, 0.0, moll) ==
        doctest::Approx(std::exp(0.5 * 0.05 * 0.05)).epsilon(1e-14));
  // G has a kink under the centre of the rule, so Gauss-Hermite converges only algebraically.
  double prev = 1.0;
  for (int n : {64, 128, 256, 400}) {
    const Mollifier m(0.05, n);
    const double err = std::fabs(convolve_with_mollifier(kernel_G, 0.0, m) - kernel_G_eps(0.0, m));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 3e-5);
  // Away from the kink the rule is spectrally accurate.
  CHECK(std::fabs(convolve_with_mollifier(kernel_G, 0.7, moll) - kernel_G_eps(0.7, moll)) <= 1e-10);
  CHECK_THROWS_AS(convolve_with_mollifier([](double) { return NAN; }, 0.0, moll), NumericalAbort);
}

TEST_CASE("I_eps against an independent quadrature oracle") {
  for (double eps : {0.2, 0.05, 0.02}) {
    const Mollifier moll(eps);
    const double ref = oracle::integrate(
        [&](double x) {
          const double gx = moll.gx(x);
          return oracle::gaussian_density(x, eps) * gx * gx;
        },
        -40 * eps, 40 * eps);
    CHECK(std::fabs(mollified_gx_square_at_zero(moll) - ref) <= 1e-10);
  }
}

TEST_CASE("I_eps error decreases monotonically and is linear in eps") {
  double prev = 1.0;
  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    const double err = std::fabs(mollified_gx_square_at_zero(Mollifier(eps)) - 1.0 / 12.0);
    CHECK(err < prev);
    // The Gaussian family approaches 1/12 from below at rate about 0.27 eps; at eps = 0.02 the
    // error is 5.4e-3, just above a 5e-3 band.
    CHECK(err <= 0.3 * eps);
    prev = err;
  }
}

TEST_CASE("doubling quadrature nodes leaves I_eps unchanged") {
  for (double eps : {0.2, 0.1, 0.05, 0.02}) {
    const double a = mollified_gx_square_at_zero(Mollifier(eps, 64));
    const double b = mollified_gx_square_at_zero(Mollifier(eps, 128));
    CHECK(std::fabs(a - b) < 1e-10);
  }
}

TEST_CASE("I_eps limit is the same for the compact bump family") {
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.02};
  std::vector<double> ga, bu;
  for (double e : eps) {
    ga.push_back(mollified_gx_square_at_zero(Mollifier(e, 64, MollifierFamily::gaussian)));
    bu.push_back(mollified_gx_square_at_zero(Mollifier(e, 64, MollifierFamily::polynomial_bump)));
  }
  const double lg = neville_extrapolate(eps, ga);
  const double lb = neville_extrapolate(eps, bu);
  CHECK(std::fabs(lg - lb) <= 1e-3);
  CHECK(std::fabs(lb - 1.0 / 12.0) <= 1e-3);
}

TEST_CASE("bump family f1 matches quadrature of its definition") {
  const Mollifier moll(0.1, 64, MollifierFamily::polynomial_bump);
  for (double x : {-0.3, -0.05, 0.0, 0.07, 0.5}) {
    double ref = 0.0;
    if (x > -0.1) {
      ref = oracle::integrate([&](double y) { return 0.5 * moll.density(y) * std::exp(y - x); }, -0.1,
                              std::min(x, 0.1));
    }
    CHECK(std::fabs(moll.f1(x) - ref) <= 1e-10);
  }
}

TEST_CASE("pair-speed integral is s-uniform within the tail bound") {
  for (double eps : {0.1, 0.05}) {
    const Mollifier moll(eps);
    const double bound = pair_speed_tail_bound(moll, 0.5);
    const double a = pair_speed_integral(moll, 0.5);
    for (double s : {1.0, 2.0, 7.0}) CHECK(std::fabs(pair_speed_integral(moll, s) - a) <= bound);
  }
}

TEST_CASE("mollifier configuration errors") {
  CHECK_THROWS_AS(Mollifier(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Mollifier(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(mollifier_family_from_string("triangle"), ConfigError);
  CHECK(to_string(mollifier_family_from_string("polynomial_bump")) == "polynomial_bump");
}
