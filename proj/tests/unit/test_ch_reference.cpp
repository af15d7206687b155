#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "peakon/ch_reference.hpp"
#include "peakon/errors.hpp"

using namespace peakon;

TEST_CASE("CH right-hand side examples") {
  const auto r1 = ch_rhs(CHState{{0.3}, {1.7}});
  CHECK(r1.dx[0] == 1.7);
  CHECK(r1.dp[0] == 0.0);

  const double a = 0.4;
  const auto r2 = ch_rhs(CHState{{-a, a}, {1.0, 1.0}});
  CHECK(r2.dp[0] == doctest::Approx(-std::exp(-2 * a)).epsilon(1e-15));
  CHECK(r2.dp[1] == doctest::Approx(std::exp(-2 * a)).epsilon(1e-15));
  CHECK(r2.dp[0] + r2.dp[1] == 0.0);

  const auto r3 = ch_rhs(CHState{{-1.0, 0.2, 0.9, 3.0}, {1.3, -0.4, 2.2, 0.7}});
  double s = 0.0;
  for (double d : r3.dp) s += d;
  CHECK(std::fabs(s) <= 1e-15);
}

TEST_CASE("CH Hamiltonian examples") {
  CHECK(ch_hamiltonian(CHState{{5.0}, {1.0}}) == 0.5);
  CHECK(ch_hamiltonian(CHState{{0.0, 0.0}, {1.0, 1.0}}) == 2.0);
}

TEST_CASE("CH two-peakon run conserves H0 and total momentum") {
  const auto tr = integrate_ch(CHState{{0.0, 5.0}, {2.0, 1.0}}, 1e-3, 10.0);
  CHECK(tr.h0_drift <= 1e-8);
  CHECK(tr.momentum_drift <= 1e-12);
  for (const auto& s : tr.states) CHECK(s.positions[0] < s.positions[1]);
}

TEST_CASE("CH overtaking pair exchanges speeds fixed by the invariants") {
  const CHState s0{{0.0, 5.0}, {2.0, 1.0}};
  const auto tr = integrate_ch(s0, 1e-3, 25.0);
  // Once separated, sum p and H0 = (p1^2 + p2^2)/2 determine the pair.
  const double m = 3.0;
  const double q = 2.0 * ch_hamiltonian(s0);
  const double d = std::sqrt(2.0 * q - m * m);
  const auto v = ch_rhs(tr.states.back()).dx;
  CHECK(v[0] == doctest::Approx((m - d) / 2).epsilon(1e-6));
  CHECK(v[1] == doctest::Approx((m + d) / 2).epsilon(1e-6));
  // Within about e^{-5} of the exchanged amplitudes (1, 2).
  CHECK(std::fabs(v[0] - 1.0) < 2e-2);
  CHECK(std::fabs(v[1] - 2.0) < 2e-2);
}

TEST_CASE("a single CH peakon travels p t") {
  const auto tr = integrate_ch(CHState{{1.0}, {0.75}}, 1e-3, 2.0);
  CHECK(tr.states.back().positions[0] == doctest::Approx(1.0 + 1.5).epsilon(1e-13));
}

TEST_CASE("CH CSV and drift report") {
  const auto tr = integrate_ch(CHState{{0.0, 2.0}, {1.0, 0.5}}, 0.1, 0.2);
  std::ostringstream os;
  write_ch_csv(os, tr);
  CHECK(os.str().rfind("t,x1,x2,p1,p2\n", 0) == 0);
  CHECK(ch_drift_json(tr).find("H0_drift") != std::string::npos);
}
