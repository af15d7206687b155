#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "peakon/limit_dynamics.hpp"
#include "peakon/reg_dynamics.hpp"

using namespace peakon;

namespace {

// The ordered formula summed term by term.
std::vector<double> brute_ordered(const std::vector<double>& x, const std::vector<double>& p) {
  const std::size_t n = x.size();
  std::vector<double> v(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = p[i] * p[i] / 6.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j < i) v[i] += 0.5 * p[i] * p[j] * std::exp(x[j] - x[i]);
      if (j > i) v[i] += 0.5 * p[i] * p[j] * std::exp(x[i] - x[j]);
    }
    for (std::size_t m = 0; m < i; ++m) {
      for (std::size_t k = i + 1; k < n; ++k) v[i] += p[m] * p[k] * std::exp(x[m] - x[k]);
    }
  }
  return v;
}

LimitDynConfig config(LimitMode mode, double t_end) {
  LimitDynConfig c;
  c.mode = mode;
  c.t_end = t_end;
  return c;
}

std::size_t count_clusters(const std::vector<double>& x) {
  std::size_t c = 1;
  for (std::size_t i = 1; i < x.size(); ++i) c += x[i] != x[i - 1];
  return c;
}

}  // namespace

TEST_CASE("limiting_rhs examples") {
  const std::vector<double> p1 = {1.7};
  const auto s1 = ClusterState::from_positions(p1, std::vector<double>{0.0});
  CHECK(limiting_rhs(s1, p1)[0] == doctest::Approx(1.7 * 1.7 / 6.0).epsilon(1e-15));

  const std::vector<double> pp = {1.0, 1.0};
  const auto s2 = ClusterState::from_positions(pp, std::vector<double>{0.5, 0.5});
  REQUIRE(s2.size() == 1);
  CHECK(limiting_rhs(s2, pp)[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("ordered_rhs two-peakon example and gap-independent relative speed") {
  const std::vector<double> p = {2.0, 1.0};
  const auto v = ordered_rhs(std::vector<double>{0.0, 1.0}, p);
  CHECK(v[0] == doctest::Approx(4.0 / 6.0 + std::exp(-1.0)).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(1.0 / 6.0 + std::exp(-1.0)).epsilon(1e-15));
  for (double gap : {0.01, 0.5, 3.0}) {
    const auto w = ordered_rhs(std::vector<double>{0.0, gap}, p);
    CHECK(w[0] - w[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK_THROWS_AS(ordered_rhs(std::vector<double>{1.0, 1.0}, p), std::invalid_argument);
}

TEST_CASE("ordered_rhs, limiting_rhs and the brute-force sum agree on separated configurations") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ua(0.2, 3.0), ug(0.05, 2.0);
  std::bernoulli_distribution neg(0.25);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 7;
    std::vector<double> p(n), x(n);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = ua(rng) * (neg(rng) ? -1.0 : 1.0);
      x[i] = (pos += ug(rng));
    }
    const auto a = ordered_rhs(x, p);
    const auto b = limiting_rhs(ClusterState::from_positions(p, x), p);
    const auto c = brute_ordered(x, p);
    const double m0 = [&] { double s = 0; for (double q : p) s += std::fabs(q); return s; }();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(a[i] == doctest::Approx(c[i]).epsilon(1e-12));
      CHECK(b[i] == doctest::Approx(c[i]).epsilon(1e-12));
      CHECK(std::fabs(b[i]) <= 0.5 * m0 * m0 + 1e-9);
    }
  }
}

TEST_CASE("two_peakon_collision_time examples") {
  CHECK(*two_peakon_collision_time(0, 1, 2, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(*two_peakon_collision_time(-7, -5, 4, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(two_peakon_collision_time(0, 1, 1, 1).has_value());
  CHECK_FALSE(two_peakon_collision_time(0, 1, 1, -1).has_value());
}

TEST_CASE("sticky two-peakon collision time and post-merge speed") {
  const PeakonEnsemble e({2.0, 1.0}, {0.0, 1.0});
  const auto tr = sticky_integrate(e, config(LimitMode::sticky, 4.0));
  REQUIRE(tr.events.size() == 1);
  CHECK(tr.events[0].kind == EventKind::merge);
  CHECK(std::fabs(tr.events[0].time - 2.0) <= 1e-6);
  const std::size_t k = tr.size() - 1;
  const double v = (tr.positions[k][0] - tr.positions[k - 1][0]) / (tr.times[k] - tr.times[k - 1]);
  CHECK(std::fabs(v - 1.5) <= 1e-9);
  CHECK(tr.positions[k][0] == tr.positions[k][1]);
}

TEST_CASE("momentum balance at a merge") {
  // Equal-mass-weighted velocity: (pA + pB) v_after = pA vA- + pB vB-.
  const std::vector<double> p = {2.0, 1.0};
  const auto before = ordered_rhs(std::vector<double>{0.0, 1e-12}, p);
  const auto after = limiting_rhs(ClusterState::from_positions(p, std::vector<double>{0.0, 0.0}), p);
  CHECK((p[0] + p[1]) * after[0] == doctest::Approx(p[0] * before[0] + p[1] * before[1]).epsilon(1e-10));

  const std::vector<double> q = {4.0, 2.0, 1.0};
  const auto b3 = ordered_rhs(std::vector<double>{-2.0, 0.0, 1e-12}, q);
  const auto a3 = limiting_rhs(ClusterState::from_positions(q, std::vector<double>{-2.0, 0.0, 0.0}), q);
  CHECK(3.0 * a3[1] == doctest::Approx(2.0 * b3[1] + 1.0 * b3[2]).epsilon(1e-10));
}

TEST_CASE("three-peakon merge scenario: two merges, one cluster of amplitude 7 at speed 49/6") {
  const PeakonEnsemble e({4.0, 2.0, 1.0}, {-7.0, -5.0, -3.0});
  const auto sticky = sticky_integrate(e, config(LimitMode::sticky, 3.0));
  const auto disp = dispersive_limit_integrate(e, config(LimitMode::dispersive_limit, 3.0));
  REQUIRE(sticky.events.size() == 2);
  CHECK(sticky.events[0].indices == std::vector<std::size_t>{1, 2});
  CHECK(sticky.events[1].indices == std::vector<std::size_t>{0, 1, 2});
  REQUIRE(disp.events.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(disp.events[k].kind == EventKind::merge);
    CHECK(disp.events[k].indices == sticky.events[k].indices);
    CHECK(disp.events[k].time == sticky.events[k].time);
  }
  CHECK(disp.positions == sticky.positions);
  const std::size_t k = sticky.size() - 1;
  const double v = (sticky.positions[k][0] - sticky.positions[k - 1][0]) / (sticky.times[k] - sticky.times[k - 1]);
  CHECK(v == doctest::Approx(49.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("three-peakon split scenario: merge, split at T2, merge") {
  const PeakonEnsemble e({4.0, 2.0, 3.0}, {-7.0, -6.0, -2.0});
  const auto tr = dispersive_limit_integrate(e, config(LimitMode::dispersive_limit, 2.0));
  REQUIRE(tr.events.size() == 3);
  CHECK(tr.events[0].kind == EventKind::merge);
  CHECK(tr.events[0].indices == std::vector<std::size_t>{0, 1});
  CHECK(tr.events[1].kind == EventKind::split);
  CHECK(tr.events[1].left_block == std::vector<std::size_t>{0});
  CHECK(tr.events[2].kind == EventKind::merge);
  CHECK(tr.events[2].indices == std::vector<std::size_t>{1, 2});
  const auto last = tr.positions.back();
  CHECK(last[0] < last[1]);
  CHECK(last[1] == last[2]);

  const auto x = tr.positions_at(tr.events[0].time);
  const auto th = three_peakon_thresholds(4, 2, 3, tr.events[0].time, x[2] - x[1]);
  CHECK(th.s2_star == doctest::Approx(std::log(4.5)).epsilon(1e-15));
  REQUIRE(th.t2.has_value());
  CHECK(std::fabs(tr.events[1].time - *th.t2) <= 1e-6);

  // The probe is negative on the sample before the split.
  const auto it = std::find(tr.times.begin(), tr.times.end(), tr.events[1].time);
  REQUIRE(it != tr.times.end());
  const std::size_t ks = static_cast<std::size_t>(it - tr.times.begin());
  REQUIRE(ks >= 1);
  const std::vector<double> p = {4, 2, 3};
  const auto prev = ClusterState::from_positions(p, tr.positions[ks - 1]);
  CHECK(split_probe(prev, 0, p, 1e-8).value < 0.0);

  // Sticky keeps the pair together and ends with one cluster.
  const auto sticky = sticky_integrate(e, config(LimitMode::sticky, 2.0));
  CHECK(count_clusters(sticky.positions.back()) == 1);
}

TEST_CASE("split threshold edge cases") {
  // As p3 shrinks the threshold distance decreases without bound; no split time exists once S2* <= 0.
  CHECK(three_peakon_thresholds(4, 2, 1e-3, 0.0, 3.0).s2_star < 0.0);
  CHECK_FALSE(three_peakon_thresholds(4, 2, 1e-3, 0.0, 3.0).t2.has_value());
  CHECK(three_peakon_thresholds(4, 2, 3, 0.0, 3.0).t2.value() == doctest::Approx(6.0 * (3.0 - std::log(4.5)) / 27.0));
  CHECK_THROWS_AS(three_peakon_thresholds(2, 4, 3, 0.0, 3.0), std::invalid_argument);
}

TEST_CASE("initial-gap bifurcation: one cluster versus two") {
  const auto a = sticky_integrate(PeakonEnsemble({4, 3, 2}, {-4, -3, 4}), config(LimitMode::sticky, 4.0));
  const auto b = sticky_integrate(PeakonEnsemble({4, 3, 2}, {-4, -2, 4}), config(LimitMode::sticky, 4.0));
  CHECK(count_clusters(a.positions.back()) == 1);
  CHECK(count_clusters(b.positions.back()) == 2);
}

TEST_CASE("limit trajectories stay ordered and sticky cluster counts never increase") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> ua(0.3, 4.0), ug(0.1, 2.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> p(n), x(n);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = ua(rng);
      x[i] = (pos += ug(rng));
    }
    const PeakonEnsemble e(p, x);
    for (auto mode : {LimitMode::sticky, LimitMode::dispersive_limit}) {
      const auto tr = limit_integrate(e, config(mode, 3.0));
      std::size_t clusters = n;
      for (const auto& row : tr.positions) {
        CHECK(std::is_sorted(row.begin(), row.end()));
        if (mode == LimitMode::sticky) {
          const std::size_t c = count_clusters(row);
          CHECK(c <= clusters);
          clusters = c;
        }
      }
    }
  }
}

TEST_CASE("limit runs agree with regularized runs before the first event, with an O(eps) gap") {
  const PeakonEnsemble e({4.0, 2.0, 1.0}, {-7.0, -5.0, -3.0});
  const auto st = sticky_integrate(e, config(LimitMode::sticky, 0.9));
  const auto dl = dispersive_limit_integrate(e, config(LimitMode::dispersive_limit, 0.9));
  REQUIRE(st.events.empty());
  CHECK(dl.positions == st.positions);
  std::vector<double> dist;
  for (double eps : {0.04, 0.02, 0.01}) {
    RegDynConfig rc;
    rc.moll = Mollifier(eps);
    rc.t_end = 0.9;
    const auto reg = integrate_regularized(e, rc);
    double d = 0.0;
    for (std::size_t k = 0; k < st.size(); ++k) {
      const auto xr = reg.positions_at(st.times[k]);
      for (std::size_t i = 0; i < 3; ++i) d = std::max(d, std::fabs(xr[i] - st.positions[k][i]));
    }
    dist.push_back(d);
  }
  // The gap is first order in eps, with a constant set by the speed deficit of the
  // heaviest peakon (about 7 eps here).
  CHECK(dist[0] / dist[1] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(dist[1] / dist[2] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(dist[1] <= 8.0 * 0.02);
}

TEST_CASE("naive continuations past a two-peakon collision") {
  const PeakonEnsemble e({2.0, 1.0}, {0.0, 1.0});
  const auto cross = naive_integrate(e, 1e-3, 4.0, true);
  const auto fixed = naive_integrate(e, 1e-3, 4.0, false);
  CHECK(cross.positions.back()[0] > cross.positions.back()[1]);
  CHECK(fixed.positions.back()[0] > fixed.positions.back()[1]);
  CHECK(cross.meta.method == "crossing_continuation");
  CHECK(fixed.meta.method == "fixed_label_continuation");
}

TEST_CASE("cluster state invariants") {
  const std::vector<double> p = {1, 2, 3};
  const auto s = ClusterState::from_positions(p, std::vector<double>{0.0, 0.0, 1.0});
  CHECK(s.size() == 2);
  CHECK(s.particles() == 3);
  CHECK(s.particle_positions() == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(s.amplitudes == std::vector<double>{3.0, 3.0});
  CHECK_THROWS_AS(ClusterState::from_positions(p, std::vector<double>{1.0, 0.0, 2.0}), std::invalid_argument);
}
