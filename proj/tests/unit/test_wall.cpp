#include <cmath>
#include <numbers>

#include "doctest.h"
#include "slitbilliard/rng.hpp"
#include "slitbilliard/wall.hpp"

using namespace slitbilliard;
using std::numbers::pi;

TEST_CASE("series evaluation of the example walls") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const auto l = cfg.left().eval(0.0);
  CHECK(l.f == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(l.fd) < 1e-15);
  CHECK(l.fdd == doctest::Approx(-0.3 * pi * pi).epsilon(1e-14));
  const auto r = cfg.right().eval(0.5);
  CHECK(r.f == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(std::abs(r.fd) < 1e-15);
  CHECK(r.fdd == doctest::Approx(-0.3 * pi * pi).epsilon(1e-14));
}

TEST_CASE("constant series") {
  const TrigSeries s = TrigSeries::constant_wall(0.5);
  for (double t : {0.0, 0.37, 1.5, 7.25}) {
    const auto w = s.eval(t);
    CHECK(w.f == 0.5);
    CHECK(w.fd == 0.0);
    CHECK(w.fdd == 0.0);
  }
  CHECK(s.sup_rate() == 0.0);
}

TEST_CASE("derivatives agree with finite differences") {
  const TrigSeries s(0.5, {{1, 0.1}, {3, 0.05}}, {{2, 0.08}});
  const double h = 1e-5;
  for (double t : {0.1, 0.77, 1.3, 1.95}) {
    const auto w = s.eval(t);
    CHECK(w.fd == doctest::Approx((s.eval(t + h).f - s.eval(t - h).f) / (2 * h)).epsilon(1e-7));
    CHECK(w.fdd == doctest::Approx((s.eval(t + h).fd - s.eval(t - h).fd) / (2 * h)).epsilon(1e-7));
    CHECK(std::abs(w.fd) <= s.sup_rate());
    CHECK(std::abs(w.fdd) <= s.sup_accel());
  }
}

TEST_CASE("containment") {
  // Amplitude sum 0.6 around 0.5 but the height stays in (0.2, 0.8).
  CHECK_NOTHROW(TrigSeries(0.5, {{1, 0.3}}, {{1, 0.3}}));
  CHECK_THROWS_AS(TrigSeries(0.5, {{1, 0.5}}, {}), Error);
  CHECK_THROWS_AS(TrigSeries(0.5, {{1, 0.3}, {2, 0.3}}, {}), Error);
  CHECK_THROWS_AS(TrigSeries(1.0, {}, {}), Error);
  CHECK_THROWS_AS(TrigSeries(0.5, {{0, 0.1}}, {}), Error);
  try {
    TrigSeries(0.5, {{1, 0.3}, {2, 0.3}}, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("configuration preconditions and singular times") {
  CHECK_THROWS_AS(example_config(0.5, 0.5), Error);
  CHECK_THROWS_AS(example_config(0.5, 0.7), Error);
  CHECK_THROWS_AS(example_config(0.5, -0.1), Error);
  const SlitConfig cfg = example_config(0.6, 0.1);
  CHECK(cfg.t1_star() == doctest::Approx(0.5));
  CHECK(cfg.t2_star() == doctest::Approx(1.3));
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const double lambda = rng.uniform(0.01, 0.99);
    const SlitConfig c = example_config(lambda, rng.uniform(0.0, lambda));
    CHECK(c.t1_star() >= 0);
    CHECK(c.t1_star() < 2);
    CHECK(c.t2_star() >= 0);
    CHECK(c.t2_star() < 2);
    CHECK(c.t1_star() != c.t2_star());
  }
}

TEST_CASE("one-sided wall values") {
  const SlitConfig cfg = example_config(0.5, 0.0);
  CHECK(cfg.wall_at(0.5, Side::LeftLimit).f == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cfg.wall_at(0.5, Side::RightLimit).f == doctest::Approx(0.8).epsilon(1e-15));
  // Interior of (t1*, t2*): the right slit from both sides.
  for (double t : {0.7, 1.0, 1.4}) {
    CHECK(cfg.wall_at(t, Side::LeftLimit).f == cfg.right().eval(t).f);
    CHECK(cfg.wall_at(t, Side::RightLimit).f == cfg.right().eval(t).f);
  }
  for (double t : {0.1, 1.6, 1.9}) CHECK(cfg.wall_at(t, Side::RightLimit).f == cfg.left().eval(t).f);

  const TrigSeries s(0.5, {{1, 0.2}}, {});
  const SlitConfig same(s, s, 0.6, 0.1);
  for (int i : {1, 2}) {
    const double ts = same.t_star(i);
    CHECK(same.wall_at(ts, Side::LeftLimit).f == same.wall_at(ts, Side::RightLimit).f);
  }
}

TEST_CASE("sides differ only at the singular times; period two") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const double t = rng.uniform(0.0, 2.0);
    if (std::abs(t - cfg.t1_star()) < 1e-12 || std::abs(t - cfg.t2_star()) < 1e-12) continue;
    const auto a = cfg.wall_at(t, Side::LeftLimit);
    const auto b = cfg.wall_at(t, Side::RightLimit);
    CHECK(a.f == b.f);
    CHECK(a.fd == b.fd);
  }
  for (int k = 0; k < 2048; k += 7) {
    const double t = k / 1024.0;
    for (Side side : {Side::LeftLimit, Side::RightLimit}) {
      CHECK(cfg.wall_at(t, side).f == cfg.wall_at(t + 2.0, side).f);
      CHECK(cfg.wall_at(t, side).fd == cfg.wall_at(t - 4.0, side).fd);
    }
  }
}

TEST_CASE("jump data of the example node") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const JumpData j1 = cfg.jump_data(1);
  CHECK(j1.f_minus == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(j1.f_plus == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(j1.l_minus == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(j1.l_plus == doctest::Approx(0.2).epsilon(1e-14));
  const JumpData j2 = cfg.jump_data(2);
  CHECK(j2.f_minus == doctest::Approx(0.5 + 0.3 * std::sin(1.3 * pi)).epsilon(1e-14));
  CHECK(j2.f_minus == doctest::Approx(0.2573).epsilon(1e-4));
  CHECK(j2.f_plus == doctest::Approx(0.3237).epsilon(1e-4));
}

TEST_CASE("jump data identities") {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const double lambda = rng.uniform(0.05, 0.95);
    const SlitConfig cfg = example_config(lambda, rng.uniform(0.0, lambda));
    for (int i : {1, 2}) {
      const JumpData j = cfg.jump_data(i);
      const double ld_m = -j.fdot_minus, ld_p = -j.fdot_plus;
      // With l = 1 - f the combination l+ ldot- - l- ldot+ is -a.
      CHECK(std::abs(j.a + (j.l_plus * ld_m - j.l_minus * ld_p)) < 1e-14);
      CHECK(std::abs(j.a - (j.fdot_minus * (1 - j.f_plus) - j.fdot_plus * (1 - j.f_minus))) < 1e-15);
      CHECK(std::abs(j.a_prime - (j.fdot_plus * j.f_minus - j.fdot_minus * j.f_plus)) < 1e-15);
      CHECK(j.l_minus > 0);
      CHECK(j.l_minus < 1);
      CHECK(j.l_plus > 0);
      CHECK(j.l_plus < 1);
      CHECK(j.m_minus < 0);
      CHECK(j.m_minus > -1);
      CHECK(j.m_plus < 0);
      CHECK(j.m_plus > -1);
    }
  }
  const TrigSeries s(0.5, {{1, 0.2}}, {{2, 0.1}});
  const SlitConfig same(s, s, 0.6, 0.1);
  for (int i : {1, 2}) {
    const JumpData j = same.jump_data(i);
    CHECK(j.a == 0.0);
    CHECK(j.a_prime == 0.0);
    CHECK(j.f_minus == j.f_plus);
  }
}

TEST_CASE("mirror, swap and hash") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const SlitConfig m = cfg.mirrored();
  for (double t : {0.1, 0.9, 1.7}) {
    CHECK(m.wall_at(t, Side::RightLimit).f == doctest::Approx(1 - cfg.wall_at(t, Side::RightLimit).f).epsilon(1e-15));
  }
  const SlitConfig s = cfg.swapped();
  CHECK(s.left() == cfg.right());
  CHECK(s.right() == cfg.left());
  CHECK(cfg.hash() == example_config(0.6, 0.1).hash());
  CHECK(cfg.hash() != example_config(0.6, 0.2).hash());
  CHECK(cfg.canonical() == example_config(0.6, 0.1).canonical());
}
