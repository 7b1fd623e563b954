#include <cmath>

#include "doctest.h"
#include "slitbilliard/action_angle.hpp"
#include "slitbilliard/rng.hpp"

using namespace slitbilliard;

namespace {

SlitConfig static_config() {
  const TrigSeries s = TrigSeries::constant_wall(0.5);
  return SlitConfig(s, s, 0.6, 0.1);
}

}  // namespace

TEST_CASE("constant wall geometry") {
  const SlitConfig cfg = static_config();
  const ChamberGeometry up(cfg, Chamber::Upper);
  CHECK(up.total() == doctest::Approx(8.0).epsilon(1e-13));
  for (double t : {0.0, 0.3, 1.1, 1.9}) CHECK(up.angle(t) == doctest::Approx(t).epsilon(1e-12));
  const AngleAction aa = up.to_angle_action(0.0, 100.0);
  CHECK(aa.action == doctest::Approx(200.0).epsilon(1e-13));
  CHECK(std::abs(aa.theta) < 1e-14);
  const auto tv = up.from_angle_action({0.4, 1e4});
  CHECK(tv[1] == doctest::Approx(5e3).epsilon(1e-12));

  const ChamberGeometry low(cfg, Chamber::Lower);
  CHECK(low.total() == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(low.to_angle_action(0.0, -100.0).action == doctest::Approx(200.0).epsilon(1e-13));
}

TEST_CASE("action of the example walls") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const ChamberGeometry up(cfg, Chamber::Upper);
  const auto g = up.gap(0.3, Side::RightLimit);
  const double third = std::abs(g.g * g.g * g.gdd / (3 * 500.0)) * up.total() / 2;
  CHECK(third < 1e-2 * up.total());
  const double full = up.to_angle_action(0.3, 500.0).action;
  const double leading = up.total() / 2 * (g.g * 500.0 + g.g * g.gd);
  CHECK(std::abs(full - leading) == doctest::Approx(third).epsilon(1e-9));

  const ChamberGeometry low(cfg, Chamber::Lower);
  CHECK(low.to_angle_action(0.3, -500.0).action > 0);
}

TEST_CASE("angle-action round trip") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  Rng rng(4);
  for (Chamber ch : {Chamber::Upper, Chamber::Lower}) {
    const ChamberGeometry geo(cfg, ch);
    for (int k = 0; k < 200; ++k) {
      const AngleAction aa{rng.uniform(0.0, 2.0), std::pow(10.0, rng.uniform(3.0, 6.0))};
      const auto tv = geo.from_angle_action(aa);
      const AngleAction back = geo.to_angle_action(tv[0], tv[1]);
      CHECK(std::abs(back.theta - aa.theta) < 1e-9);
      CHECK(std::abs(back.action - aa.action) < 1e-9 * aa.action);
    }
  }
  const ChamberGeometry up(cfg, Chamber::Upper);
  const auto tv = up.from_angle_action({0.7, 1e4});
  CHECK(std::abs(up.to_angle_action(tv[0], tv[1]).action - 1e4) < 1e-10 * 1e4);
}

TEST_CASE("angle is monotone and inverted by time_of_angle") {
  const SlitConfig cfg = example_config(0.5, 0.4);
  const ChamberGeometry up(cfg, Chamber::Upper);
  double prev = -1;
  for (int k = 0; k < 400; ++k) {
    const double t = k / 200.0;
    const double th = up.angle(t);
    CHECK(th > prev);
    prev = th;
    CHECK(up.time_of_angle(th) == doctest::Approx(t).epsilon(1e-10));
  }
}

TEST_CASE("mirror symmetry exchanges the chambers") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const SlitConfig m = cfg.mirrored();
  const ChamberGeometry up(cfg, Chamber::Upper), low_m(m, Chamber::Lower);
  CHECK(up.total() == doctest::Approx(low_m.total()).epsilon(1e-12));
  CHECK(up.beta() == doctest::Approx(low_m.beta()).epsilon(1e-12));
  for (double t : {0.2, 0.9, 1.5}) CHECK(up.angle(t) == doctest::Approx(low_m.angle(t)).epsilon(1e-12));
  const AngleAction a = up.to_angle_action(0.2, 300.0), b = low_m.to_angle_action(0.2, -300.0);
  CHECK(a.action == doctest::Approx(b.action).epsilon(1e-12));
}

TEST_CASE("split of the total at the singular times") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const ChamberGeometry up(cfg, Chamber::Upper);
  CHECK(up.alpha() + up.beta() == doctest::Approx(up.total()).epsilon(1e-12));
  CHECK(up.total() * (up.angle_star(2) - up.angle_star(1)) == doctest::Approx(2 * up.beta()).epsilon(1e-10));
  CHECK(up.total() * (2 + up.angle_star(1) - up.angle_star(2)) == doctest::Approx(2 * up.alpha()).epsilon(1e-10));
}

TEST_CASE("constant wall: no action drift") {
  const auto rows = invariant_drift(static_config(), Chamber::Upper, {1e3, 1e4}, 10, 4);
  for (const auto& r : rows) {
    CHECK(r.collisions > 0);
    CHECK(r.max_action_change < 1e-8 * r.action);
  }
}
