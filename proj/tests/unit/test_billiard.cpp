#include <cmath>

#include "doctest.h"
#include "slitbilliard/billiard.hpp"
#include "slitbilliard/rng.hpp"

using namespace slitbilliard;

namespace {

SlitConfig static_config() {
  const TrigSeries s = TrigSeries::constant_wall(0.5);
  return SlitConfig(s, s, 0.5, 0.2);
}

}  // namespace

TEST_CASE("static wall: free fall onto the slit") {
  const SlitConfig cfg = static_config();
  const CollisionRecord rec{0.0, -1.0, 1.0, Chamber::Upper, CollisionKind::Ceiling};
  const CollisionRecord n = next_collision(cfg, rec);
  CHECK(n.kind == CollisionKind::Slit);
  CHECK(n.t == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(n.v == 1.0);
  CHECK(n.y == 0.5);
  CHECK(n.chamber == Chamber::Upper);
}

TEST_CASE("static wall: the collision map preserves speed") {
  const SlitConfig cfg = static_config();
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Chamber ch = k % 2 ? Chamber::Upper : Chamber::Lower;
    const double speed = rng.uniform(0.3, 50.0);
    CollisionRecord r = slit_record(cfg, rng.uniform(0.0, 2.0), ch == Chamber::Upper ? speed : -speed, ch);
    for (int i = 0; i < 20; ++i) {
      r = collision_map(cfg, r);
      CHECK(std::abs(r.v) == doctest::Approx(speed).epsilon(1e-14));
    }
  }
}

TEST_CASE("elliptic periodic orbit") {
  const double a = 0.01;
  const SlitConfig cfg = elliptic_config(a);
  const CollisionRecord rec = slit_record(cfg, 0.25, 2 + 4 * a, Chamber::Upper);
  CHECK(rec.y == doctest::Approx(0.5 - a).epsilon(1e-15));
  CollisionRecord r = collision_map(cfg, rec);
  CHECK(r.t == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(r.v == doctest::Approx(2.04).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) r = collision_map(cfg, r);
  CHECK(r.t == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(r.v == doctest::Approx(2.04).epsilon(1e-12));

  const Trajectory traj = simulate(cfg, rec, 40);
  CHECK(traj.status == TrajectoryStatus::Running);
  REQUIRE(traj.records.size() == 40);
  for (const auto& x : traj.records) CHECK(std::abs(x.v - (2 + 4 * a)) < 1e-9);
}

TEST_CASE("simulate with no collisions") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const CollisionRecord rec = slit_record(cfg, 0.1, -200.0, Chamber::Lower);
  const Trajectory traj = simulate(cfg, rec, 0);
  CHECK(traj.records.empty());
  CHECK(traj.status == TrajectoryStatus::Running);
  CHECK(traj.initial.t == rec.t);
}

TEST_CASE("trajectory invariants") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const Chamber ch = k % 2 ? Chamber::Upper : Chamber::Lower;
    const double speed = rng.uniform(5.0, 200.0);
    const CollisionRecord rec = slit_record(cfg, rng.uniform(0.0, 2.0), ch == Chamber::Upper ? speed : -speed, ch);
    const Trajectory traj = simulate(cfg, rec, 60);
    double t = traj.initial.t;
    for (const auto& x : traj.records) {
      CHECK(x.t > t);
      t = x.t;
      CHECK(x.kind == CollisionKind::Slit);
      const double fd = cfg.wall_at(x.t, Side::RightLimit).fd;
      // Post-collision motion is away from the slit.
      if (x.chamber == Chamber::Upper) CHECK(x.v > fd);
      else CHECK(x.v < fd);
    }
  }
}

TEST_CASE("consecutive records satisfy a collision relation") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const RelationSurvey s = relation_survey(cfg, 400, 1e2, 1e3, 4, 1);
  CHECK(s.max_residual < 1e-10);
  CHECK(s.max_det_error < 1e-6);
  int total = 0;
  for (int c : s.counts) total += c;
  CHECK(total + s.excluded == 400);
}

TEST_CASE("lower chamber speed roughly doubles per period at the lower-trapping node") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  CollisionRecord r = slit_record(cfg, 0.1, -200.0, Chamber::Lower);
  while (r.t < 2.1) r = collision_map(cfg, r);
  CHECK(r.chamber == Chamber::Lower);
  // One period later, up to the collision granularity and O(1) corrections.
  CHECK(std::abs(r.v) / 200.0 == doctest::Approx(2.013).epsilon(0.1));
}

TEST_CASE("time reversal") {
  // The reversed orbit retraces the forward one: a post-collision state of
  // the reversed wall is the negated pre-collision state of the forward one.
  for (const SlitConfig& cfg : {elliptic_config(0.05), example_config(0.6, 0.1)}) {
    const SlitConfig rev = cfg.time_reversed();
    Rng rng(21);
    for (int k = 0; k < 30; ++k) {
      const Chamber ch = k % 2 ? Chamber::Upper : Chamber::Lower;
      const double speed = rng.uniform(3.0, 30.0);
      const CollisionRecord a = slit_record(cfg, rng.uniform(0.0, 2.0), ch == Chamber::Upper ? speed : -speed, ch);
      CollisionRecord b;
      try {
        b = collision_map(cfg, a);
      } catch (const Error&) {
        continue;
      }
      const double fd_b = cfg.wall_at(b.t, Side::RightLimit).fd;
      const CollisionRecord start{-b.t, -(2 * fd_b - b.v), b.y, b.chamber, CollisionKind::Slit};
      const CollisionRecord back = collision_map(rev, start);
      const double fd_a = cfg.wall_at(a.t, Side::RightLimit).fd;
      CHECK(back.t == doctest::Approx(-a.t).epsilon(1e-9));
      CHECK(back.v == doctest::Approx(-(2 * fd_a - a.v)).epsilon(1e-8));
      CHECK(back.chamber == a.chamber);
    }
  }
}

TEST_CASE("symplectic determinant of one step") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const CollisionRecord a = slit_record(cfg, 0.2, 37.0, Chamber::Upper);
  const CollisionRecord b = collision_map(cfg, a);
  const auto jac = monodromy(cfg, a, 1);
  CHECK(symplectic_determinant(cfg, a, b, jac) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("elliptic orbit check") {
  const PeriodicOrbitCheck c = elliptic_orbit_check(0.01);
  CHECK(c.closure_residual < 1e-9);
  CHECK(std::abs(c.trace) < 2);
  CHECK(c.trace == doctest::Approx(c.predicted_trace).epsilon(1e-4));
}
