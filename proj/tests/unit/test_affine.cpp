#include <cmath>

#include "doctest.h"
#include "slitbilliard/affine.hpp"
#include "slitbilliard/normal_forms.hpp"
#include "slitbilliard/rng.hpp"

using namespace slitbilliard;

TEST_CASE("no jump: parabolic and no escape") {
  const TrigSeries s(0.5, {{1, 0.2}}, {});
  const AffineSystem sys = build_affine(SlitConfig(s, s, 0.6, 0.1));
  CHECK(sys.trace == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(sys.hyperbolic);
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vec2 p = sys.box_point(0, rng.uniform(0.0, 2.0), rng.uniform(sys.leg12.lo, sys.leg12.hi));
    CHECK_FALSE(iterate(sys, p, 30).exit_period.has_value());
  }
  CHECK_THROWS_AS(survival_curve(sys, 0, 10, 5, 1, 1), Error);
}

TEST_CASE("example node: trace, determinant and eigen-data") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const AffineSystem sys = build_affine(cfg);
  const NFConstants k = compute_constants(cfg);
  CHECK(sys.chamber == Chamber::Upper);
  CHECK(std::abs(sys.trace - k.tr_upper) < 1e-8);
  CHECK(std::abs(sys.det - 1) < 1e-12);
  REQUIRE(sys.hyperbolic);
  CHECK(std::abs(sys.lambda_u * sys.lambda_s - 1) < 1e-12);
  const Vec2 img = sys.dgu * sys.e_u;
  CHECK(std::abs(img[0] - sys.lambda_u * sys.e_u[0]) < 1e-10 * std::abs(sys.lambda_u));
  CHECK(std::abs(img[1] - sys.lambda_u * sys.e_u[1]) < 1e-10 * std::abs(sys.lambda_u));
}

TEST_CASE("random nodes: unit determinant") {
  Rng rng(14);
  for (int n = 0; n < 30; ++n) {
    const double lambda = rng.uniform(0.05, 0.95);
    const AffineSystem sys = build_affine(example_config(lambda, rng.uniform(0.0, lambda)));
    CHECK(std::abs(sys.det - 1) < 1e-12);
  }
}

TEST_CASE("good-line bound") {
  CHECK(good_line_bound(0.4) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(good_line_bound(0.5) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(good_line_bound(1 - 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(good_line_bound(build_affine(example_config(0.6, 0.1))) == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("waiting time") {
  const WaitingTime w = waiting_time(0.75, 61.3, 2.0, 2.0, 0.1);
  CHECK(w.k == 16);
  CHECK(w.N == w.k * w.l + 1);
  CHECK(w.T == 2 * w.N);
  const WaitingTime h = waiting_time(0.75, 61.3, 2.0, 2.0, 0.05);
  CHECK(h.k - w.k <= static_cast<long>(std::ceil(std::log(2.0) / std::log(1 / 0.75))));
  CHECK(waiting_time(0.999, 61.3, 2.0, 2.0, 0.1).k > waiting_time(0.99, 61.3, 2.0, 2.0, 0.1).k);
}

TEST_CASE("escape at the first jump") {
  const AffineSystem sys = build_affine(example_config(0.6, 0.1));
  Rng rng(5);
  int found = 0;
  for (int k = 0; k < 200 && found < 10; ++k) {
    const Vec2 p = sys.box_point(0, rng.uniform(0.0, 2.0), rng.uniform(sys.leg12.lo, sys.leg12.hi));
    const auto q = sys.leg12.step(p);
    REQUIRE(q.has_value());
    if (sys.leg21.survives(*q)) continue;
    ++found;
    const EscapeOutcome out = iterate(sys, p, 5);
    REQUIRE(out.exit_period.has_value());
    CHECK(*out.exit_period == 1);
    CHECK(out.exit_leg == ExitLeg::AtT1);
  }
  CHECK(found > 0);
}

TEST_CASE("survival is nonincreasing") {
  const AffineSystem sys = build_affine(example_config(0.6, 0.1));
  const auto s = survival_curve(sys, 0, 2000, 20, 3, 1);
  REQUIRE(s.size() == 21);
  CHECK(s[0] == 1.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] <= s[i - 1]);
}

TEST_CASE("fragmentation at n = 0 counts the endpoints") {
  const AffineSystem sys = build_affine(example_config(0.6, 0.1));
  const Segment line = unstable_chord(sys, sys.box_centre(0));
  const double ell = line.length();
  const std::vector<double> eps{0.001, 0.01, 0.1, 10.0};
  const auto stats = line_fragmentation(sys, line, 3, eps);
  REQUIRE(stats.size() == 4);
  for (std::size_t j = 0; j < eps.size(); ++j)
    CHECK(stats[0].measure[j] == doctest::Approx(std::min(2 * eps[j], ell)).epsilon(1e-12));
  for (std::size_t n = 1; n < stats.size(); ++n) CHECK(stats[n].surviving_measure <= stats[n - 1].surviving_measure + 1e-15);
}
