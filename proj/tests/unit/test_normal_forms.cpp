#include <cmath>

#include "doctest.h"
#include "slitbilliard/normal_forms.hpp"
#include "slitbilliard/rng.hpp"

using namespace slitbilliard;

TEST_CASE("constants of the example node") {
  const NFConstants k = compute_constants(example_config(0.6, 0.1));
  CHECK(k.at(1).l_plus / k.at(1).l_minus == doctest::Approx(0.4).epsilon(1e-13));
  CHECK(k.at(2).l_plus / k.at(2).l_minus == doctest::Approx(0.9106).epsilon(1e-4));
  CHECK(k.at(1).l_plus / k.at(1).l_minus * k.at(2).l_plus / k.at(2).l_minus == doctest::Approx(0.364).epsilon(1e-3));
  CHECK(k.at(2).m_plus / k.at(2).m_minus == doctest::Approx(1.258).epsilon(1e-3));
}

TEST_CASE("constant identities over random nodes") {
  Rng rng(6);
  for (int n = 0; n < 40; ++n) {
    const double lambda = rng.uniform(0.05, 0.95);
    const NFConstants k = compute_constants(example_config(lambda, rng.uniform(0.0, lambda)));
    for (int i : {1, 2}) {
      const JumpConstants& c = k.at(i);
      CHECK(std::abs(c.delta - 0.5 * (c.l_plus / c.l_minus) * c.a) < 1e-12);
    }
    CHECK(k.L_star * (k.theta2 - k.theta1) == doctest::Approx(2 * k.beta).epsilon(1e-10));
    CHECK(k.L_star * (2 + k.theta1 - k.theta2) == doctest::Approx(2 * k.alpha).epsilon(1e-10));
    CHECK(k.M_star * (k.zeta2 - k.zeta1) == doctest::Approx(2 * k.beta_p).epsilon(1e-10));
  }
}

TEST_CASE("no jump: parabolic traces") {
  const TrigSeries s(0.5, {{1, 0.2}}, {{3, 0.05}});
  const NFConstants k = compute_constants(SlitConfig(s, s, 0.6, 0.1));
  for (int i : {1, 2}) {
    CHECK(k.at(i).delta == 0.0);
    CHECK(k.at(i).delta1 == 0.0);
    CHECK(k.at(i).delta2_mixed == 0.0);
    CHECK(k.at(i).a == 0.0);
    CHECK(k.at(i).a_prime == 0.0);
  }
  CHECK(k.tr_upper == 2.0);
  CHECK(k.tr_lower == 2.0);
}

TEST_CASE("strip coordinates") {
  const NormalForms nf(example_config(0.6, 0.1));
  const double ts = nf.config().t1_star();
  // A collision right at the singular angle has tau = 0.
  const StripPoint p0 = nf.to_strip(ts, 2000.0, Strip::R1Plus);
  CHECK(std::abs(p0.coord) < 1e-12);

  Rng rng(9);
  for (Strip s : {Strip::R1Plus, Strip::R2Plus, Strip::R1Minus, Strip::R2Minus}) {
    for (int k = 0; k < 50; ++k) {
      const StripPoint p{rng.uniform(0.0, 1.9), 1e4, s};
      const CollisionRecord r = nf.from_strip<double>(p);
      CHECK(r.chamber == (is_upper(s) ? Chamber::Upper : Chamber::Lower));
      const StripPoint q = nf.to_strip(r.t, r.v, s);
      CHECK(std::abs(q.coord - p.coord) < 1e-9);
      CHECK(std::abs(q.action - p.action) < 1e-9 * p.action);
    }
  }
}

TEST_CASE("centre of the upper window is the upper-upper branch") {
  const NormalForms nf(example_config(0.6, 0.1));
  StripPoint p{0.0, 1e4, Strip::R1Plus};
  p.coord = nf.fractional(p) - 1.0;
  if (p.coord < 0) p.coord += 2.0;
  CHECK(nf.fractional(p) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(nf.classify(p, Leg::L12) == Branch::UU);
  const auto w = nf.window(Branch::UU, Leg::L12);
  CHECK(w[0] < 1.0);
  CHECK(w[1] > 1.0);
}

TEST_CASE("normal form agrees with the exact map") {
  const NormalForms nf(example_config(0.6, 0.1));
  const auto w = nf.window(Branch::UU, Leg::L12);
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    StripPoint p{0.0, 1e4, Strip::R1Plus};
    const double target = rng.uniform(w[0] + 0.1 * (w[1] - w[0]), w[1] - 0.1 * (w[1] - w[0]));
    p.coord = nf.fractional(p) - target;
    p.coord -= 2.0 * std::floor(p.coord / 2.0);
    const StripPoint ex = nf.empirical(p, Leg::L12);
    const StripPoint g = nf.apply(Branch::UU, p, Leg::L12, NFMode::GOnly);
    const StripPoint gh = nf.apply(Branch::UU, p, Leg::L12, NFMode::GPlusH);
    CHECK(ex.strip == Strip::R2Plus);
    const double eg = std::abs(ex.action - g.action) + std::abs(ex.coord - g.coord);
    const double egh = std::abs(ex.action - gh.action) + std::abs(ex.coord - gh.coord);
    CHECK(eg < 1e-2);
    CHECK(egh <= eg + 1e-9);
  }
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 10, 100}, {1, 0.01, 1e-4}) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(loglog_slope({2, 4, 8, 16}, {3, 6, 12, 24}) == doctest::Approx(1.0).epsilon(1e-12));
}
