#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "slitbilliard/trapping.hpp"

using namespace slitbilliard;

TEST_CASE("sign classification") {
  const TrappingVerdict low = classify(example_config(0.6, 0.1));
  CHECK(low.kind == TrapKind::LowerTrapping);
  REQUIRE(low.tr_value);
  CHECK(low.hyperbolic == (std::abs(*low.tr_value) > 2));
  CHECK(classify(example_config(0.5, 0.4)).kind == TrapKind::UpperTrapping);
  const TrigSeries s(0.5, {{1, 0.2}}, {});
  CHECK(classify(SlitConfig(s, s, 0.6, 0.1)).kind == TrapKind::Degenerate);
}

TEST_CASE("swapping the slits swaps the trapping chamber") {
  for (double lambda : {0.3, 0.5, 0.6, 0.9}) {
    for (double x0 : {0.0, 0.1, 0.25}) {
      if (x0 >= lambda) continue;
      const SlitConfig cfg = example_config(lambda, x0);
      const TrapKind a = classify(cfg).kind, b = classify(cfg.swapped()).kind;
      if (a == TrapKind::LowerTrapping) CHECK(b == TrapKind::UpperTrapping);
      if (a == TrapKind::UpperTrapping) CHECK(b == TrapKind::LowerTrapping);
      if (a == TrapKind::NoTrap || a == TrapKind::Degenerate) CHECK(b == a);
    }
  }
}

TEST_CASE("predicted rates") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  const GrowthPrediction p = predicted_rate(cfg, classify(cfg));
  CHECK(p.trapping == Chamber::Lower);
  CHECK(p.rate == doctest::Approx(2.013).epsilon(1e-3));
  CHECK(p.contraction == doctest::Approx(0.364).epsilon(1e-3));
  const TrigSeries s(0.5, {{1, 0.2}}, {});
  const SlitConfig same(s, s, 0.6, 0.1);
  CHECK_THROWS_AS(predicted_rate(same, classify(same)), Error);
}

TEST_CASE("grid") {
  const auto c = cell_centres(4);
  REQUIRE(c.size() == 4);
  CHECK(c[0] == 0.125);
  CHECK(c[3] == 0.875);
  const auto rows = scan(example_config(0.5, 0.1).left(), example_config(0.5, 0.1).right(), cell_centres(10),
                         cell_centres(10), 1);
  CHECK(rows.size() == 45);
  for (const auto& r : rows) {
    CHECK(r.x0 < r.lambda);
    CHECK(r.kind == classify(example_config(r.lambda, r.x0)).kind);
    if (r.hyperbolic) CHECK((r.kind == TrapKind::LowerTrapping || r.kind == TrapKind::UpperTrapping));
  }
}

TEST_CASE("ensemble sampling") {
  const SlitConfig cfg = example_config(0.6, 0.1);
  Ensemble ens;
  ens.count = 100;
  const auto a = sample_ensemble(cfg, ens, Chamber::Lower);
  const auto b = sample_ensemble(cfg, ens, Chamber::Lower);
  REQUIRE(a.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].v == b[i].v);
    CHECK(a[i].v <= -1e3);
    CHECK(a[i].v >= -1e3 - 1);
  }
  ens.count = 0;
  CHECK_THROWS_AS(sample_ensemble(cfg, ens, Chamber::Lower), Error);
}
