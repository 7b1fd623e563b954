#pragma once

#include <limits>

#include "slitbilliard/action_angle.hpp"
#include "slitbilliard/billiard.hpp"
#include "slitbilliard/normal_forms.hpp"

namespace slitbilliard {

struct HybridOptions {
  /// Exact slit collisions kept before each singular time.
  int margin = 2;
  /// Scaled action above which whole legs are taken by the normal forms
  /// (G + H). Infinity keeps every jump on the exact map.
  double strip_action = 1e12;
  SolverTolerances tol;
};

/// Shared, immutable data for long orbits of one configuration.
class HybridEngine {
 public:
  explicit HybridEngine(const SlitConfig& cfg, HybridOptions opt = {});

  const SlitConfig& config() const { return nf_.config(); }
  const NormalForms& normal_forms() const { return nf_; }
  const ChamberGeometry& geometry(Chamber c) const { return c == Chamber::Upper ? upper_ : lower_; }
  const HybridOptions& options() const { return opt_; }

 private:
  NormalForms nf_;
  ChamberGeometry upper_, lower_;
  HybridOptions opt_;
};

struct PeriodSummary {
  /// Completed crossings of t_1^*.
  int period = 0;
  /// |v| at the first slit collision after the crossing.
  double speed = 0;
  /// Extremes of |v| over the records visited during the period.
  double min_speed = 0;
  double max_speed = 0;
  Chamber chamber = Chamber::Upper;
  bool strip_mode = false;
};

/// One orbit advanced period by period. Smooth stretches at high action are
/// skipped with the action frozen; every jump is crossed on the exact map
/// in long double until the scaled action exceeds `strip_action`.
class HybridOrbit {
 public:
  HybridOrbit(const HybridEngine& engine, const CollisionRecord& start);

  /// Runs to the first slit collision after the next crossing of t_1^*.
  /// Numeric failures of the exact map propagate as Error.
  PeriodSummary advance_period();

  double speed() const;
  /// Scaled action K/2 in the current chamber.
  double action() const;
  Chamber chamber() const;
  int period() const { return period_; }
  bool strip_mode() const { return strip_mode_; }

 private:
  void exact_leg();
  void strip_leg();
  void skip_smooth_stretch();
  void observe(double speed);
  void cross(int count);

  const HybridEngine* engine_;
  BasicRecord<long double> rec_;
  StripPoint point_;
  bool strip_mode_ = false;
  int next_star_ = 1;
  int period_ = 0;
  double min_speed_ = std::numeric_limits<double>::infinity();
  double max_speed_ = 0;
};

}  // namespace slitbilliard
