#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slitbilliard/hybrid.hpp"
#include "slitbilliard/wall.hpp"

namespace slitbilliard {

enum class TrapKind { LowerTrapping, UpperTrapping, NoTrap, Degenerate };

std::string_view to_string(TrapKind k);

struct TrappingVerdict {
  TrapKind kind = TrapKind::NoTrap;
  /// Tr^U when the lower chamber traps, Tr^L when the upper one does.
  std::optional<double> tr_value;
  bool hyperbolic = false;
  /// f_L - f_R at t_1^* and t_2^*.
  double delta1 = 0, delta2 = 0;
};

/// Sign test on f_L - f_R at the two singular times (equality within
/// `degenerate_tol` is Degenerate).
TrappingVerdict classify(const SlitConfig& cfg, double degenerate_tol = 1e-12);

struct AtlasRow {
  double lambda = 0, x0 = 0;
  TrapKind kind = TrapKind::NoTrap;
  std::optional<double> tr;
  bool hyperbolic = false;
};

/// One row per grid node with x0 < lambda, in lambda-major order. Nodes are
/// classified independently.
std::vector<AtlasRow> scan(const TrigSeries& left, const TrigSeries& right, const std::vector<double>& lambdas,
                           const std::vector<double>& x0s, unsigned threads = 0);

/// n cell centres (k + 1/2)/n of the unit interval.
std::vector<double> cell_centres(int n);

struct GrowthPrediction {
  Chamber trapping = Chamber::Lower;
  /// Per-period action factor in the trapping chamber.
  double rate = 1;
  /// Per-period factor in the other chamber.
  double contraction = 1;
};

/// Throws NotTrapping unless the verdict is a trapping kind.
GrowthPrediction predicted_rate(const SlitConfig& cfg, const TrappingVerdict& verdict);

struct Ensemble {
  int count = 1000;
  double v_min = 1e3;
  double v_max = 1e3 + 1;
  std::uint64_t seed = 1;
};

/// Random slit records: t uniform on [0, 2), |v| uniform on the range, in
/// the given chamber.
std::vector<CollisionRecord> sample_ensemble(const SlitConfig& cfg, const Ensemble& ens, Chamber chamber);

struct RateReport {
  Chamber chamber = Chamber::Lower;
  int periods = 0;
  int discard = 0;
  /// Mean log|v| over the orbits used, per period (index 0 is the start).
  std::vector<double> mean_log_speed;
  /// Least-squares slope of mean_log_speed over periods > discard.
  double slope = 0;
  /// 95% half width of the mean of the per-orbit slopes.
  double ci_half_width = 0;
  int used = 0;
  /// Orbits dropped after a singular hit, grazing contact or stall.
  int excluded = 0;
  /// Orbits dropped because they left the chamber.
  int escaped = 0;
};

/// Ensemble fit of the per-period log-growth of |v| for orbits that stay in
/// `chamber` for all periods. Orbits that leave are counted in `escaped`.
RateReport ensemble_rate(const HybridEngine& engine, const Ensemble& ens, Chamber chamber, int periods,
                         int discard = 3, unsigned threads = 0);

/// Growth in the trapping chamber. Throws NotTrapping.
RateReport measure_rate(const SlitConfig& cfg, const Ensemble& ens, int periods, const HybridOptions& opt = {},
                        unsigned threads = 0);

struct ResidentReport {
  Chamber chamber = Chamber::Upper;
  /// Mean per-period change of log|v| over periods spent wholly in the
  /// chamber while the scaled action stays above `min_action`.
  double mean_log_change = 0;
  double ci_half_width = 0;
  int transitions = 0;
  int orbits = 0;
  int excluded = 0;
};

/// Contraction in the chamber that does not trap, measured on orbits
/// started there until they escape. Throws NotTrapping.
ResidentReport measure_contraction(const SlitConfig& cfg, const Ensemble& ens, int periods, double min_action = 20,
                                   const HybridOptions& opt = {}, unsigned threads = 0);

struct OscillationReport {
  int orbits = 0;
  int excluded = 0;
  /// Orbits that dropped below low * |v0| after exceeding high * |v0|.
  int events = 0;
  int reached_high = 0;
  int trapped = 0;
};

/// Orbits start in either chamber with equal probability.
OscillationReport oscillation_check(const SlitConfig& cfg, const Ensemble& ens, int periods, double high = 10,
                                    double low = 0.5, const HybridOptions& opt = {}, unsigned threads = 0);

/// Smallest |v0| in `candidates` whose fitted growth lies within rel_tol of
/// the prediction, or nullopt.
std::optional<double> estimate_v_star(const SlitConfig& cfg, const std::vector<double>& candidates, int count,
                                      int periods, std::uint64_t seed, double rel_tol = 0.05,
                                      const HybridOptions& opt = {}, unsigned threads = 0);

}  // namespace slitbilliard
