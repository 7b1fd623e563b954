#include "slitbilliard/trapping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slitbilliard/normal_forms.hpp"
#include "slitbilliard/parallel.hpp"
#include "slitbilliard/rng.hpp"

namespace slitbilliard {

std::string_view to_string(TrapKind k) {
  switch (k) {
    case TrapKind::LowerTrapping: return "LowerTrapping";
    case TrapKind::UpperTrapping: return "UpperTrapping";
    case TrapKind::NoTrap: return "NoTrap";
    case TrapKind::Degenerate: return "Degenerate";
  }
  return "?";
}

TrappingVerdict classify(const SlitConfig& cfg, double degenerate_tol) {
  TrappingVerdict v;
  const double t1 = cfg.t1_star(), t2 = cfg.t2_star();
  v.delta1 = cfg.left().eval(t1).f - cfg.right().eval(t1).f;
  v.delta2 = cfg.left().eval(t2).f - cfg.right().eval(t2).f;
  if (std::abs(v.delta1) <= degenerate_tol || std::abs(v.delta2) <= degenerate_tol) {
    v.kind = TrapKind::Degenerate;
    return v;
  }
  if (v.delta1 < 0 && v.delta2 > 0) v.kind = TrapKind::LowerTrapping;
  else if (v.delta1 > 0 && v.delta2 < 0) v.kind = TrapKind::UpperTrapping;
  else return v;
  const NFConstants k = compute_constants(cfg);
  v.tr_value = v.kind == TrapKind::LowerTrapping ? k.tr_upper : k.tr_lower;
  v.hyperbolic = std::abs(*v.tr_value) > 2.0;
  return v;
}

std::vector<double> cell_centres(int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = (k + 0.5) / n;
  return out;
}

std::vector<AtlasRow> scan(const TrigSeries& left, const TrigSeries& right, const std::vector<double>& lambdas,
                           const std::vector<double>& x0s, unsigned threads) {
  std::vector<AtlasRow> rows;
  for (double lam : lambdas) {
    if (!(lam > 0 && lam < 1)) throw Error(ErrorCode::InvalidConfig, "lambda grid must lie in (0, 1)");
    for (double x0 : x0s) {
      if (!(x0 >= 0)) throw Error(ErrorCode::InvalidConfig, "x0 grid must be nonnegative");
      if (x0 < lam) rows.push_back({lam, x0, TrapKind::NoTrap, std::nullopt, false});
    }
  }
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    AtlasRow& r = rows[i];
    const TrappingVerdict v = classify(SlitConfig(left, right, r.lambda, r.x0));
    r.kind = v.kind;
    r.tr = v.tr_value;
    r.hyperbolic = v.hyperbolic;
  });
  return rows;
}

GrowthPrediction predicted_rate(const SlitConfig& cfg, const TrappingVerdict& verdict) {
  if (verdict.kind != TrapKind::LowerTrapping && verdict.kind != TrapKind::UpperTrapping)
    throw Error(ErrorCode::NotTrapping, "configuration has no trapping chamber");
  const JumpData j1 = cfg.jump_data(1), j2 = cfg.jump_data(2);
  const double lower = (j1.f_plus / j1.f_minus) * (j2.f_plus / j2.f_minus);
  const double upper = (j1.l_plus / j1.l_minus) * (j2.l_plus / j2.l_minus);
  if (verdict.kind == TrapKind::LowerTrapping) return {Chamber::Lower, lower, upper};
  return {Chamber::Upper, upper, lower};
}

std::vector<CollisionRecord> sample_ensemble(const SlitConfig& cfg, const Ensemble& ens, Chamber chamber) {
  if (ens.count <= 0) throw Error(ErrorCode::InsufficientSamples, "ensemble must contain at least one orbit");
  if (!(ens.v_min > 0 && ens.v_max >= ens.v_min)) throw Error(ErrorCode::InvalidConfig, "invalid speed range");
  std::vector<CollisionRecord> out;
  out.reserve(static_cast<std::size_t>(ens.count));
  for (int i = 0; i < ens.count; ++i) {
    Rng rng = Rng::stream(ens.seed, static_cast<std::uint64_t>(i));
    const double t = rng.uniform(0.0, 2.0);
    const double speed = rng.uniform(ens.v_min, ens.v_max);
    out.push_back(slit_record(cfg, t, chamber == Chamber::Upper ? speed : -speed, chamber));
  }
  return out;
}

namespace {

enum class OrbitStatus { Used, Escaped, Excluded };

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

struct MeanCi {
  double mean = 0, half_width = 0;
};

MeanCi mean_ci(const std::vector<double>& xs) {
  MeanCi out;
  if (xs.empty()) return out;
  const double n = static_cast<double>(xs.size());
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return out;
  double ss = 0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.half_width = 1.96 * std::sqrt(ss / (n - 1) / n);
  return out;
}

}  // namespace

RateReport ensemble_rate(const HybridEngine& engine, const Ensemble& ens, Chamber chamber, int periods, int discard,
                         unsigned threads) {
  if (periods < discard + 2) throw Error(ErrorCode::InsufficientSamples, "too few periods after the discarded ones");
  const auto starts = sample_ensemble(engine.config(), ens, chamber);
  const std::size_t n = starts.size();
  const std::size_t len = static_cast<std::size_t>(periods) + 1;
  std::vector<std::vector<double>> logs(n);
  std::vector<OrbitStatus> status(n, OrbitStatus::Used);

  parallel_for(n, threads, [&](std::size_t i) {
    std::vector<double> lv(len);
    lv[0] = std::log(std::abs(starts[i].v));
    try {
      HybridOrbit orbit(engine, starts[i]);
      int filled = 0;
      while (filled < periods) {
        const PeriodSummary s = orbit.advance_period();
        if (s.chamber != chamber) {
          status[i] = OrbitStatus::Escaped;
          return;
        }
        const int upto = std::min(s.period, periods);
        for (int p = filled + 1; p <= upto; ++p) lv[static_cast<std::size_t>(p)] = std::log(s.speed);
        filled = upto;
      }
    } catch (const Error& e) {
      if (!e.numeric()) throw;
      status[i] = OrbitStatus::Excluded;
      return;
    }
    logs[i] = std::move(lv);
  });

  RateReport rep;
  rep.chamber = chamber;
  rep.periods = periods;
  rep.discard = discard;
  rep.mean_log_speed.assign(len, 0.0);
  std::vector<double> xs;
  for (int p = discard; p <= periods; ++p) xs.push_back(p);
  std::vector<double> slopes;
  for (std::size_t i = 0; i < n; ++i) {
    if (status[i] == OrbitStatus::Escaped) ++rep.escaped;
    if (status[i] == OrbitStatus::Excluded) ++rep.excluded;
    if (status[i] != OrbitStatus::Used) continue;
    ++rep.used;
    for (std::size_t p = 0; p < len; ++p) rep.mean_log_speed[p] += logs[i][p];
    slopes.push_back(least_squares_slope(xs, {logs[i].begin() + discard, logs[i].end()}));
  }
  if (rep.used < 2) throw Error(ErrorCode::InsufficientSamples, "fewer than two orbits stayed in the chamber");
  for (double& m : rep.mean_log_speed) m /= rep.used;
  rep.slope = least_squares_slope(xs, {rep.mean_log_speed.begin() + discard, rep.mean_log_speed.end()});
  rep.ci_half_width = mean_ci(slopes).half_width;
  return rep;
}

RateReport measure_rate(const SlitConfig& cfg, const Ensemble& ens, int periods, const HybridOptions& opt,
                        unsigned threads) {
  const GrowthPrediction pred = predicted_rate(cfg, classify(cfg));
  if (ens.v_min < 1e3) throw Error(ErrorCode::InvalidConfig, "rate ensembles start at |v0| >= 1e3");
  const HybridEngine engine(cfg, opt);
  return ensemble_rate(engine, ens, pred.trapping, periods, 3, threads);
}

ResidentReport measure_contraction(const SlitConfig& cfg, const Ensemble& ens, int periods, double min_action,
                                   const HybridOptions& opt, unsigned threads) {
  const GrowthPrediction pred = predicted_rate(cfg, classify(cfg));
  const Chamber other = pred.trapping == Chamber::Lower ? Chamber::Upper : Chamber::Lower;
  const HybridEngine engine(cfg, opt);
  const auto starts = sample_ensemble(cfg, ens, other);
  const std::size_t n = starts.size();
  std::vector<std::vector<double>> changes(n);
  std::vector<char> excluded(n, 0);

  parallel_for(n, threads, [&](std::size_t i) {
    try {
      HybridOrbit orbit(engine, starts[i]);
      PeriodSummary prev = orbit.advance_period();
      double prev_action = orbit.action();
      for (int p = 1; p < periods && prev.chamber == other && prev_action >= min_action; ++p) {
        const PeriodSummary s = orbit.advance_period();
        const double action = orbit.action();
        if (s.chamber == other && s.period == prev.period + 1 && prev_action >= min_action && action >= min_action)
          changes[i].push_back(std::log(s.speed / prev.speed));
        prev = s;
        prev_action = action;
      }
    } catch (const Error& e) {
      if (!e.numeric()) throw;
      changes[i].clear();
      excluded[i] = 1;
    }
  });

  ResidentReport rep;
  rep.chamber = other;
  std::vector<double> all;
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) {
      ++rep.excluded;
      continue;
    }
    ++rep.orbits;
    all.insert(all.end(), changes[i].begin(), changes[i].end());
  }
  rep.transitions = static_cast<int>(all.size());
  if (rep.transitions < 2) throw Error(ErrorCode::InsufficientSamples, "no resident periods above the action floor");
  const MeanCi m = mean_ci(all);
  rep.mean_log_change = m.mean;
  rep.ci_half_width = m.half_width;
  return rep;
}

OscillationReport oscillation_check(const SlitConfig& cfg, const Ensemble& ens, int periods, double high, double low,
                                    const HybridOptions& opt, unsigned threads) {
  const GrowthPrediction pred = predicted_rate(cfg, classify(cfg));
  const HybridEngine engine(cfg, opt);
  const auto lower = sample_ensemble(cfg, ens, Chamber::Lower);
  const auto upper = sample_ensemble(cfg, ens, Chamber::Upper);
  const std::size_t n = lower.size();
  enum Flags : unsigned { kExcluded = 1, kEvent = 2, kHigh = 4, kTrapped = 8 };
  std::vector<unsigned> flags(n, 0);

  parallel_for(n, threads, [&](std::size_t i) {
    const CollisionRecord& start = i % 2 == 0 ? lower[i] : upper[i];
    const double v0 = std::abs(start.v);
    unsigned f = 0;
    try {
      HybridOrbit orbit(engine, start);
      while (orbit.period() < periods) {
        const PeriodSummary s = orbit.advance_period();
        if ((f & kHigh) && s.min_speed < low * v0) f |= kEvent;
        if (s.max_speed > high * v0) f |= kHigh;
      }
      if (orbit.chamber() == pred.trapping) f |= kTrapped;
    } catch (const Error& e) {
      if (!e.numeric()) throw;
      f = kExcluded;
    }
    flags[i] = f;
  });

  OscillationReport rep;
  for (unsigned f : flags) {
    if (f & kExcluded) {
      ++rep.excluded;
      continue;
    }
    ++rep.orbits;
    if (f & kEvent) ++rep.events;
    if (f & kHigh) ++rep.reached_high;
    if (f & kTrapped) ++rep.trapped;
  }
  return rep;
}

std::optional<double> estimate_v_star(const SlitConfig& cfg, const std::vector<double>& candidates, int count,
                                      int periods, std::uint64_t seed, double rel_tol, const HybridOptions& opt,
                                      unsigned threads) {
  const GrowthPrediction pred = predicted_rate(cfg, classify(cfg));
  const HybridEngine engine(cfg, opt);
  std::vector<double> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  const double target = std::log(pred.rate);
  for (double v : sorted) {
    const RateReport r = ensemble_rate(engine, {count, v, v + 1, seed}, pred.trapping, periods, 3, threads);
    if (std::abs(r.slope - target) <= rel_tol * std::abs(target)) return v;
  }
  return std::nullopt;
}

}  // namespace slitbilliard
