#include "slitbilliard/hybrid.hpp"

#include <cmath>

namespace slitbilliard {

namespace {

using Ld = long double;

/// Post-collision speed with the given action density (sign from the gap).
Ld velocity_for(const GapSample<Ld>& s, Ld k) {
  Ld v = (k - s.g * s.gd) / s.g;
  for (int it = 0; it < 100; ++it) {
    const Ld next = (k - s.g * s.gd - s.g * s.g * s.gdd / (Ld(3) * v)) / s.g;
    const Ld dv = next - v;
    v = next;
    if (std::fabs(dv) <= Ld(4) * std::numeric_limits<Ld>::epsilon() * std::fabs(v)) break;
  }
  return v;
}

}  // namespace

HybridEngine::HybridEngine(const SlitConfig& cfg, HybridOptions opt)
    : nf_(cfg), upper_(cfg, Chamber::Upper), lower_(cfg, Chamber::Lower), opt_(opt) {
  if (opt_.margin < 1) throw Error(ErrorCode::InvalidConfig, "hybrid margin must be at least one collision");
}

HybridOrbit::HybridOrbit(const HybridEngine& engine, const CollisionRecord& start)
    : engine_(&engine), rec_(start.as<long double>()) {
  if (start.kind != CollisionKind::Slit) throw Error(ErrorCode::InvalidConfig, "orbit must start at a slit collision");
  rec_.t = reduce_mod2(rec_.t);
  const SlitConfig& cfg = engine.config();
  const Ld ts = detail::next_singular_time(cfg, rec_.t);
  next_star_ = reduce_mod2(ts) == Ld(cfg.t1_star()) ? 1 : 2;
}

double HybridOrbit::speed() const {
  if (!strip_mode_) return static_cast<double>(std::fabs(rec_.v));
  const JumpConstants& j = engine_->normal_forms().constants().at(strip_index(point_.strip));
  const double gap = is_upper(point_.strip) ? j.l_plus : j.f_plus;
  return 2.0 * point_.action / gap;
}

double HybridOrbit::action() const {
  if (strip_mode_) return point_.action;
  return 0.5 * static_cast<double>(engine_->geometry(rec_.chamber).action_density(rec_.t, rec_.v));
}

Chamber HybridOrbit::chamber() const {
  if (!strip_mode_) return rec_.chamber;
  return is_upper(point_.strip) ? Chamber::Upper : Chamber::Lower;
}

void HybridOrbit::observe(double speed) {
  min_speed_ = std::min(min_speed_, speed);
  max_speed_ = std::max(max_speed_, speed);
}

void HybridOrbit::cross(int count) {
  for (int c = 0; c < count; ++c) {
    if (next_star_ == 1) ++period_;
    next_star_ = 3 - next_star_;
  }
}

void HybridOrbit::skip_smooth_stretch() {
  const SlitConfig& cfg = engine_->config();
  const ChamberGeometry& g = engine_->geometry(rec_.chamber);
  const Ld k = g.action_density(rec_.t, rec_.v);
  if (!(0.5 * g.total() * static_cast<double>(k) >= g.action_threshold())) return;
  const Ld ts = detail::next_singular_time(cfg, rec_.t);
  const double tr = reduce_mod2(static_cast<double>(rec_.t));
  double integral = g.cumulative_star(next_star_) - g.cumulative(tr);
  if (cfg.t_star(next_star_) <= tr) integral += g.total();
  // Each slit collision advances k * integral by 2.
  const double y = static_cast<double>(k) * integral;
  const double n = std::floor(0.5 * y) - engine_->options().margin;
  if (!(n > 0)) return;
  const Ld rem = Ld(y) - Ld(2) * Ld(n);
  const Ld g_star = g.gap<Ld>(ts, Side::LeftLimit).g;
  Ld t = ts - rem * g_star * g_star / k;
  for (int it = 0; it < 30; ++it) {
    const Ld gt = g.gap<Ld>(t, Side::RightLimit).g;
    const Ld step = (k * g.local_integral<Ld>(t, ts, Side::RightLimit) - rem) * gt * gt / k;
    t += step;
    if (std::fabs(step) <= Ld(8) * std::numeric_limits<Ld>::epsilon() * std::fabs(t)) break;
  }
  const Ld v = velocity_for(g.gap<Ld>(t, Side::RightLimit), k);
  rec_ = {t, v, cfg.wall_at(t, Side::RightLimit).f, rec_.chamber, CollisionKind::Slit};
  observe(static_cast<double>(std::fabs(v)));
}

void HybridOrbit::exact_leg() {
  const SlitConfig& cfg = engine_->config();
  const HybridOptions& opt = engine_->options();
  skip_smooth_stretch();
  const Ld ts = detail::next_singular_time(cfg, rec_.t);
  while (rec_.t <= ts) {
    StepInfo info;
    rec_ = collision_map(cfg, rec_, opt.tol, &info);
    cross(info.crossings);
    observe(static_cast<double>(std::fabs(rec_.v)));
  }
  if (rec_.t >= Ld(4)) rec_.t -= Ld(2);

  const ChamberGeometry& g = engine_->geometry(rec_.chamber);
  const double action = 0.5 * static_cast<double>(g.action_density(rec_.t, rec_.v));
  if (action >= opt.strip_action) {
    const int last = 3 - next_star_;
    point_ = engine_->normal_forms().to_strip(rec_.t, rec_.v, make_strip(last, rec_.chamber));
    strip_mode_ = true;
  }
}

void HybridOrbit::strip_leg() {
  const NormalForms& nf = engine_->normal_forms();
  const Branch b = nf.classify_unchecked(point_);
  point_ = nf.apply(b, point_, leg_of(point_.strip), NFMode::GPlusH);
  cross(1);
  observe(speed());
  if (point_.action < engine_->options().strip_action) {
    rec_ = nf.from_strip<long double>(point_, 0);
    strip_mode_ = false;
  }
}

PeriodSummary HybridOrbit::advance_period() {
  const int target = period_ + 1;
  min_speed_ = std::numeric_limits<double>::infinity();
  max_speed_ = 0;
  observe(speed());
  while (period_ < target) {
    if (strip_mode_) strip_leg();
    else exact_leg();
  }
  return {period_, speed(), min_speed_, max_speed_, chamber(), strip_mode_};
}

}  // namespace slitbilliard
