#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "slitbilliard/errors.hpp"
#include "slitbilliard/wall.hpp"

namespace slitbilliard {

enum class Chamber { Upper, Lower };
/// None marks a free-flight phase point that is not a collision.
enum class CollisionKind { None, Slit, Ceiling, Floor };

std::string_view to_string(Chamber c);
std::string_view to_string(CollisionKind k);

/// State of the ball immediately after a collision (or at an arbitrary
/// phase point when kind == None). Time is absolute, never reduced.
template <class Real>
struct BasicRecord {
  Real t{};
  Real v{};
  Real y{};
  Chamber chamber = Chamber::Upper;
  CollisionKind kind = CollisionKind::None;

  template <class Other>
  BasicRecord<Other> as() const {
    return {Other(t), Other(v), Other(y), chamber, kind};
  }
};

using CollisionRecord = BasicRecord<double>;

struct SolverTolerances {
  /// |v - f'| below this at a moving-wall contact is tangential contact.
  double grazing = 1e-9;
  /// A contact is a hit on the slit edge when its time distance to a
  /// singular time, times max(1, |v - f'|), is below this.
  double singular = 1e-12;
  /// A crossing of a singular time with |y - f^+| below this hits the edge.
  double edge = 1e-12;
  int max_root_iterations = 100000;
};

/// What happened between two consecutive slit collisions.
struct StepInfo {
  int fixed_bounces = 0;
  int crossings = 0;
  Chamber from = Chamber::Upper;
  Chamber to = Chamber::Upper;
};

/// The relation that links two consecutive slit collisions.
enum class Relation { UpperStay, LowerStay, UpperToLowerViaCeiling, UpperToLowerDirect,
                      LowerToUpperViaFloor, LowerToUpperDirect, Other };

std::string_view to_string(Relation r);
Relation classify_relation(const StepInfo& info);

/// Residuals (time equation, velocity equation) of the collision relation
/// linking a -> b.
std::array<double, 2> relation_residual(const SlitConfig& cfg, Relation rel, const CollisionRecord& a,
                                        const CollisionRecord& b);

namespace detail {

template <class Real>
Real next_singular_time(const SlitConfig& cfg, Real t) {
  using std::floor;
  const Real base = Real(2) * floor(t / Real(2));
  const std::array<Real, 3> cand{base + Real(cfg.t1_star()), base + Real(cfg.t2_star()),
                                 base + Real(2) + Real(cfg.t1_star())};
  for (const Real& c : cand)
    if (c > t) return c;
  return base + Real(2) + Real(cfg.t2_star());
}

template <class Real>
Real distance_to_singular(const SlitConfig& cfg, Real t) {
  using std::abs;
  using std::min;
  const Real tr = reduce_mod2(t);
  Real d = Real(10);
  for (double ts : {cfg.t1_star(), cfg.t2_star()}) {
    const Real dd = abs(tr - Real(ts));
    d = min(d, min(dd, Real(2) - dd));
  }
  return d;
}

/// First root in (t0, b] of h(t) = s*(y0 + v(t - t0) - f(t)), h(t0) >= 0,
/// using a step that never passes a root: with |h''| <= accel, the
/// quadratic lower bound h + h'd - accel d^2/2 stays positive up to d*.
template <class Real>
std::optional<Real> first_contact(const TrigSeries& wall, Real t0, Real y0, Real v, Real sign, Real b,
                                  double accel, int max_iter) {
  using std::abs;
  using std::sqrt;
  const Real eps = std::numeric_limits<Real>::epsilon();
  if constexpr (std::numeric_limits<Real>::digits > std::numeric_limits<double>::digits) {
    // Locate the root in double, then polish with Newton in full precision.
    const auto coarse = first_contact<double>(wall, static_cast<double>(t0), static_cast<double>(y0),
                                              static_cast<double>(v), static_cast<double>(sign),
                                              static_cast<double>(b), accel, max_iter);
    if (!coarse) return std::nullopt;
    Real t(*coarse);
    for (int it = 0; it < 8; ++it) {
      const auto w = wall.eval(t);
      const Real step = (y0 + v * (t - t0) - w.f) / (v - w.fd);
      t -= step;
      if (abs(step) <= Real(4) * eps * std::max(Real(1), abs(t))) break;
    }
    if (!(t > t0) || t > b) return std::nullopt;
    return t;
  }
  const Real S2(accel);
  Real t = t0;
  for (int it = 0; it < max_iter; ++it) {
    const auto w = wall.eval(t);
    Real h = sign * (y0 + v * (t - t0) - w.f);
    const Real hp = sign * (v - w.fd);
    if (h < Real(0)) h = Real(0);
    Real step;
    if (S2 > Real(0)) {
      const Real disc = sqrt(hp * hp + Real(2) * S2 * h);
      step = hp < Real(0) ? Real(2) * h / (disc - hp) : (hp + disc) / S2;
    } else {
      if (hp >= Real(0)) return std::nullopt;
      step = h / (-hp);
    }
    const Real scale = std::max(Real(1), abs(t));
    if (hp < Real(0) && step <= Real(4) * eps * scale) {
      const Real tc = t + step;
      if (tc > b) return std::nullopt;
      return tc;
    }
    if (t + step > b) return std::nullopt;
    if (step <= Real(0)) step = Real(4) * eps * scale;
    t += step;
  }
  throw Error(ErrorCode::NoConvergence, "contact search did not converge (near-grazing stall)");
}

}  // namespace detail

/// Advances the ball from `rec` to the earliest subsequent collision with
/// any wall (moving slit, ceiling or floor). Chamber switches at the
/// singular times are resolved from the ball's height at the jump.
template <class Real>
BasicRecord<Real> next_collision(const SlitConfig& cfg, const BasicRecord<Real>& rec,
                                 const SolverTolerances& tol = {}, StepInfo* info = nullptr) {
  using std::abs;
  const Real inf = std::numeric_limits<Real>::infinity();
  Real t = rec.t, y = rec.y, v = rec.v;
  Chamber ch = rec.chamber;
  const double accel = cfg.sup_accel();
  for (;;) {
    const Real ts = detail::next_singular_time(cfg, t);
    Real tw = inf;
    if (ch == Chamber::Upper && v > Real(0)) tw = t + (Real(1) - y) / v;
    if (ch == Chamber::Lower && v < Real(0)) tw = t - y / v;
    const Real b = tw <= ts ? tw : ts;
    const Slit slit = cfg.active_slit(reduce_mod2(t), Side::RightLimit);
    const TrigSeries& wall = cfg.series(slit);
    const Real sign = ch == Chamber::Upper ? Real(1) : Real(-1);
    const auto tc = detail::first_contact(wall, t, y, v, sign, b, accel, tol.max_root_iterations);
    if (tc) {
      const auto w = wall.eval(*tc);
      const Real rel = v - w.fd;
      if (abs(rel) < Real(tol.grazing)) throw Error(ErrorCode::Grazing, "tangential contact with the moving slit");
      if (detail::distance_to_singular(cfg, *tc) * std::max(Real(1), abs(rel)) < Real(tol.singular))
        throw Error(ErrorCode::SingularHit, "contact at a singular time");
      return {*tc, Real(2) * w.fd - v, w.f, ch, CollisionKind::Slit};
    }
    // A bounce landing exactly on ts waits until the jump is processed.
    if (tw < ts) {
      if (info) ++info->fixed_bounces;
      const bool up = ch == Chamber::Upper;
      return {tw, -v, up ? Real(1) : Real(0), ch, up ? CollisionKind::Ceiling : CollisionKind::Floor};
    }
    // Crossing a singular time: the active slit jumps.
    const Real ys = y + v * (ts - t);
    const Real f_plus = cfg.wall_at(ts, Side::RightLimit).f;
    if (abs(ys - f_plus) < Real(tol.edge)) throw Error(ErrorCode::SingularHit, "ball meets the slit edge at a jump");
    if (info) ++info->crossings;
    if (ch == Chamber::Upper && ys < f_plus) ch = Chamber::Lower;
    else if (ch == Chamber::Lower && ys > f_plus) ch = Chamber::Upper;
    t = ts;
    y = ys;
  }
}

/// The collision map F: next collision with a moving slit, folding the
/// fixed-wall bounces in.
template <class Real>
BasicRecord<Real> collision_map(const SlitConfig& cfg, const BasicRecord<Real>& rec,
                                const SolverTolerances& tol = {}, StepInfo* info = nullptr) {
  if (info) {
    *info = StepInfo{};
    info->from = rec.chamber;
  }
  BasicRecord<Real> r = rec;
  do {
    r = next_collision(cfg, r, tol, info);
  } while (r.kind != CollisionKind::Slit);
  if (info) info->to = r.chamber;
  return r;
}

/// Free flight of the ball up to time `target` (collisions processed on the
/// way). The returned state has kind None unless target is a collision time.
template <class Real>
BasicRecord<Real> advance_to(const SlitConfig& cfg, const BasicRecord<Real>& rec, Real target,
                             const SolverTolerances& tol = {}) {
  BasicRecord<Real> r = rec;
  for (;;) {
    // Peek at the next collision; stop in free flight before it.
    const Real ts = detail::next_singular_time(cfg, r.t);
    BasicRecord<Real> n = next_collision(cfg, r, tol);
    if (n.t > target) {
      // Walk through jumps between r.t and target to get the chamber right.
      Real t = r.t, y = r.y;
      Chamber ch = r.chamber;
      Real s = ts;
      while (s <= target) {
        const Real ys = y + r.v * (s - t);
        const Real f_plus = cfg.wall_at(s, Side::RightLimit).f;
        if (ch == Chamber::Upper && ys < f_plus) ch = Chamber::Lower;
        else if (ch == Chamber::Lower && ys > f_plus) ch = Chamber::Upper;
        t = s;
        y = ys;
        s = detail::next_singular_time(cfg, s);
      }
      return {target, r.v, y + r.v * (target - t), ch, CollisionKind::None};
    }
    r = n;
  }
}

enum class TrajectoryStatus { Running, SingularHit, Grazing, NoConvergence };
std::string_view to_string(TrajectoryStatus s);

struct Trajectory {
  CollisionRecord initial;
  std::vector<CollisionRecord> records;
  TrajectoryStatus status = TrajectoryStatus::Running;
};

/// Up to n slit collisions; stops early (status != Running) on a numeric
/// failure of the exact map.
Trajectory simulate(const SlitConfig& cfg, const CollisionRecord& rec, int n_slit_collisions,
                    const SolverTolerances& tol = {});

/// Post-collision record for a ball leaving the slit at time t with
/// velocity v in the given chamber.
CollisionRecord slit_record(const SlitConfig& cfg, double t, double v, Chamber ch);

/// Central finite-difference Jacobian of F^n in (t, v) at a slit record.
/// Throws StencilCrossesSingularity when the stencil orbits do not share
/// the itinerary of the base orbit.
std::array<std::array<double, 2>, 2> monodromy(const SlitConfig& cfg, const CollisionRecord& rec, int n,
                                              double rel_step = 1e-6, const SolverTolerances& tol = {});

/// Determinant of the same Jacobian in the coordinates (t, v^2/2 - v f'(t)),
/// in which the exact collision map preserves area.
double symplectic_determinant(const SlitConfig& cfg, const CollisionRecord& in, const CollisionRecord& out,
                              const std::array<std::array<double, 2>, 2>& jac);

struct RelationSurvey {
  /// Samples per relation, indexed like Relation (Other excluded).
  std::array<int, 6> counts{};
  /// Largest |residual| over both equations and all samples.
  double max_residual = 0;
  /// Largest |det - 1| of the area-form Jacobian of one step.
  double max_det_error = 0;
  /// Failed steps and stencils that crossed a singular time.
  int excluded = 0;
};

/// One step of the exact map from `samples` random slit records with |v|
/// log-uniform in [v_min, v_max]. Half of the starts are placed just before
/// a singular time so that every relation type is visited.
RelationSurvey relation_survey(const SlitConfig& cfg, int samples, double v_min, double v_max, std::uint64_t seed,
                               unsigned threads = 0, const SolverTolerances& tol = {});

struct PeriodicOrbitCheck {
  /// max(|t_4 - t_0 - 2|, |v_4 - v_0|) along the orbit.
  double closure_residual = 0;
  /// Trace of the finite-difference Jacobian of one collision. The wall has
  /// period 1/2, so each collision already closes the orbit modulo it.
  double trace = 0;
  /// Trace of the Jacobian of F^4; equals 2 cos(4 theta) with
  /// 2 cos(theta) = trace.
  double trace_period = 0;
  /// 2 - 8 a pi^2 / (1 + 2a).
  double predicted_trace = 0;
};

/// The 4-periodic orbit of elliptic_config(a) started at t = 0.25 with
/// v = 2 + 4a in the upper chamber.
PeriodicOrbitCheck elliptic_orbit_check(double a, const SolverTolerances& tol = {});

/// Writes the trajectory as CSV (t, v, chamber, kind, y) with a header
/// carrying the config hash and solver tolerances.
std::string trajectory_csv(const SlitConfig& cfg, const Trajectory& traj, const SolverTolerances& tol);

}  // namespace slitbilliard
