#include "slitbilliard/billiard.hpp"

#include <cstdio>
#include <sstream>

#include "slitbilliard/parallel.hpp"
#include "slitbilliard/rng.hpp"
#include "slitbilliard/version.hpp"

namespace slitbilliard {

std::string_view to_string(Chamber c) { return c == Chamber::Upper ? "upper" : "lower"; }

std::string_view to_string(CollisionKind k) {
  switch (k) {
    case CollisionKind::None: return "none";
    case CollisionKind::Slit: return "slit";
    case CollisionKind::Ceiling: return "ceiling";
    case CollisionKind::Floor: return "floor";
  }
  return "unknown";
}

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::UpperStay: return "upper-stay";
    case Relation::LowerStay: return "lower-stay";
    case Relation::UpperToLowerViaCeiling: return "upper-to-lower-via-ceiling";
    case Relation::UpperToLowerDirect: return "upper-to-lower-direct";
    case Relation::LowerToUpperViaFloor: return "lower-to-upper-via-floor";
    case Relation::LowerToUpperDirect: return "lower-to-upper-direct";
    case Relation::Other: return "other";
  }
  return "unknown";
}

std::string_view to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::Running: return "running";
    case TrajectoryStatus::SingularHit: return "singular-hit";
    case TrajectoryStatus::Grazing: return "grazing";
    case TrajectoryStatus::NoConvergence: return "no-convergence";
  }
  return "unknown";
}

Relation classify_relation(const StepInfo& info) {
  const bool up0 = info.from == Chamber::Upper, up1 = info.to == Chamber::Upper;
  if (up0 && up1 && info.fixed_bounces == 1) return Relation::UpperStay;
  if (!up0 && !up1 && info.fixed_bounces == 1) return Relation::LowerStay;
  if (up0 && !up1 && info.fixed_bounces == 2) return Relation::UpperToLowerViaCeiling;
  if (up0 && !up1 && info.fixed_bounces == 0) return Relation::UpperToLowerDirect;
  if (!up0 && up1 && info.fixed_bounces == 2) return Relation::LowerToUpperViaFloor;
  if (!up0 && up1 && info.fixed_bounces == 0) return Relation::LowerToUpperDirect;
  return Relation::Other;
}

std::array<double, 2> relation_residual(const SlitConfig& cfg, Relation rel, const CollisionRecord& a,
                                        const CollisionRecord& b) {
  // Wall data at the two contacts; neither lies on a singular time.
  const auto wa = cfg.wall_at(a.t, Side::RightLimit);
  const auto wb = cfg.wall_at(b.t, Side::RightLimit);
  const double dt = b.t - a.t;
  switch (rel) {
    case Relation::UpperStay:
      return {2.0 - wa.f - wb.f - a.v * dt, b.v - a.v - 2.0 * wb.fd};
    case Relation::LowerStay:
      return {wa.f + wb.f + a.v * dt, b.v - a.v - 2.0 * wb.fd};
    case Relation::UpperToLowerViaCeiling:
      return {a.v * dt - (wb.f - wa.f + 2.0), b.v + a.v - 2.0 * wb.fd};
    case Relation::UpperToLowerDirect:
      return {a.v * dt - (wb.f - wa.f), b.v + a.v - 2.0 * wb.fd};
    case Relation::LowerToUpperViaFloor:
      return {a.v * dt - (wb.f - wa.f - 2.0), b.v + a.v - 2.0 * wb.fd};
    case Relation::LowerToUpperDirect:
      return {a.v * dt - (wb.f - wa.f), b.v + a.v - 2.0 * wb.fd};
    case Relation::Other: break;
  }
  throw Error(ErrorCode::InvalidConfig, "no closed-form relation for this step");
}

Trajectory simulate(const SlitConfig& cfg, const CollisionRecord& rec, int n, const SolverTolerances& tol) {
  Trajectory traj;
  traj.initial = rec;
  traj.records.reserve(static_cast<std::size_t>(std::max(n, 0)));
  CollisionRecord r = rec;
  try {
    for (int i = 0; i < n; ++i) {
      r = collision_map(cfg, r, tol);
      traj.records.push_back(r);
    }
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::SingularHit: traj.status = TrajectoryStatus::SingularHit; break;
      case ErrorCode::Grazing: traj.status = TrajectoryStatus::Grazing; break;
      case ErrorCode::NoConvergence: traj.status = TrajectoryStatus::NoConvergence; break;
      default: throw;
    }
  }
  return traj;
}

namespace {

template <class Real>
BasicRecord<Real> slit_record_t(const SlitConfig& cfg, Real t, Real v, Chamber ch) {
  return {t, v, cfg.wall_at(t, Side::RightLimit).f, ch, CollisionKind::Slit};
}

struct Leg {
  int fixed_bounces, crossings;
  Chamber to;
  bool operator==(const Leg&) const = default;
};

using Ld = long double;

std::pair<BasicRecord<Ld>, std::vector<Leg>> run(const SlitConfig& cfg, BasicRecord<Ld> r, int n,
                                                 const SolverTolerances& tol) {
  std::vector<Leg> legs;
  for (int i = 0; i < n; ++i) {
    StepInfo info;
    r = collision_map(cfg, r, tol, &info);
    legs.push_back({info.fixed_bounces, info.crossings, info.to});
  }
  return {r, legs};
}

}  // namespace

CollisionRecord slit_record(const SlitConfig& cfg, double t, double v, Chamber ch) {
  return slit_record_t<double>(cfg, t, v, ch);
}

RelationSurvey relation_survey(const SlitConfig& cfg, int samples, double v_min, double v_max, std::uint64_t seed,
                               unsigned threads, const SolverTolerances& tol) {
  if (samples <= 0) throw Error(ErrorCode::InsufficientSamples, "need at least one sample");
  if (!(v_min > 0 && v_max >= v_min)) throw Error(ErrorCode::InvalidConfig, "invalid speed range");
  struct Item {
    int relation = -1;
    double residual = 0, det_error = 0;
    bool excluded = false;
  };
  std::vector<Item> items(static_cast<std::size_t>(samples));
  parallel_for(items.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const Chamber ch = rng.uniform() < 0.5 ? Chamber::Upper : Chamber::Lower;
    const double speed = v_min * std::pow(v_max / v_min, rng.uniform());
    double t = rng.uniform(0.0, 2.0);
    if (i % 2 == 1) {
      // A few flight times before a singular time.
      const double ts = rng.uniform() < 0.5 ? cfg.t1_star() : cfg.t2_star();
      t = reduce_mod2(ts - rng.uniform(0.0, 4.0 / speed));
    }
    Item& it = items[i];
    try {
      const CollisionRecord a = slit_record(cfg, t, ch == Chamber::Upper ? speed : -speed, ch);
      StepInfo info;
      const CollisionRecord b = collision_map(cfg, a, tol, &info);
      const Relation rel = classify_relation(info);
      if (rel == Relation::Other) return;
      const auto res = relation_residual(cfg, rel, a, b);
      const auto jac = monodromy(cfg, a, 1, 1e-6, tol);
      it.relation = static_cast<int>(rel);
      it.residual = std::max(std::abs(res[0]), std::abs(res[1]));
      it.det_error = std::abs(symplectic_determinant(cfg, a, b, jac) - 1.0);
    } catch (const Error& e) {
      if (!e.numeric() && e.code() != ErrorCode::StencilCrossesSingularity) throw;
      it.excluded = true;
    }
  });
  RelationSurvey out;
  for (const Item& it : items) {
    if (it.excluded) ++out.excluded;
    if (it.relation < 0) continue;
    ++out.counts[static_cast<std::size_t>(it.relation)];
    out.max_residual = std::max(out.max_residual, it.residual);
    out.max_det_error = std::max(out.max_det_error, it.det_error);
  }
  return out;
}

PeriodicOrbitCheck elliptic_orbit_check(double a, const SolverTolerances& tol) {
  const SlitConfig cfg = elliptic_config(a);
  const CollisionRecord start = slit_record(cfg, 0.25, 2.0 + 4.0 * a, Chamber::Upper);
  const Trajectory traj = simulate(cfg, start, 4, tol);
  if (traj.status != TrajectoryStatus::Running)
    throw Error(ErrorCode::NoConvergence, "periodic orbit hit a numeric failure");
  const CollisionRecord& end = traj.records.back();
  PeriodicOrbitCheck out;
  out.closure_residual = std::max(std::abs(end.t - start.t - 2.0), std::abs(end.v - start.v));
  const auto j1 = monodromy(cfg, start, 1, 1e-6, tol);
  const auto j4 = monodromy(cfg, start, 4, 1e-6, tol);
  out.trace = j1[0][0] + j1[1][1];
  out.trace_period = j4[0][0] + j4[1][1];
  const double pi = boost::math::constants::pi<double>();
  out.predicted_trace = 2.0 - 8.0 * a * pi * pi / (1.0 + 2.0 * a);
  return out;
}

std::array<std::array<double, 2>, 2> monodromy(const SlitConfig& cfg, const CollisionRecord& rec, int n,
                                              double rel_step, const SolverTolerances& tol) {
  const Ld t0 = rec.t, v0 = rec.v;
  const Ld ht = rel_step, hv = rel_step * std::max(1.0, std::abs(rec.v));
  const auto base = run(cfg, slit_record_t<Ld>(cfg, t0, v0, rec.chamber), n, tol);
  auto probe = [&](Ld dt, Ld dv) {
    auto res = run(cfg, slit_record_t<Ld>(cfg, t0 + dt, v0 + dv, rec.chamber), n, tol);
    if (res.second != base.second)
      throw Error(ErrorCode::StencilCrossesSingularity, "finite-difference stencil changes the itinerary");
    return res.first;
  };
  const auto tp = probe(ht, 0), tm = probe(-ht, 0), vp = probe(0, hv), vm = probe(0, -hv);
  std::array<std::array<double, 2>, 2> j{};
  j[0][0] = static_cast<double>((tp.t - tm.t) / (2 * ht));
  j[1][0] = static_cast<double>((tp.v - tm.v) / (2 * ht));
  j[0][1] = static_cast<double>((vp.t - vm.t) / (2 * hv));
  j[1][1] = static_cast<double>((vp.v - vm.v) / (2 * hv));
  return j;
}

double symplectic_determinant(const SlitConfig& cfg, const CollisionRecord& in, const CollisionRecord& out,
                              const std::array<std::array<double, 2>, 2>& jac) {
  const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
  const double rin = in.v - cfg.wall_at(in.t, Side::RightLimit).fd;
  const double rout = out.v - cfg.wall_at(out.t, Side::RightLimit).fd;
  return det * rout / rin;
}

std::string trajectory_csv(const SlitConfig& cfg, const Trajectory& traj, const SolverTolerances& tol) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "# slitbilliard %s config_hash=%016llx grazing=%.3g singular=%.3g status=%s\n",
                std::string(kVersion).c_str(), static_cast<unsigned long long>(cfg.hash()), tol.grazing,
                tol.singular, std::string(to_string(traj.status)).c_str());
  os << buf << "t,v,chamber,kind,y\n";
  auto row = [&](const CollisionRecord& r) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%s,%.17g\n", r.t, r.v, std::string(to_string(r.chamber)).c_str(),
                  std::string(to_string(r.kind)).c_str(), r.y);
    os << buf;
  };
  row(traj.initial);
  for (const auto& r : traj.records) row(r);
  return os.str();
}

}  // namespace slitbilliard
