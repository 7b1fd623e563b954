#include "slitbilliard/action_angle.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/float128.hpp>

namespace slitbilliard {

namespace {

constexpr double kQuadTolerance = 1e-12;
constexpr double kShortPiece = 1e-2;

}  // namespace

ChamberGeometry::ChamberGeometry(const SlitConfig& cfg, Chamber chamber, bool with_table)
    : cfg_(cfg), chamber_(chamber) {
  const double t1 = cfg.t1_star(), t2 = cfg.t2_star();
  const std::array<double, 4> ends{0.0, t1, t2, 2.0};
  const std::array<Slit, 3> slits{Slit::Left, Slit::Right, Slit::Left};
  const bool upper = chamber == Chamber::Upper;
  std::array<double, 3> piece{};
  for (int k = 0; k < 3; ++k) {
    const TrigSeries& s = cfg.series(slits[k]);
    auto integrand = [&](double t) {
      const double f = s.eval(t).f;
      const double g = upper ? 1.0 - f : f;
      return 1.0 / (g * g);
    };
    // On very short pieces the roundoff floor of the error estimate sits
    // above 1e-13 relative and keeps the subdivision going to full depth.
    // Below kShortPiece two fixed Gauss rules are compared instead.
    bool ok = false;
    if (ends[k + 1] - ends[k] < kShortPiece) {
      piece[k] = boost::math::quadrature::gauss<double, 20>::integrate(integrand, ends[k], ends[k + 1]);
      const double check = boost::math::quadrature::gauss<double, 30>::integrate(integrand, ends[k], ends[k + 1]);
      ok = std::abs(piece[k] - check) <= kQuadTolerance * std::max(1.0, std::abs(piece[k])) && std::isfinite(piece[k]);
    }
    for (double rel : {1e-13, kQuadTolerance}) {
      if (ok) break;
      double err = 0.0;
      piece[k] = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, ends[k], ends[k + 1], 15,
                                                                               rel, &err);
      ok = err <= kQuadTolerance * std::max(1.0, std::abs(piece[k])) && std::isfinite(piece[k]);
      if (ok) break;
    }
    if (!ok) throw Error(ErrorCode::QuadratureFailure, "adaptive quadrature missed its tolerance");
  }
  alpha_ = piece[0] + piece[2];
  beta_ = piece[1];
  total_ = alpha_ + beta_;
  cum1_ = piece[0];
  cum2_ = piece[0] + piece[1];
  angle1_ = 2.0 * cum1_ / total_;
  angle2_ = 2.0 * cum2_ / total_;
  if (!with_table) return;

  nodes_.push_back(0.0);
  table_.push_back(0.0);
  for (int k = 0; k < 3; ++k) {
    const double a = ends[k], b = ends[k + 1];
    const int cells = std::max(1, static_cast<int>(std::ceil((b - a) / kCell)));
    for (int c = 0; c < cells; ++c) {
      const double lo = a + (b - a) * c / cells;
      const double hi = c + 1 == cells ? b : a + (b - a) * (c + 1) / cells;
      table_.push_back(table_.back() + local_integral(lo, hi, Side::RightLimit));
      nodes_.push_back(hi);
    }
  }
}

double ChamberGeometry::cumulative(double tr) const {
  if (table_.empty()) throw Error(ErrorCode::InvalidConfig, "geometry built without angle table");
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tr);
  std::size_t k = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (k + 1 >= nodes_.size()) k = nodes_.size() - 2;
  return table_[k] + local_integral(nodes_[k], tr, Side::RightLimit);
}

double ChamberGeometry::angle(double t) const { return reduce_mod2(2.0 * cumulative(reduce_mod2(t)) / total_); }

double ChamberGeometry::time_of_angle(double theta) const {
  if (table_.empty()) throw Error(ErrorCode::InvalidConfig, "geometry built without angle table");
  const double target = reduce_mod2(theta) * total_ / 2.0;
  auto it = std::upper_bound(table_.begin(), table_.end(), target);
  std::size_t k = it == table_.begin() ? 0 : static_cast<std::size_t>(it - table_.begin()) - 1;
  if (k + 1 >= table_.size()) k = table_.size() - 2;
  const double lo = nodes_[k], hi = nodes_[k + 1];
  double t = lo;
  for (int it_n = 0; it_n < 50; ++it_n) {
    const double g = gap(t, t == lo ? Side::RightLimit : Side::LeftLimit).g;
    const double resid = table_[k] + local_integral(lo, t, Side::RightLimit) - target;
    const double step = resid * g * g;
    t = std::clamp(t - step, lo, hi);
    if (std::abs(step) <= 1e-17) break;
  }
  return t;
}

AngleAction ChamberGeometry::to_angle_action(double t, double v) const {
  if ((chamber_ == Chamber::Upper && !(v > 0)) || (chamber_ == Chamber::Lower && !(v < 0)))
    throw Error(ErrorCode::WrongChamberSign, "velocity has the wrong sign for this chamber");
  const double k = action_density(t, v);
  if (!(k > 0)) throw Error(ErrorCode::WrongChamberSign, "action is not positive");
  return {angle(t), 0.5 * total_ * k};
}

double ChamberGeometry::action_threshold() const { return 10.0 * total_ * cfg_.sup_rate(); }

double ChamberGeometry::velocity_for_density(double t, double k, Side side) const {
  using Ld = long double;
  const auto s = gap<Ld>(t, side);
  Ld v = (Ld(k) - s.g * s.gd) / s.g;
  for (int it = 0; it < 200; ++it) {
    const Ld next = (Ld(k) - s.g * s.gd - s.g * s.g * s.gdd / (3 * v)) / s.g;
    const Ld dv = next - v;
    v = next;
    if (std::fabs(dv) <= 1e-18L * std::fabs(v)) return static_cast<double>(v);
  }
  throw Error(ErrorCode::NoConvergence, "action inversion did not converge");
}

std::array<double, 2> ChamberGeometry::from_angle_action(const AngleAction& aa) const {
  if (!(aa.action >= action_threshold()))
    throw Error(ErrorCode::NoConvergence, "action below the inversion threshold");
  const double t = time_of_angle(aa.theta);
  const double v = velocity_for_density(t, 2.0 * aa.action / total_);
  return {t, v};
}

std::vector<DriftRow> invariant_drift(const SlitConfig& cfg, Chamber chamber, const std::vector<double>& v_list,
                                      int n_collisions, int phases) {
  using Q = boost::multiprecision::float128;
  const ChamberGeometry geom(cfg, chamber, false);
  const bool smooth = cfg.left() == cfg.right();
  const double scale = 0.5 * geom.total();
  std::vector<DriftRow> rows;
  for (double v0 : v_list) {
    DriftRow row;
    row.v0 = v0;
    const double vs = chamber == Chamber::Upper ? std::abs(v0) : -std::abs(v0);
    for (int p = 0; p < phases; ++p) {
      const Q t0 = Q(2) * Q(p) / Q(phases) + Q(0.0123);
      BasicRecord<Q> r{t0, Q(vs), Q(cfg.wall_at(t0, Side::RightLimit).f), chamber, CollisionKind::Slit};
      Q k_prev = geom.action_density(r.t, r.v);
      if (p == 0) row.action = scale * static_cast<double>(k_prev);
      for (int n = 0; n < n_collisions; ++n) {
        StepInfo info;
        BasicRecord<Q> next;
        try {
          next = collision_map(cfg, r, SolverTolerances{}, &info);
        } catch (const Error& e) {
          if (!e.numeric()) throw;
          break;
        }
        if (next.chamber != chamber) break;
        const Q k_next = geom.action_density(next.t, next.v);
        if (smooth || info.crossings == 0) {
          const Q integral = geom.local_integral(r.t, next.t, Side::RightLimit);
          const double d_action = scale * static_cast<double>(abs(k_next - k_prev));
          const double defect = static_cast<double>(abs(integral - Q(2) / k_prev)) / scale;
          row.max_action_change = std::max(row.max_action_change, d_action);
          row.max_angle_defect = std::max(row.max_angle_defect, defect);
          ++row.collisions;
        }
        r = next;
        k_prev = k_next;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace slitbilliard
