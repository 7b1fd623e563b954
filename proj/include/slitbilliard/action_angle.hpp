#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "slitbilliard/billiard.hpp"
#include "slitbilliard/errors.hpp"
#include "slitbilliard/wall.hpp"

namespace slitbilliard {

struct AngleAction {
  double theta = 0.0;
  double action = 0.0;
};

/// Gap between the moving slit and the fixed wall of one chamber, with its
/// derivatives: l = 1 - f above the slit, m = -f below it (negative).
template <class Real>
struct GapSample {
  Real g{};
  Real gd{};
  Real gdd{};
};

/// Quadrature data of one chamber: the total integral of gap^-2 over a
/// period, its split at the singular times and a cumulative table for the
/// angle theta(t) (zeta(t) below the slit).
class ChamberGeometry {
 public:
  /// The cumulative angle table is optional; the totals alone are cheap.
  ChamberGeometry(const SlitConfig& cfg, Chamber chamber, bool with_table = true);

  Chamber chamber() const { return chamber_; }
  const SlitConfig& config() const { return cfg_; }

  /// L* (upper) or M* (lower).
  double total() const { return total_; }
  /// Integral of gap^-2 over (t1*, t2*).
  double beta() const { return beta_; }
  /// Integral of gap^-2 over (0, t1*) and (t2*, 2).
  double alpha() const { return alpha_; }
  /// theta_i* (zeta_i* below).
  double angle_star(int i) const { return i == 1 ? angle1_ : angle2_; }
  /// Integral of gap^-2 from 0 to t_i*.
  double cumulative_star(int i) const { return i == 1 ? cum1_ : cum2_; }

  template <class Real>
  GapSample<Real> gap(Real t, Side side) const {
    const auto w = cfg_.wall_at(t, side);
    if (chamber_ == Chamber::Upper) return {Real(1) - w.f, -w.fd, -w.fdd};
    return {-w.f, -w.fd, -w.fdd};
  }

  /// lv + l l' + l^2 l'' / (3v): twice the scaled action.
  template <class Real>
  Real action_density(Real t, Real v, Side side = Side::RightLimit) const {
    const auto s = gap(t, side);
    return s.g * v + s.g * s.gd + s.g * s.g * s.gdd / (Real(3) * v);
  }

  /// Integral of gap^-2 from a to b, both in one smooth piece: the one just
  /// after a for RightLimit, just before a for LeftLimit.
  template <class Real>
  Real local_integral(Real a, Real b, Side side = Side::RightLimit) const {
    using std::abs;
    using std::ceil;
    const Slit slit = cfg_.active_slit(reduce_mod2(a), side);
    const TrigSeries& s = cfg_.series(slit);
    const bool upper = chamber_ == Chamber::Upper;
    auto integrand = [&](Real t) {
      const Real f = s.eval(t).f;
      const Real g = upper ? Real(1) - f : f;
      return Real(1) / (g * g);
    };
    const Real width = abs(b - a);
    const int cells = width > Real(kCell) ? static_cast<int>(ceil(static_cast<double>(width / Real(kCell)))) : 1;
    Real sum(0);
    const Real h = (b - a) / Real(cells);
    for (int c = 0; c < cells; ++c) {
      const Real lo = a + Real(c) * h;
      const Real hi = c + 1 == cells ? b : lo + h;
      sum += boost::math::quadrature::gauss<Real, 20>::integrate(integrand, lo, hi);
    }
    return sum;
  }

  /// Integral of gap^-2 from 0 to the reduced time tr in [0, 2).
  double cumulative(double tr) const;
  /// theta(t) = 2/L* * cumulative(t mod 2), in [0, 2).
  double angle(double t) const;
  /// Inverse of angle() on [0, 2).
  double time_of_angle(double theta) const;

  AngleAction to_angle_action(double t, double v) const;
  /// (t in [0,2), v) with |I(t, v) - aa.action| below 1e-10.
  std::array<double, 2> from_angle_action(const AngleAction& aa) const;
  /// Below this action from_angle_action refuses.
  double action_threshold() const;

  /// v with action_density(t, v) = k, by fixed-point iteration.
  double velocity_for_density(double t, double k, Side side = Side::RightLimit) const;

 private:
  static constexpr double kCell = 1e-4;

  SlitConfig cfg_;
  Chamber chamber_;
  double total_ = 0, alpha_ = 0, beta_ = 0;
  double cum1_ = 0, cum2_ = 0, angle1_ = 0, angle2_ = 0;
  std::vector<double> nodes_;
  std::vector<double> table_;
};

struct DriftRow {
  double v0 = 0;
  double action = 0;
  /// max over sampled collisions of |I_{n+1} - I_n|
  double max_action_change = 0;
  /// max over sampled collisions of |theta_{n+1} - theta_n - 2/I_n|
  double max_angle_defect = 0;
  int collisions = 0;
};

/// Per-collision drift of the action and of the angle increment, measured
/// along exact orbits computed in quad precision. For each |v0| the orbits
/// start at `phases` evenly spaced times and run `n_collisions` slit
/// collisions each; windows that would cross a singular time are skipped
/// unless the two slits coincide. An orbit is dropped once it leaves the
/// chamber.
std::vector<DriftRow> invariant_drift(const SlitConfig& cfg, Chamber chamber, const std::vector<double>& v_list,
                                      int n_collisions, int phases = 32);

}  // namespace slitbilliard
