#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "slitbilliard/errors.hpp"

namespace slitbilliard {

/// Value of the wall and its first two time derivatives at one instant.
template <class Real>
struct WallSample {
  Real f{};
  Real fd{};
  Real fdd{};
};

/// One term a*cos(k*pi*t) or b*sin(k*pi*t).
struct Harmonic {
  int k = 1;
  double amplitude = 0.0;

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

/// Reduces t into [0, 2) with floor-based reduction.
template <class Real>
Real reduce_mod2(Real t) {
  using std::floor;
  Real r = t - Real(2) * floor(t / Real(2));
  if (r >= Real(2)) r -= Real(2);
  if (r < Real(0)) r += Real(2);
  return r;
}

/// Finite trigonometric series of period 2 describing the height of a slit.
///
/// Construction checks that the height stays strictly inside (0, 1): a cheap
/// amplitude-sum bound first, and a 10^4-point grid when the bound is not
/// conclusive.
class TrigSeries {
 public:
  TrigSeries() = default;
  TrigSeries(double constant, std::vector<Harmonic> cos_terms, std::vector<Harmonic> sin_terms);

  static TrigSeries constant_wall(double height) { return TrigSeries(height, {}, {}); }

  double constant() const { return constant_; }
  const std::vector<Harmonic>& cos_terms() const { return cos_; }
  const std::vector<Harmonic>& sin_terms() const { return sin_; }

  double amplitude_sum() const;
  /// Upper bound on |f'| over all t.
  double sup_rate() const { return sup_rate_; }
  /// Upper bound on |f''| over all t.
  double sup_accel() const { return sup_accel_; }

  /// f ↦ 1 − f.
  TrigSeries mirrored() const;
  /// t ↦ t + shift.
  TrigSeries shifted(double shift) const;
  /// t ↦ −t.
  TrigSeries time_reversed() const;

  template <class Real>
  WallSample<Real> eval(Real t) const {
    using std::cos;
    using std::sin;
    const Real pi = boost::math::constants::pi<Real>();
    const Real tr = reduce_mod2(t);
    WallSample<Real> s{Real(constant_), Real(0), Real(0)};
    for (const auto& h : cos_) {
      const Real w = Real(h.k) * pi;
      const Real c = cos(w * tr), sn = sin(w * tr);
      s.f += Real(h.amplitude) * c;
      s.fd -= Real(h.amplitude) * w * sn;
      s.fdd -= Real(h.amplitude) * w * w * c;
    }
    for (const auto& h : sin_) {
      const Real w = Real(h.k) * pi;
      const Real c = cos(w * tr), sn = sin(w * tr);
      s.f += Real(h.amplitude) * sn;
      s.fd += Real(h.amplitude) * w * c;
      s.fdd -= Real(h.amplitude) * w * w * sn;
    }
    return s;
  }

  friend bool operator==(const TrigSeries&, const TrigSeries&) = default;

 private:
  void validate_and_bound();

  double constant_ = 0.5;
  std::vector<Harmonic> cos_;
  std::vector<Harmonic> sin_;
  double sup_rate_ = 0.0;
  double sup_accel_ = 0.0;
};

enum class Side { LeftLimit, RightLimit };
enum class Slit { Left, Right };

/// One-sided data of the wall at a singular time t_i^*.
struct JumpData {
  int index = 1;
  double t_star = 0.0;
  double f_minus = 0, f_plus = 0;
  double fdot_minus = 0, fdot_plus = 0;
  double fddot_minus = 0, fddot_plus = 0;
  double l_minus = 0, l_plus = 0;
  double m_minus = 0, m_plus = 0;
  /// fdot^-(1 - f^+) - fdot^+(1 - f^-)
  double a = 0;
  /// fdot^+ f^- - fdot^- f^+
  double a_prime = 0;
};

/// The problem instance: two slit motions, the slit split point lambda and
/// the starting horizontal position x0 of the ball.
class SlitConfig {
 public:
  SlitConfig(TrigSeries left, TrigSeries right, double lambda, double x0);

  const TrigSeries& left() const { return left_; }
  const TrigSeries& right() const { return right_; }
  double lambda() const { return lambda_; }
  double x0() const { return x0_; }
  /// lambda - x0, reduced into [0, 2).
  double t1_star() const { return t1_; }
  /// 2 - lambda - x0, reduced into [0, 2).
  double t2_star() const { return t2_; }
  double t_star(int i) const { return i == 1 ? t1_ : t2_; }

  /// Which slit is under the ball at reduced time tr, taking the given
  /// one-sided limit at the singular times.
  template <class Real>
  Slit active_slit(Real tr, Side side) const {
    const Real t1(t1_), t2(t2_);
    const bool on_right = side == Side::RightLimit ? (tr >= t1 && tr < t2) : (tr > t1 && tr <= t2);
    return on_right ? Slit::Right : Slit::Left;
  }

  const TrigSeries& series(Slit s) const { return s == Slit::Left ? left_ : right_; }

  /// One-sided value of the piecewise wall f(t) = f_L on (0,t1*)∪(t2*,2),
  /// f_R on (t1*,t2*).
  template <class Real>
  WallSample<Real> wall_at(Real t, Side side) const {
    const Real tr = reduce_mod2(t);
    return series(active_slit(tr, side)).eval(tr);
  }

  JumpData jump_data(int i) const;

  /// Upper bounds on |f'| and |f''| over both slits.
  double sup_rate() const;
  double sup_accel() const;

  /// Config of the vertically reflected table (f ↦ 1 − f), which swaps the
  /// roles of the two chambers.
  SlitConfig mirrored() const;
  /// Exchanges the two slit motions.
  SlitConfig swapped() const;
  /// Wall seen in reversed time s = −t. Its singular times are 2 − t2* and
  /// 2 − t1*, which generally correspond to a starting position outside
  /// [0, lambda), so x0() of the result is only nominal.
  SlitConfig time_reversed() const;

  /// Stable 64-bit hash of the canonical textual form.
  std::uint64_t hash() const;
  std::string canonical() const;

 private:
  SlitConfig() = default;

  TrigSeries left_, right_;
  double lambda_ = 0.5, x0_ = 0.0;
  double t1_ = 0.5, t2_ = 1.5;
};

/// f_L(t) = 0.3 cos(pi t) + 0.5, f_R(t) = 0.3 sin(pi t) + 0.5.
SlitConfig example_config(double lambda, double x0);
/// f_L = f_R = a cos(4 pi t) + 0.5 with lambda = 0.5, x0 = 0.
SlitConfig elliptic_config(double a);

}  // namespace slitbilliard
