#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "slitbilliard/action_angle.hpp"
#include "slitbilliard/billiard.hpp"
#include "slitbilliard/wall.hpp"

namespace slitbilliard {

/// Singular strips: first slit collision after crossing t_i*, above (Plus)
/// or below (Minus) the slit.
enum class Strip { R1Plus, R2Plus, R1Minus, R2Minus };
/// Leg 12 maps strip 1 to strip 2 across t2*; leg 21 maps strip 2 to strip 1
/// across t1*.
enum class Leg { L12, L21 };
enum class Branch { UU, UL_I, UL_II, LL, LU_I, LU_II };
enum class NFMode { GOnly, GPlusH };

std::string_view to_string(Strip s);
std::string_view to_string(Leg l);
std::string_view to_string(Branch b);

inline bool is_upper(Strip s) { return s == Strip::R1Plus || s == Strip::R2Plus; }
inline int strip_index(Strip s) { return s == Strip::R1Plus || s == Strip::R1Minus ? 1 : 2; }
inline Strip make_strip(int index, Chamber c) {
  if (index == 1) return c == Chamber::Upper ? Strip::R1Plus : Strip::R1Minus;
  return c == Chamber::Upper ? Strip::R2Plus : Strip::R2Minus;
}

/// (tau, scaled I) on upper strips, (rho, scaled J) on lower strips.
struct StripPoint {
  double coord = 0.0;
  double action = 0.0;
  Strip strip = Strip::R1Plus;
};

/// Constants attached to one singular time. l = 1 - f and m = -f with one-
/// sided limits; dots are time derivatives.
struct JumpConstants {
  double f_minus = 0, f_plus = 0;
  double l_minus = 0, l_plus = 0, ld_minus = 0, ld_plus = 0, ldd_minus = 0, ldd_plus = 0;
  double m_minus = 0, m_plus = 0, md_minus = 0, md_plus = 0, mdd_minus = 0, mdd_plus = 0;
  double a = 0, a_prime = 0;
  /// Delta, Delta', Delta'' (mixed second-order combination) and the
  /// diagonal alternative for Delta''.
  double delta = 0, delta1 = 0, delta2_mixed = 0, delta2_diagonal = 0;
  /// Upsilon, Upsilon', Upsilon'' (diagonal) and the mixed alternative.
  double upsilon = 0, upsilon1 = 0, upsilon2_diagonal = 0, upsilon2_mixed = 0;
  /// kappa_I, kappa_I', ..., kappa_I''''' (index = number of primes).
  std::array<double, 6> kappa_one{};
  /// kappa_II'', kappa_II''', kappa_II'''' at indices 2, 3, 4.
  std::array<double, 5> kappa_two{};
  std::array<double, 6> chi_one{};
  std::array<double, 5> chi_two{};
};

struct NFConstants {
  double L_star = 0, M_star = 0;
  double theta1 = 0, theta2 = 0, zeta1 = 0, zeta2 = 0;
  /// Integrals of l^-2 (alpha, beta) and f^-2 (alpha', beta') off and on
  /// (t1*, t2*).
  double alpha = 0, beta = 0, alpha_p = 0, beta_p = 0;
  std::array<JumpConstants, 2> jump{};
  double tr_upper = 0, tr_lower = 0;
  double sup_rate = 0;

  const JumpConstants& at(int i) const { return jump[static_cast<std::size_t>(i - 1)]; }
};

/// Choices among readings of the reference normal forms that the exact
/// simulator adjudicates. `printed()` keeps every reference form.
struct NFVariants {
  /// Second-order constant of the upper-upper map: mixed l^-l''^+ - l^+l''^-
  /// (reference form) or diagonal l^-l''^- - l^+l''^+.
  bool uu_second_order_mixed = true;
  /// Second-order constant of the lower-lower map: diagonal (reference form) or
  /// mixed.
  bool ll_second_order_diagonal = true;
  /// The (rho-1)/I term of the upper-to-lower-via-ceiling correction divides
  /// by the unscaled action I = L* * scaled action.
  bool ul1_h_unscaled_action = false;
  /// Correction of the upper-to-lower-via-ceiling map with the m''^+ terms
  /// at the reference powers of (rho-1); false lowers each by one power.
  bool ul1_h_printed_powers = true;
  /// Constant correction of the direct upper-to-lower map with the reference
  /// overall factor l^-; false divides it out.
  bool ul2_constant_extra_factor = true;
  /// Leg 21 of lower-to-upper-via-floor with +(l^+/m^-) J (reference form).
  bool lu1_leg21_plus_sign = true;
  /// Mirror of ul1_h_printed_powers for the l''^+ terms of the
  /// lower-to-upper-via-floor map.
  bool lu1_h_printed_powers = true;
  /// Constant correction of the direct lower-to-upper map with a minus sign
  /// (reference form).
  bool lu2_constant_minus = true;
  /// Constant correction of the direct lower-to-upper map with the reference
  /// overall factor m^-; false divides it out.
  bool lu2_constant_extra_factor = true;
  /// Leg 21 of the direct lower-to-upper map without the factor M* in the
  /// fractional part (reference form).
  bool lu2_leg21_without_total = true;

  static NFVariants printed() { return {}; }
  /// The readings selected by comparison against the exact map.
  static NFVariants adjudicated();

  std::string describe() const;
};

/// All normal-form machinery of one configuration.
class NormalForms {
 public:
  explicit NormalForms(const SlitConfig& cfg, NFVariants variants = NFVariants::adjudicated(),
                       double validity = 100.0);

  const SlitConfig& config() const { return cfg_; }
  const NFConstants& constants() const { return k_; }
  const NFVariants& variants() const { return variants_; }
  const ChamberGeometry& geometry(Chamber c) const { return c == Chamber::Upper ? upper_ : lower_; }
  double validity() const { return validity_; }

  /// Strip coordinates of a post-collision state (absolute time t).
  template <class Real>
  StripPoint to_strip(Real t, Real v, Strip strip) const;

  /// Post-collision state with the given strip coordinates, in the period
  /// starting at t_i* + 2 * period.
  template <class Real>
  BasicRecord<Real> from_strip(const StripPoint& p, int period = 0) const;

  /// {L* I (theta_j* - theta_i*) - tau}_2 for the leg starting at p (or the
  /// lower-chamber analogue).
  double fractional(const StripPoint& p) const;
  /// Distance fed to the branch thresholds: l_j^- * fractional (upper) or
  /// -m_j^- * fractional (lower), j the target jump.
  double branch_distance(const StripPoint& p) const;
  /// Width of the band around a threshold inside which a point is not
  /// classified.
  double fuzz(const StripPoint& p) const;

  Branch classify(const StripPoint& p, Leg leg) const;
  /// Same thresholds, without the fuzz-band refusal.
  Branch classify_unchecked(const StripPoint& p) const;

  StripPoint apply(Branch b, const StripPoint& p, Leg leg, NFMode mode) const;

  /// Ground truth: runs the exact map from p across the next singular time
  /// and returns the first post-jump slit collision in strip coordinates.
  StripPoint empirical(const StripPoint& p, Leg leg, const SolverTolerances& tol = {}) const;

  /// Closed interval of `fractional` values that lead into branch b from a
  /// strip on the given side, before fuzz removal. Empty when lo >= hi.
  std::array<double, 2> window(Branch b, Leg leg) const;

 private:
  SlitConfig cfg_;
  NFVariants variants_;
  double validity_;
  ChamberGeometry upper_, lower_;
  NFConstants k_;
};

NFConstants compute_constants(const SlitConfig& cfg);

Leg leg_of(Strip s);
/// Source chamber of a branch.
Chamber source_chamber(Branch b);
Chamber target_chamber(Branch b);

struct ScalingRow {
  double action = 0;
  int samples = 0;
  /// Points inside the fuzz band or whose exact orbit failed numerically.
  int excluded = 0;
  /// Points outside the fuzz band whose exact image left the predicted
  /// chamber.
  int mismatched = 0;
  double median_error_g = 0;
  double median_error_gh = 0;
};

struct ScalingReport {
  Branch branch = Branch::UU;
  Leg leg = Leg::L12;
  std::vector<ScalingRow> rows;
  double slope_g = 0;
  double slope_gh = 0;
};

/// Median |empirical - normal form| over points sampled uniformly inside the
/// branch window at each action, and log-log slopes of the medians.
ScalingReport error_scaling(const NormalForms& nf, Leg leg, Branch branch, const std::vector<double>& actions,
                            int samples_per_action, std::uint64_t seed, unsigned threads = 0);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace slitbilliard
