#include "slitbilliard/normal_forms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "slitbilliard/parallel.hpp"
#include "slitbilliard/rng.hpp"

namespace slitbilliard {

std::string_view to_string(Strip s) {
  switch (s) {
    case Strip::R1Plus: return "R1_plus";
    case Strip::R2Plus: return "R2_plus";
    case Strip::R1Minus: return "R1_minus";
    case Strip::R2Minus: return "R2_minus";
  }
  return "?";
}

std::string_view to_string(Leg l) { return l == Leg::L12 ? "leg12" : "leg21"; }

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::UU: return "UU";
    case Branch::UL_I: return "UL_I";
    case Branch::UL_II: return "UL_II";
    case Branch::LL: return "LL";
    case Branch::LU_I: return "LU_I";
    case Branch::LU_II: return "LU_II";
  }
  return "?";
}

Leg leg_of(Strip s) { return strip_index(s) == 1 ? Leg::L12 : Leg::L21; }

Chamber source_chamber(Branch b) {
  return b == Branch::UU || b == Branch::UL_I || b == Branch::UL_II ? Chamber::Upper : Chamber::Lower;
}

Chamber target_chamber(Branch b) {
  return b == Branch::UU || b == Branch::LU_I || b == Branch::LU_II ? Chamber::Upper : Chamber::Lower;
}

NFVariants NFVariants::adjudicated() {
  NFVariants v;
  v.uu_second_order_mixed = false;
  v.ll_second_order_diagonal = true;
  v.ul1_h_unscaled_action = false;
  v.ul1_h_printed_powers = false;
  v.ul2_constant_extra_factor = false;
  v.lu1_leg21_plus_sign = false;
  v.lu1_h_printed_powers = false;
  v.lu2_constant_minus = true;
  v.lu2_constant_extra_factor = false;
  v.lu2_leg21_without_total = false;
  return v;
}

std::string NFVariants::describe() const {
  std::ostringstream os;
  auto flag = [&](const char* name, bool value) { os << name << '=' << (value ? 1 : 0) << ' '; };
  flag("uu_second_order_mixed", uu_second_order_mixed);
  flag("ll_second_order_diagonal", ll_second_order_diagonal);
  flag("ul1_h_unscaled_action", ul1_h_unscaled_action);
  flag("ul1_h_printed_powers", ul1_h_printed_powers);
  flag("ul2_constant_extra_factor", ul2_constant_extra_factor);
  flag("lu1_leg21_plus_sign", lu1_leg21_plus_sign);
  flag("lu1_h_printed_powers", lu1_h_printed_powers);
  flag("lu2_constant_minus", lu2_constant_minus);
  flag("lu2_constant_extra_factor", lu2_constant_extra_factor);
  flag("lu2_leg21_without_total", lu2_leg21_without_total);
  std::string out = os.str();
  out.pop_back();
  return out;
}

NFConstants compute_constants(const SlitConfig& cfg) {
  const ChamberGeometry up(cfg, Chamber::Upper, false);
  const ChamberGeometry lo(cfg, Chamber::Lower, false);
  NFConstants k;
  k.L_star = up.total();
  k.M_star = lo.total();
  k.theta1 = up.angle_star(1);
  k.theta2 = up.angle_star(2);
  k.zeta1 = lo.angle_star(1);
  k.zeta2 = lo.angle_star(2);
  k.alpha = up.alpha();
  k.beta = up.beta();
  k.alpha_p = lo.alpha();
  k.beta_p = lo.beta();
  k.sup_rate = cfg.sup_rate();

  for (int i = 1; i <= 2; ++i) {
    const JumpData d = cfg.jump_data(i);
    JumpConstants& c = k.jump[static_cast<std::size_t>(i - 1)];
    c.f_minus = d.f_minus;
    c.f_plus = d.f_plus;
    c.l_minus = d.l_minus;
    c.l_plus = d.l_plus;
    c.ld_minus = -d.fdot_minus;
    c.ld_plus = -d.fdot_plus;
    c.ldd_minus = -d.fddot_minus;
    c.ldd_plus = -d.fddot_plus;
    c.m_minus = d.m_minus;
    c.m_plus = d.m_plus;
    c.md_minus = -d.fdot_minus;
    c.md_plus = -d.fdot_plus;
    c.mdd_minus = -d.fddot_minus;
    c.mdd_plus = -d.fddot_plus;
    c.a = d.a;
    c.a_prime = d.a_prime;

    const double lm = c.l_minus, lp = c.l_plus, ldm = c.ld_minus, ldp = c.ld_plus;
    const double lddm = c.ldd_minus, lddp = c.ldd_plus;
    const double mm = c.m_minus, mp = c.m_plus, mdm = c.md_minus, mdp = c.md_plus;
    const double mddm = c.mdd_minus, mddp = c.mdd_plus;

    c.delta = 0.5 * (lp / lm) * (lm * ldp - lp * ldm);
    c.delta1 = 0.125 * lp * lp * (lm * lddp - lp * lddm);
    c.delta2_mixed = lm * lp * (lm * lddp - lp * lddm) / 24.0;
    c.delta2_diagonal = lm * lp * (lm * lddm - lp * lddp) / 24.0;

    c.upsilon = 0.5 * (mp / mm) * (mm * mdp - mp * mdm);
    c.upsilon1 = 0.125 * mp * mp * (mm * mddp - mp * mddm);
    c.upsilon2_diagonal = mm * mp * (mm * mddm - mp * mddp) / 24.0;
    c.upsilon2_mixed = mm * mp * (mm * mddp - mp * mddm) / 24.0;

    c.kappa_one[0] = 0.5 * mp * (mdp - mp * ldm / lm);
    c.kappa_one[1] = 0.5 * mp * ldm / lm;
    c.kappa_one[2] = 0.125 * mp * lddm * (1.0 - lm * lm / 3.0);
    c.kappa_one[3] = 0.25 * mp * mp * (lddm + lm * mddp / 6.0);
    c.kappa_one[4] = 0.125 * mp * mp * mp * lddm;
    c.kappa_one[5] = 0.125 * mp * mp * mddp * lm;
    c.kappa_two[2] = 0.25 * mp * mp * lddm;
    c.kappa_two[3] = 0.125 * mp * mp * (lm * mddp - mp * lddm);
    c.kappa_two[4] = mp * lm * (lm * lm * lddm - lm * mp * mddp - 3.0 * lddm) / 24.0;

    c.chi_one[0] = 0.5 * lp * (ldp - lp * mdm / mm);
    c.chi_one[1] = 0.5 * lp * mdm / mm;
    c.chi_one[2] = 0.125 * lp * mddm * (1.0 - mm * mm / 3.0);
    c.chi_one[3] = 0.25 * lp * lp * (mm * lddp / 6.0 - mddm);
    c.chi_one[4] = 0.125 * lp * lp * lp * mddm;
    c.chi_one[5] = 0.125 * lp * lp * lddp * mm;
    c.chi_two[2] = 0.25 * lp * lp * mddm;
    c.chi_two[3] = 0.125 * lp * lp * (mm * lddp - lp * mddm);
    c.chi_two[4] = lp * mm * (mm * mm * mddm - mm * lp * lddp - 3.0 * mddm) / 24.0;
  }

  const auto& j1 = k.jump[0];
  const auto& j2 = k.jump[1];
  const double a1 = j1.a, a2 = j2.a;
  k.tr_upper = (j1.l_minus / j1.l_plus - a1 * k.beta) * (j2.l_minus / j2.l_plus - a2 * k.alpha) +
               (j1.l_plus / j1.l_minus - a1 * k.alpha) * (j2.l_plus / j2.l_minus - a2 * k.beta) -
               a1 * a2 * k.alpha * k.beta;
  const double b1 = j1.a_prime, b2 = j2.a_prime;
  k.tr_lower = (j1.f_minus / j1.f_plus - b1 * k.beta_p) * (j2.f_minus / j2.f_plus - b2 * k.alpha_p) +
               (j1.f_plus / j1.f_minus - b1 * k.alpha_p) * (j2.f_plus / j2.f_minus - b2 * k.beta_p) -
               b1 * b2 * k.alpha_p * k.beta_p;
  return k;
}

NormalForms::NormalForms(const SlitConfig& cfg, NFVariants variants, double validity)
    : cfg_(cfg),
      variants_(variants),
      validity_(validity),
      upper_(cfg, Chamber::Upper, false),
      lower_(cfg, Chamber::Lower, false),
      k_(compute_constants(cfg)) {}

namespace {

/// First occurrence of t_j* strictly after the absolute time t.
double next_occurrence(double t_star, double t) {
  double s = t_star + 2.0 * std::floor((t - t_star) / 2.0);
  while (s <= t) s += 2.0;
  return s;
}

double mod2(double x) { return reduce_mod2(x); }

}  // namespace

template <class Real>
StripPoint NormalForms::to_strip(Real t, Real v, Strip strip) const {
  using std::round;
  const Chamber ch = is_upper(strip) ? Chamber::Upper : Chamber::Lower;
  if ((ch == Chamber::Upper && !(v > Real(0))) || (ch == Chamber::Lower && !(v < Real(0))))
    throw Error(ErrorCode::NotInStrip, "velocity has the wrong sign for the strip's chamber");
  const ChamberGeometry& g = geometry(ch);
  const double ts = cfg_.t_star(strip_index(strip));
  const Real t_star = Real(ts) + Real(2) * round((t - Real(ts)) / Real(2));
  const Real k = g.action_density(t, v, Side::RightLimit);
  if (!(k > Real(0))) throw Error(ErrorCode::NotInStrip, "non-positive action");
  const Real integral = t >= t_star ? g.local_integral(t_star, t, Side::RightLimit)
                                    : -g.local_integral(t, t_star, Side::RightLimit);
  const Real coord = k * integral;
  if (!(coord > Real(-1) && coord < Real(3)))
    throw Error(ErrorCode::NotInStrip, "state is not the first slit collision after the singular time");
  return {static_cast<double>(coord), static_cast<double>(k / Real(2)), strip};
}

template <class Real>
BasicRecord<Real> NormalForms::from_strip(const StripPoint& p, int period) const {
  using std::abs;
  if (!(p.action > 0)) throw Error(ErrorCode::NotInStrip, "scaled action must be positive");
  const Chamber ch = is_upper(p.strip) ? Chamber::Upper : Chamber::Lower;
  const ChamberGeometry& g = geometry(ch);
  const Real t_star = Real(cfg_.t_star(strip_index(p.strip))) + Real(2 * period);
  const Real k = Real(2) * Real(p.action);
  const Real target = Real(p.coord) / k;
  // Newton on s -> integral of gap^-2 over [t*, t* + s].
  Real s = target * g.gap(t_star, Side::RightLimit).g * g.gap(t_star, Side::RightLimit).g;
  for (int it = 0; it < 60; ++it) {
    const Real gs = g.gap(t_star + s, Side::LeftLimit).g;
    const Real step = (g.local_integral(t_star, t_star + s, Side::RightLimit) - target) * gs * gs;
    s -= step;
    if (abs(step) <= Real(8) * std::numeric_limits<Real>::epsilon() * (abs(s) + Real(1e-3))) break;
  }
  const Real t = t_star + s;
  const auto gp = g.gap(t, Side::RightLimit);
  Real v = (k - gp.g * gp.gd) / gp.g;
  for (int it = 0; it < 200; ++it) {
    const Real next = (k - gp.g * gp.gd - gp.g * gp.g * gp.gdd / (Real(3) * v)) / gp.g;
    const Real dv = next - v;
    v = next;
    if (abs(dv) <= Real(4) * std::numeric_limits<Real>::epsilon() * abs(v)) break;
  }
  return {t, v, cfg_.wall_at(t, Side::RightLimit).f, ch, CollisionKind::Slit};
}

template StripPoint NormalForms::to_strip<double>(double, double, Strip) const;
template StripPoint NormalForms::to_strip<long double>(long double, long double, Strip) const;
template BasicRecord<double> NormalForms::from_strip<double>(const StripPoint&, int) const;
template BasicRecord<long double> NormalForms::from_strip<long double>(const StripPoint&, int) const;

double NormalForms::fractional(const StripPoint& p) const {
  const bool upper = is_upper(p.strip);
  const double span = leg_of(p.strip) == Leg::L12 ? (upper ? k_.beta : k_.beta_p) : (upper ? k_.alpha : k_.alpha_p);
  return mod2(2.0 * span * p.action - p.coord);
}

namespace {

struct Thresholds {
  double scale;  // l_j^- (upper) or f_j^- (lower)
  double lo, hi;
};

Thresholds thresholds(const NFConstants& k, Strip s) {
  const JumpConstants& j = k.at(leg_of(s) == Leg::L12 ? 2 : 1);
  if (is_upper(s)) return {j.l_minus, j.f_plus - j.f_minus, 2.0 - j.f_plus - j.f_minus};
  return {j.f_minus, j.f_minus - j.f_plus, j.f_minus + j.f_plus};
}

}  // namespace

double NormalForms::branch_distance(const StripPoint& p) const { return thresholds(k_, p.strip).scale * fractional(p); }

double NormalForms::fuzz(const StripPoint& p) const {
  const double total = is_upper(p.strip) ? k_.L_star : k_.M_star;
  return 8.0 * k_.sup_rate / (total * p.action);
}

Branch NormalForms::classify_unchecked(const StripPoint& p) const {
  const Thresholds th = thresholds(k_, p.strip);
  const double d = th.scale * fractional(p);
  if (is_upper(p.strip)) return d < th.lo ? Branch::UL_II : d > th.hi ? Branch::UL_I : Branch::UU;
  return d < th.lo ? Branch::LU_II : d > th.hi ? Branch::LU_I : Branch::LL;
}

Branch NormalForms::classify(const StripPoint& p, Leg leg) const {
  if (leg != leg_of(p.strip)) throw Error(ErrorCode::BranchMismatch, "leg does not start on this strip");
  if (!(p.action > validity_)) throw Error(ErrorCode::BelowValidity, "scaled action below the validity threshold");
  const Thresholds th = thresholds(k_, p.strip);
  const double d = th.scale * fractional(p);
  const double band = fuzz(p);
  // 0 and 2*scale are the same boundary: the last pre-jump collision at t_j*.
  for (double b : {0.0, th.lo, th.hi, 2.0 * th.scale}) {
    if (b < 0.0 || b > 2.0 * th.scale) continue;
    if (std::abs(d - b) < band) throw Error(ErrorCode::NearBranchBoundary, "point lies in the fuzz band of a threshold");
  }
  return classify_unchecked(p);
}

std::array<double, 2> NormalForms::window(Branch b, Leg leg) const {
  const Strip s = make_strip(leg == Leg::L12 ? 1 : 2, source_chamber(b));
  const Thresholds th = thresholds(k_, s);
  const double lo = std::clamp(th.lo / th.scale, 0.0, 2.0);
  const double hi = std::clamp(th.hi / th.scale, 0.0, 2.0);
  switch (b) {
    case Branch::UU:
    case Branch::LL: return {lo, hi};
    case Branch::UL_I:
    case Branch::LU_I: return {hi, 2.0};
    case Branch::UL_II:
    case Branch::LU_II: return {0.0, lo};
  }
  return {0.0, 0.0};
}

StripPoint NormalForms::apply(Branch b, const StripPoint& p, Leg leg, NFMode mode) const {
  if (leg != leg_of(p.strip)) throw Error(ErrorCode::BranchMismatch, "leg does not start on this strip");
  if ((source_chamber(b) == Chamber::Upper) != is_upper(p.strip))
    throw Error(ErrorCode::BranchMismatch, "branch starts in the other chamber");
  if (!(p.action > validity_)) throw Error(ErrorCode::BelowValidity, "scaled action below the validity threshold");

  const int j = leg == Leg::L12 ? 2 : 1;
  const JumpConstants& c = k_.at(j);
  const double x = fractional(p);
  const double a = p.action;
  const bool h = mode == NFMode::GPlusH;
  StripPoint out;
  out.strip = make_strip(j, target_chamber(b));

  switch (b) {
    case Branch::UU: {
      const double r = c.l_minus / c.l_plus;
      const double u = r - r * x;
      out.coord = u + 1.0;
      out.action = a / r + c.delta * u;
      if (h) {
        const double d2 = variants_.uu_second_order_mixed ? c.delta2_mixed : c.delta2_diagonal;
        out.action += c.delta1 * u * u / a + d2 / a;
      }
      break;
    }
    case Branch::LL: {
      const double r = c.m_minus / c.m_plus;
      const double u = -r * x + r;
      out.coord = u + 1.0;
      out.action = a / r + c.upsilon * u;
      if (h) {
        const double u2 = variants_.ll_second_order_diagonal ? c.upsilon2_diagonal : c.upsilon2_mixed;
        out.action += c.upsilon1 * u * u / a + u2 / a;
      }
      break;
    }
    case Branch::UL_I: {
      out.coord = (c.l_minus / c.m_plus) * x + (c.m_plus - c.l_minus - 1.0) / c.m_plus;
      const double u = out.coord - 1.0;
      const auto& q = c.kappa_one;
      out.action = -(c.m_plus / c.l_minus) * a + q[0] * u - q[1];
      if (h) {
        const double a3 = variants_.ul1_h_unscaled_action ? k_.L_star * a : a;
        if (variants_.ul1_h_printed_powers)
          out.action += q[2] / a + q[3] * u / a3 + q[4] * u * u / a - q[5] * u * u * u / a;
        else
          out.action += (q[2] + q[5] / 3.0) / a + (q[3] - q[5] / 3.0) * u / a3 + (q[4] - q[5]) * u * u / a;
      }
      break;
    }
    case Branch::UL_II: {
      out.coord = (c.l_minus / c.m_plus) * x + (c.m_plus - c.l_minus + 1.0) / c.m_plus;
      const double u = out.coord - 1.0;
      out.action = -(c.m_plus / c.l_minus) * a + c.kappa_one[0] * u + c.kappa_one[1];
      if (h) {
        const auto& q = c.kappa_two;
        const double q4 = variants_.ul2_constant_extra_factor ? q[4] : q[4] / c.l_minus;
        out.action += -q[2] * u / a - q[3] * u * u / a - q4 / a;
      }
      break;
    }
    case Branch::LU_I: {
      out.coord = (c.m_minus / c.l_plus) * x + (c.l_plus - c.m_minus + 1.0) / c.l_plus;
      const double u = out.coord - 1.0;
      const auto& q = c.chi_one;
      const double sign = leg == Leg::L21 && variants_.lu1_leg21_plus_sign ? 1.0 : -1.0;
      out.action = sign * (c.l_plus / c.m_minus) * a + q[0] * u + q[1];
      if (h) {
        if (variants_.lu1_h_printed_powers)
          out.action += q[2] / a + q[3] * u / a + q[4] * u * u / a - q[5] * u * u * u / a;
        else
          out.action += (q[2] + q[5] / 3.0) / a + (q[3] - q[5] / 3.0) * u / a + (q[4] - q[5]) * u * u / a;
      }
      break;
    }
    case Branch::LU_II: {
      double xx = x;
      if (leg == Leg::L21 && variants_.lu2_leg21_without_total) xx = mod2(2.0 * k_.alpha_p / k_.M_star * a - p.coord);
      out.coord = (c.m_minus / c.l_plus) * xx + (c.l_plus - c.m_minus - 1.0) / c.l_plus;
      const double u = out.coord - 1.0;
      out.action = -(c.l_plus / c.m_minus) * a + c.chi_one[0] * u - c.chi_one[1];
      if (h) {
        const auto& q = c.chi_two;
        const double sign = variants_.lu2_constant_minus ? -1.0 : 1.0;
        const double q4 = variants_.lu2_constant_extra_factor ? q[4] : q[4] / c.m_minus;
        out.action += q[2] * u / a - q[3] * u * u / a + sign * q4 / a;
      }
      break;
    }
  }
  return out;
}

StripPoint NormalForms::empirical(const StripPoint& p, Leg leg, const SolverTolerances& tol) const {
  using Ld = long double;
  if (leg != leg_of(p.strip)) throw Error(ErrorCode::BranchMismatch, "leg does not start on this strip");
  if (!(p.action > validity_)) throw Error(ErrorCode::BelowValidity, "scaled action below the validity threshold");
  const int j = leg == Leg::L12 ? 2 : 1;
  BasicRecord<Ld> r = from_strip<Ld>(p, 0);
  const double start = cfg_.t_star(strip_index(p.strip));
  const Ld jump = Ld(next_occurrence(cfg_.t_star(j), start));
  while (r.t < jump) r = collision_map(cfg_, r, tol);
  return to_strip<Ld>(r.t, r.v, make_strip(j, r.chamber));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::InsufficientSamples, "need at least two points for a slope");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0)) throw Error(ErrorCode::InsufficientSamples, "abscissae are not distinct");
  return (n * sxy - sx * sy) / den;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

struct Sample {
  enum Kind { Ok, Excluded, Mismatch } kind = Excluded;
  double err_g = 0, err_gh = 0;
};

}  // namespace

ScalingReport error_scaling(const NormalForms& nf, Leg leg, Branch branch, const std::vector<double>& actions,
                            int samples_per_action, std::uint64_t seed, unsigned threads) {
  if (actions.size() < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two actions");
  const auto [amin, amax] = std::minmax_element(actions.begin(), actions.end());
  if (*amax < 100.0 * *amin) throw Error(ErrorCode::InsufficientSamples, "actions must span two decades");

  const Strip strip = make_strip(leg == Leg::L12 ? 1 : 2, source_chamber(branch));
  const NFConstants& k = nf.constants();
  const bool upper = is_upper(strip);
  const double span = leg == Leg::L12 ? (upper ? k.beta : k.beta_p) : (upper ? k.alpha : k.alpha_p);
  const auto win = nf.window(branch, leg);

  ScalingReport rep;
  rep.branch = branch;
  rep.leg = leg;
  const std::size_t per = static_cast<std::size_t>(std::max(samples_per_action, 0));
  std::vector<Sample> samples(actions.size() * per);
  parallel_for(samples.size(), threads, [&](std::size_t idx) {
    const double target = actions[idx / per];
    Rng rng = Rng::stream(seed, idx);
    const double x = rng.uniform(win[0], win[1]);
    const double coord = rng.uniform(0.1, 1.9);
    const double n = std::ceil(span * target);
    StripPoint p{coord, (x + coord + 2.0 * n) / (2.0 * span), strip};
    Sample& s = samples[idx];
    try {
      if (nf.classify(p, leg) != branch) return;
      const StripPoint e = nf.empirical(p, leg);
      const StripPoint g = nf.apply(branch, p, leg, NFMode::GOnly);
      if (e.strip != g.strip) {
        s.kind = Sample::Mismatch;
        return;
      }
      const StripPoint gh = nf.apply(branch, p, leg, NFMode::GPlusH);
      s.err_g = std::max(std::abs(e.coord - g.coord), std::abs(e.action - g.action));
      s.err_gh = std::max(std::abs(e.coord - gh.coord), std::abs(e.action - gh.action));
      s.kind = Sample::Ok;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NearBranchBoundary && !e.numeric()) throw;
    }
  });

  std::vector<double> xs, yg, ygh;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    ScalingRow row;
    row.action = actions[a];
    std::vector<double> eg, egh;
    for (std::size_t i = 0; i < per; ++i) {
      const Sample& s = samples[a * per + i];
      if (s.kind == Sample::Ok) {
        eg.push_back(s.err_g);
        egh.push_back(s.err_gh);
      } else if (s.kind == Sample::Mismatch) {
        ++row.mismatched;
      } else {
        ++row.excluded;
      }
    }
    row.samples = static_cast<int>(eg.size());
    if (row.samples < 5) throw Error(ErrorCode::InsufficientSamples, "too few classifiable samples at one action");
    row.median_error_g = median(eg);
    row.median_error_gh = median(egh);
    xs.push_back(row.action);
    yg.push_back(row.median_error_g);
    ygh.push_back(row.median_error_gh);
    rep.rows.push_back(row);
  }
  rep.slope_g = loglog_slope(xs, yg);
  rep.slope_gh = loglog_slope(xs, ygh);
  return rep;
}

}  // namespace slitbilliard
