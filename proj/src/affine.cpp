#include "slitbilliard/affine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slitbilliard/parallel.hpp"
#include "slitbilliard/rng.hpp"
#include "slitbilliard/trapping.hpp"

namespace slitbilliard {

Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

namespace {

double norm(const Vec2& v) { return std::hypot(v[0], v[1]); }

double reduce2(double x) { return x - 2.0 * std::floor(0.5 * x); }

}  // namespace

bool AffineLeg::survives(const Vec2& p) const {
  const double x = reduce2(phase(p));
  return x > lo && x < hi;
}

long AffineLeg::window_index(const Vec2& p) const {
  return static_cast<long>(std::floor(0.5 * (phase(p) - lo)));
}

Vec2 AffineLeg::map(const Vec2& p, long window) const {
  const double x = phase(p) - 2.0 * static_cast<double>(window);
  const double u = ratio * (1.0 - x);
  return {1.0 + u, p[1] / ratio + delta * u};
}

std::optional<Vec2> AffineLeg::step(const Vec2& p) const {
  if (!survives(p)) return std::nullopt;
  return map(p, window_index(p));
}

Mat2 AffineLeg::jacobian() const {
  return {{{ratio, -ratio * slope}, {delta * ratio, -delta * ratio * slope + 1.0 / ratio}}};
}

Vec2 AffineSystem::box_point(long n, double tau, double s) const {
  return {tau, (s + 2.0 * static_cast<double>(n) + tau) / leg12.slope};
}

double Segment::length() const { return std::hypot(b[0] - a[0], b[1] - a[1]); }

namespace {

AffineLeg make_leg(double minus, double plus, double slope, double delta) {
  AffineLeg leg;
  leg.ratio = minus / plus;
  leg.slope = slope;
  leg.delta = delta;
  leg.lo = std::clamp(1.0 - plus / minus, 0.0, 2.0);
  leg.hi = std::clamp(1.0 + plus / minus, 0.0, 2.0);
  return leg;
}

Vec2 eigenvector(const Mat2& m, double lambda) {
  const Vec2 a{m[0][1], lambda - m[0][0]};
  const Vec2 b{lambda - m[1][1], m[1][0]};
  Vec2 e = norm(a) >= norm(b) ? a : b;
  const double n = norm(e);
  e = {e[0] / n, e[1] / n};
  if (e[0] < 0 || (e[0] == 0 && e[1] < 0)) e = {-e[0], -e[1]};
  return e;
}

double chord_limit(double extent, double step) {
  return step == 0 ? std::numeric_limits<double>::infinity() : extent / std::abs(step);
}

}  // namespace

AffineSystem build_affine(const NFConstants& k, Chamber chamber) {
  AffineSystem sys;
  sys.chamber = chamber;
  const JumpConstants& j1 = k.at(1);
  const JumpConstants& j2 = k.at(2);
  if (chamber == Chamber::Upper) {
    sys.leg12 = make_leg(j2.l_minus, j2.l_plus, 2.0 * k.beta, j2.delta);
    sys.leg21 = make_leg(j1.l_minus, j1.l_plus, 2.0 * k.alpha, j1.delta);
  } else {
    sys.leg12 = make_leg(j2.m_minus, j2.m_plus, 2.0 * k.beta_p, j2.upsilon);
    sys.leg21 = make_leg(j1.m_minus, j1.m_plus, 2.0 * k.alpha_p, j1.upsilon);
  }
  sys.dg12 = sys.leg12.jacobian();
  sys.dg21 = sys.leg21.jacobian();
  sys.dgu = sys.dg21 * sys.dg12;
  const Mat2& m = sys.dgu;
  sys.trace = m[0][0] + m[1][1];
  sys.det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double disc = sys.trace * sys.trace - 4.0 * sys.det;
  sys.hyperbolic = std::abs(sys.trace) > 2.0 && disc > 0;
  if (!sys.hyperbolic) return sys;

  const double root = std::sqrt(disc);
  sys.lambda_u = sys.trace > 0 ? 0.5 * (sys.trace + root) : 0.5 * (sys.trace - root);
  sys.lambda_s = sys.det / sys.lambda_u;
  sys.e_u = eigenvector(m, sys.lambda_u);
  sys.e_s = eigenvector(m, sys.lambda_s);
  // In (tau, s) with s = slope * I - tau the A-box is [0, 2] x [lo, hi].
  const double dt = sys.e_u[0];
  const double ds = sys.leg12.slope * sys.e_u[1] - sys.e_u[0];
  sys.unstable_extent = std::min(chord_limit(2.0, dt), chord_limit(sys.leg12.hi - sys.leg12.lo, ds));
  return sys;
}

AffineSystem build_affine(const SlitConfig& cfg) {
  const Chamber c = classify(cfg).kind == TrapKind::UpperTrapping ? Chamber::Lower : Chamber::Upper;
  return build_affine(compute_constants(cfg), c);
}

std::string_view to_string(LineVisit v) { return v == LineVisit::StayedGood ? "StayedGood" : "StayedBad"; }

std::string_view to_string(ExitLeg e) { return e == ExitLeg::AtT1 ? "at_t1" : "at_t2"; }

Segment unstable_chord(const AffineSystem& sys, const Vec2& p) {
  if (!sys.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "no unstable direction");
  if (!sys.leg12.survives(p)) throw Error(ErrorCode::InvalidConfig, "point is not inside an A-box");
  const AffineLeg& leg = sys.leg12;
  const double s0 = leg.phase(p) - 2.0 * static_cast<double>(leg.window_index(p));
  const double dt = sys.e_u[0];
  const double ds = leg.slope * sys.e_u[1] - sys.e_u[0];
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double x0, double dx, double a, double b) {
    if (dx == 0) return;
    double t1 = (a - x0) / dx, t2 = (b - x0) / dx;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  };
  clip(p[0], dt, 0.0, 2.0);
  clip(s0, ds, leg.lo, leg.hi);
  return {{p[0] + lo * sys.e_u[0], p[1] + lo * sys.e_u[1]}, {p[0] + hi * sys.e_u[0], p[1] + hi * sys.e_u[1]}};
}

std::vector<Segment> leg_pieces(const AffineLeg& leg, const Segment& s) {
  std::vector<Segment> out;
  const double pa = leg.phase(s.a), pb = leg.phase(s.b);
  auto at = [&](double t) { return Vec2{s.a[0] + t * (s.b[0] - s.a[0]), s.a[1] + t * (s.b[1] - s.a[1])}; };
  if (pa == pb) {
    if (leg.survives(s.a)) {
      const long n = leg.window_index(s.a);
      out.push_back({leg.map(s.a, n), leg.map(s.b, n)});
    }
    return out;
  }
  const double lo = std::min(pa, pb), hi = std::max(pa, pb);
  const long first = static_cast<long>(std::floor(0.5 * (lo - leg.hi)));
  const long last = static_cast<long>(std::ceil(0.5 * (hi - leg.lo)));
  for (long n = first; n <= last; ++n) {
    const double a = std::max(lo, leg.lo + 2.0 * static_cast<double>(n));
    const double b = std::min(hi, leg.hi + 2.0 * static_cast<double>(n));
    if (!(a < b)) continue;
    double ta = (a - pa) / (pb - pa), tb = (b - pa) / (pb - pa);
    if (ta > tb) std::swap(ta, tb);
    out.push_back({leg.map(at(ta), n), leg.map(at(tb), n)});
  }
  if (pb < pa) std::reverse(out.begin(), out.end());
  return out;
}

LineFate line_fate(const AffineSystem& sys, const Segment& line) {
  LineFate fate;
  for (const Segment& mid : leg_pieces(sys.leg12, line))
    for (const Segment& end : leg_pieces(sys.leg21, mid)) fate.survivors.push_back(end);
  const Vec2 d{line.b[0] - line.a[0], line.b[1] - line.a[1]};
  const double full = norm(sys.dgu * d);
  double kept = 0;
  for (const Segment& s : fate.survivors) kept += s.length();
  fate.surviving_fraction = full > 0 ? kept / full : 0.0;
  fate.good = fate.survivors.size() >= 2;
  return fate;
}

namespace {

/// Period during which the point leaves, or periods + 1.
int exit_period(const AffineSystem& sys, Vec2 p, int periods, ExitLeg* leg = nullptr) {
  for (int k = 1; k <= periods; ++k) {
    const Vec2 q = sys.leg12.map(p, sys.leg12.window_index(p));
    if (!sys.leg21.survives(q)) {
      if (leg) *leg = ExitLeg::AtT1;
      return k;
    }
    p = sys.leg21.map(q, sys.leg21.window_index(q));
    if (!sys.leg12.survives(p)) {
      if (leg) *leg = ExitLeg::AtT2;
      return k;
    }
  }
  return periods + 1;
}

}  // namespace

EscapeOutcome iterate(const AffineSystem& sys, const Vec2& point, int periods) {
  if (!sys.leg12.survives(point)) throw Error(ErrorCode::InvalidConfig, "start point is not inside an A-box");
  EscapeOutcome out;
  Vec2 p = point;
  for (int k = 1; k <= periods; ++k) {
    // Without an unstable direction every line counts as bad.
    const bool good = sys.hyperbolic && line_fate(sys, unstable_chord(sys, p)).good;
    out.itinerary.push_back(good ? LineVisit::StayedGood : LineVisit::StayedBad);
    ExitLeg leg = ExitLeg::AtT1;
    if (exit_period(sys, p, 1, &leg) == 1) {
      out.exit_period = k;
      out.exit_leg = leg;
      return out;
    }
    const Vec2 q = sys.leg12.map(p, sys.leg12.window_index(p));
    p = sys.leg21.map(q, sys.leg21.window_index(q));
  }
  return out;
}

std::vector<double> survival_curve(const AffineSystem& sys, long box, int samples, int periods, std::uint64_t seed,
                                   unsigned threads) {
  if (!sys.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "survival statistics need |Tr| > 2");
  if (samples <= 0 || periods < 0) throw Error(ErrorCode::InsufficientSamples, "need samples and periods");
  std::vector<int> exits(static_cast<std::size_t>(samples));
  parallel_for(exits.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::stream(seed, i);
    const double tau = rng.uniform(0.0, 2.0);
    const double s = rng.uniform(sys.leg12.lo, sys.leg12.hi);
    exits[i] = exit_period(sys, sys.box_point(box, tau, s), periods);
  });
  std::vector<long> alive(static_cast<std::size_t>(periods) + 1, 0);
  for (int e : exits)
    for (int p = 0; p < e && p <= periods; ++p) ++alive[static_cast<std::size_t>(p)];
  std::vector<double> out(alive.size());
  for (std::size_t p = 0; p < alive.size(); ++p) out[p] = static_cast<double>(alive[p]) / samples;
  return out;
}

double good_line_bound(double q) {
  if (!(q > 0)) throw Error(ErrorCode::InvalidConfig, "window ratio must be positive");
  return (1.0 + 2.0 * q) / (2.0 + q);
}

double good_line_bound(const AffineSystem& sys) { return good_line_bound(1.0 / sys.leg21.ratio); }

GoodLineReport good_line_survey(const AffineSystem& sys, long box, int lines, std::uint64_t seed) {
  if (!sys.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "no unstable direction");
  GoodLineReport rep;
  double sum = 0;
  for (int i = 0; i < lines; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    const double tau = rng.uniform(0.0, 2.0);
    const double s = rng.uniform(sys.leg12.lo, sys.leg12.hi);
    const LineFate fate = line_fate(sys, unstable_chord(sys, sys.box_point(box, tau, s)));
    ++rep.lines;
    if (!fate.good) continue;
    ++rep.good;
    sum += fate.surviving_fraction;
    rep.max_surviving = std::max(rep.max_surviving, fate.surviving_fraction);
  }
  if (rep.good > 0) rep.mean_surviving = sum / rep.good;
  return rep;
}

namespace {

struct Piece {
  Segment seg;
  /// Measure on the initial line represented by this piece.
  double weight = 0;
};

void resample(std::vector<Piece>& pieces, std::size_t target, Rng& rng) {
  double total = 0;
  for (const Piece& p : pieces) total += p.weight;
  const double step = total / static_cast<double>(target);
  double next = rng.uniform() * step, cum = 0;
  std::vector<Piece> kept;
  kept.reserve(target);
  for (const Piece& p : pieces) {
    cum += p.weight;
    while (next < cum && kept.size() < target) {
      kept.push_back({p.seg, step});
      next += step;
    }
  }
  pieces = std::move(kept);
}

LineStats summarize(const std::vector<Piece>& pieces, int n, double stretch_n, bool resampled,
                    const std::vector<double>& eps) {
  LineStats st;
  st.n = n;
  st.resampled = resampled;
  double longest = 0;
  for (const Piece& p : pieces) {
    const double len = p.seg.length();
    st.surviving_measure += p.weight;
    st.piece_count += resampled ? p.weight * stretch_n / len : 1.0;
    longest = std::max(longest, len);
  }
  st.measure.assign(eps.size(), 0.0);
  for (std::size_t e = 0; e < eps.size(); ++e)
    for (const Piece& p : pieces) st.measure[e] += p.weight * std::min(1.0, 2.0 * eps[e] / p.seg.length());

  double se = 0, sm = 0, mean = 0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    se += eps[e] * eps[e];
    sm += eps[e] * st.measure[e];
    mean += st.measure[e];
  }
  if (!eps.empty()) mean /= static_cast<double>(eps.size());
  st.c_hat = se > 0 ? sm / se : 0.0;
  double res = 0, tot = 0;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    res += std::pow(st.measure[e] - st.c_hat * eps[e], 2);
    tot += std::pow(st.measure[e] - mean, 2);
  }
  st.r_squared = tot > 0 ? 1.0 - res / tot : (res == 0 ? 1.0 : 0.0);

  // r_n is uniform on [0, len/2] within a piece.
  if (st.surviving_measure > 0) {
    auto cdf = [&](double r) {
      double c = 0;
      for (const Piece& p : pieces) c += p.weight * std::min(1.0, 2.0 * r / p.seg.length());
      return c / st.surviving_measure;
    };
    const std::array<double, 3> qs{0.1, 0.5, 0.9};
    for (std::size_t i = 0; i < qs.size(); ++i) {
      double a = 0, b = 0.5 * longest;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        (cdf(m) < qs[i] ? a : b) = m;
      }
      st.r_quantiles[i] = 0.5 * (a + b);
    }
  }
  return st;
}

}  // namespace

std::vector<LineStats> line_fragmentation(const AffineSystem& sys, const Segment& line, int periods,
                                          const std::vector<double>& epsilons, const FragmentationOptions& opt) {
  if (!sys.hyperbolic) throw Error(ErrorCode::NotHyperbolic, "fragmentation needs an unstable direction");
  if (opt.max_pieces == 0) throw Error(ErrorCode::InvalidConfig, "max_pieces must be positive");
  const double len = line.length();
  const Vec2 d{(line.b[0] - line.a[0]) / len, (line.b[1] - line.a[1]) / len};
  if (std::abs(d[0] * sys.e_u[1] - d[1] * sys.e_u[0]) > 1e-9)
    throw Error(ErrorCode::InvalidConfig, "segment is not parallel to the unstable direction");
  const double stretch = std::abs(sys.lambda_u);
  Rng rng(opt.seed);
  std::vector<Piece> pieces{{line, len}};
  bool resampled = false;
  double stretch_n = 1;
  std::vector<LineStats> out;
  out.push_back(summarize(pieces, 0, stretch_n, resampled, epsilons));
  for (int n = 1; n <= periods; ++n) {
    std::vector<Piece> next;
    for (const Piece& p : pieces) {
      const double full = stretch * p.seg.length();
      for (const Segment& mid : leg_pieces(sys.leg12, p.seg))
        for (const Segment& end : leg_pieces(sys.leg21, mid)) {
          const double l = end.length();
          if (l > 0) next.push_back({end, p.weight * l / full});
        }
    }
    pieces = std::move(next);
    stretch_n *= stretch;
    if (pieces.size() > opt.max_pieces) {
      resample(pieces, opt.max_pieces, rng);
      resampled = true;
    }
    out.push_back(summarize(pieces, n, stretch_n, resampled, epsilons));
  }
  return out;
}

GrowthConstant growth_constant_closed_form(double lambda_u, double L, double delta0) {
  if (!(L > 0 && delta0 > 0)) throw Error(ErrorCode::InvalidConfig, "L and delta0 must be positive");
  const double q = 32.0 / std::abs(lambda_u);
  if (!(q < 1)) return {std::numeric_limits<double>::infinity(), false};
  return {q * 2.0 * L / delta0 + 32.0 * L / (delta0 * (1.0 - q)), true};
}

WaitingTime waiting_time(double D, double lambda_u, double c_star, double L, double epsilon) {
  if (!(epsilon > 0 && epsilon < 1)) throw Error(ErrorCode::InvalidConfig, "epsilon must lie in (0, 1)");
  if (!(D > 0 && D < 1)) throw Error(ErrorCode::InvalidConfig, "good-line bound must lie in (0, 1)");
  if (!(std::abs(lambda_u) > 1)) throw Error(ErrorCode::NotHyperbolic, "waiting time needs |lambda_u| > 1");
  if (!(L > 0 && c_star >= 0 && std::isfinite(c_star)))
    throw Error(ErrorCode::InvalidConfig, "need L > 0 and a finite C* >= 0");
  WaitingTime w;
  const double x = std::log(0.25 * epsilon / L) / std::log(D);
  w.k = std::max(1L, static_cast<long>(std::floor(x)) + 1);
  const double target = 0.25 * epsilon / (c_star + L * L);
  const double log_lu = std::log(std::abs(lambda_u));
  for (w.l = 1;; ++w.l) {
    const double lhs = std::log(static_cast<double>(w.k) * w.l + 1.0) - 0.5 * w.l * log_lu;
    if (lhs < std::log(target)) break;
    if (w.l > 100000000) throw Error(ErrorCode::NoConvergence, "no admissible l");
  }
  w.N = w.k * w.l + 1;
  w.T = 2 * w.N;
  return w;
}

}  // namespace slitbilliard
