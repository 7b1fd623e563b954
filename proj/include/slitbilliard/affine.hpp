#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "slitbilliard/normal_forms.hpp"

namespace slitbilliard {

/// Points are (tau, scaled action) on the first strip of the non-trapping
/// chamber ((rho, J) when that chamber is the lower one).
using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

Vec2 operator*(const Mat2& m, const Vec2& v);
Mat2 operator*(const Mat2& a, const Mat2& b);

/// One strip-to-strip leg of the limiting map:
///   x = {slope * I - tau}_2, u = ratio * (1 - x),
///   (tau, I) -> (1 + u, I / ratio + delta * u)   when lo < x < hi.
/// Points with x outside (lo, hi) jump into the trapping chamber.
struct AffineLeg {
  double ratio = 1;
  double slope = 0;
  double delta = 0;
  double lo = 0, hi = 2;

  /// x before the reduction mod 2.
  double phase(const Vec2& p) const { return slope * p[1] - p[0]; }
  bool survives(const Vec2& p) const;
  /// Index n of the window (lo + 2n, hi + 2n) holding the point.
  long window_index(const Vec2& p) const;
  /// Affine branch of window n; no survival check.
  Vec2 map(const Vec2& p, long window) const;
  std::optional<Vec2> step(const Vec2& p) const;
  Mat2 jacobian() const;
};

struct AffineSystem {
  /// The chamber whose strips carry the map (the non-trapping one).
  Chamber chamber = Chamber::Upper;
  /// Leg 12 crosses t_2^* and is cut by the A windows; leg 21 crosses t_1^*
  /// and is cut by the B windows.
  AffineLeg leg12, leg21;
  Mat2 dg12{}, dg21{}, dgu{};
  double trace = 2, det = 1;
  bool hyperbolic = false;
  /// Eigen-data of dgu; set only when hyperbolic (otherwise lambda_u =
  /// lambda_s = 1 and the vectors are zero). Unit vectors.
  double lambda_u = 1, lambda_s = 1;
  Vec2 e_u{}, e_s{};
  /// Longest chord of an A-box along e_u.
  double unstable_extent = 0;

  /// Point of A-box n with phase offset s in (lo, hi) and tau in (0, 2).
  Vec2 box_point(long n, double tau, double s) const;
  Vec2 box_centre(long n) const { return box_point(n, 1.0, 0.5 * (leg12.lo + leg12.hi)); }
};

/// Limiting map of the given chamber, from the constants of one
/// configuration.
AffineSystem build_affine(const NFConstants& k, Chamber chamber);
/// The chamber is the upper one unless the configuration traps in it.
AffineSystem build_affine(const SlitConfig& cfg);

enum class LineVisit { StayedGood, StayedBad };
enum class ExitLeg { AtT1, AtT2 };

std::string_view to_string(LineVisit v);
std::string_view to_string(ExitLeg e);

struct EscapeOutcome {
  /// Label of the unstable line through the point at the start of each
  /// period spent in an A-box.
  std::vector<LineVisit> itinerary;
  /// Period during which the point landed outside the windows; nullopt when
  /// it survived all N periods.
  std::optional<int> exit_period;
  std::optional<ExitLeg> exit_leg;
};

/// A segment of an unstable line: the endpoints of its current image.
struct Segment {
  Vec2 a{}, b{};
  double length() const;
};

/// Maximal chord along e_u through p inside its A-box. p must lie in an
/// A-box.
Segment unstable_chord(const AffineSystem& sys, const Vec2& p);

/// Pieces of a segment inside the survival windows of a leg, each mapped by
/// its affine branch.
std::vector<Segment> leg_pieces(const AffineLeg& leg, const Segment& s);

struct LineFate {
  /// Surviving components after one period (images in the first strip).
  std::vector<Segment> survivors;
  /// Surviving fraction of the line's length.
  double surviving_fraction = 0;
  /// Breaks into at least two surviving components.
  bool good = false;
};

/// One period of the line; the line must lie inside one A-box.
LineFate line_fate(const AffineSystem& sys, const Segment& line);

/// Applies leg 12 and leg 21 per period for up to N periods.
EscapeOutcome iterate(const AffineSystem& sys, const Vec2& point, int periods);

/// Fraction of points sampled uniformly in A-box `box` that are still in
/// the chamber after 0..periods periods. Throws NotHyperbolic.
std::vector<double> survival_curve(const AffineSystem& sys, long box, int samples, int periods, std::uint64_t seed,
                                   unsigned threads = 0);

/// Bound D = (1 + 2q) / (2 + q) on the surviving share of a good line,
/// q the window ratio of the jump at t_1^*.
double good_line_bound(double q);
double good_line_bound(const AffineSystem& sys);

struct GoodLineReport {
  int lines = 0;
  int good = 0;
  /// Largest surviving fraction over the good lines.
  double max_surviving = 0;
  double mean_surviving = 0;
};

/// Unstable chords through points sampled uniformly in A-box `box`.
GoodLineReport good_line_survey(const AffineSystem& sys, long box, int lines, std::uint64_t seed);

struct FragmentationOptions {
  /// Pieces kept per period; beyond it the population is resampled with
  /// weights proportional to the measure each piece carries.
  std::size_t max_pieces = 1 << 16;
  std::uint64_t seed = 1;
};

struct LineStats {
  int n = 0;
  /// Estimated when the population has been resampled.
  double piece_count = 0;
  bool resampled = false;
  /// Measure on the initial line of the points still in the chamber.
  double surviving_measure = 0;
  /// Measure of {r_n < eps} for each requested eps.
  std::vector<double> measure;
  /// Slope of the least-squares line through the origin of measure vs eps
  /// and its R^2.
  double c_hat = 0;
  double r_squared = 0;
  /// Quantiles 0.1, 0.5, 0.9 of r_n over the surviving measure.
  std::array<double, 3> r_quantiles{};
};

/// Iterates the line under the map, cutting it at the window boundaries,
/// for n = 0..periods. Throws NotHyperbolic.
std::vector<LineStats> line_fragmentation(const AffineSystem& sys, const Segment& line, int periods,
                                          const std::vector<double>& epsilons, const FragmentationOptions& opt = {});

struct GrowthConstant {
  double value = 0;
  /// False when |lambda_u| <= 32, where the single-step closed form does not
  /// apply.
  bool valid = false;
};

/// Closed-form growth constant for a single step of the map.
GrowthConstant growth_constant_closed_form(double lambda_u, double L, double delta0);

struct WaitingTime {
  long k = 0, l = 0, N = 0, T = 0;
};

/// Smallest k > log(eps / (4L)) / log D and smallest l with
/// (kl + 1) / lambda_u^(l/2) < eps / (4 (C* + L^2)); N = kl + 1, T = 2N.
WaitingTime waiting_time(double D, double lambda_u, double c_star, double L, double epsilon);

}  // namespace slitbilliard
