#include "slitbilliard/wall.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace slitbilliard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SingularHit: return "SingularHit";
    case ErrorCode::Grazing: return "Grazing";
    case ErrorCode::StencilCrossesSingularity: return "StencilCrossesSingularity";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::WrongChamberSign: return "WrongChamberSign";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotInStrip: return "NotInStrip";
    case ErrorCode::NearBranchBoundary: return "NearBranchBoundary";
    case ErrorCode::BranchMismatch: return "BranchMismatch";
    case ErrorCode::BelowValidity: return "BelowValidity";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotTrapping: return "NotTrapping";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

TrigSeries::TrigSeries(double constant, std::vector<Harmonic> cos_terms, std::vector<Harmonic> sin_terms)
    : constant_(constant), cos_(std::move(cos_terms)), sin_(std::move(sin_terms)) {
  validate_and_bound();
}

double TrigSeries::amplitude_sum() const {
  double s = 0.0;
  for (const auto& h : cos_) s += std::abs(h.amplitude);
  for (const auto& h : sin_) s += std::abs(h.amplitude);
  return s;
}

void TrigSeries::validate_and_bound() {
  constexpr double pi = std::numbers::pi;
  sup_rate_ = 0.0;
  sup_accel_ = 0.0;
  for (const auto* terms : {&cos_, &sin_}) {
    for (const auto& h : *terms) {
      if (h.k < 1) throw Error(ErrorCode::InvalidConfig, "harmonic index must be a positive integer");
      if (!std::isfinite(h.amplitude)) throw Error(ErrorCode::InvalidConfig, "non-finite amplitude");
      const double w = h.k * pi;
      sup_rate_ += std::abs(h.amplitude) * w;
      sup_accel_ += std::abs(h.amplitude) * w * w;
    }
  }
  if (!std::isfinite(constant_)) throw Error(ErrorCode::InvalidConfig, "non-finite constant");

  const double amp = amplitude_sum();
  if (constant_ - amp > 0.0 && constant_ + amp < 1.0) return;

  // The amplitude bound is not conclusive; fall back to the grid.
  constexpr int grid = 10000;
  for (int i = 0; i <= grid; ++i) {
    const double t = 2.0 * i / grid;
    const double f = eval(t).f;
    if (!(f > 0.0 && f < 1.0)) {
      std::ostringstream os;
      os << "wall height " << f << " at t=" << t << " leaves (0,1)";
      throw Error(ErrorCode::InvalidConfig, os.str());
    }
  }
}

TrigSeries TrigSeries::mirrored() const {
  auto neg = [](std::vector<Harmonic> v) {
    for (auto& h : v) h.amplitude = -h.amplitude;
    return v;
  };
  return TrigSeries(1.0 - constant_, neg(cos_), neg(sin_));
}

TrigSeries TrigSeries::shifted(double shift) const {
  // a cos(w(t+s)) = a cos(ws) cos(wt) - a sin(ws) sin(wt)
  // b sin(w(t+s)) = b cos(ws) sin(wt) + b sin(ws) cos(wt)
  std::map<int, std::pair<double, double>> coef;
  for (const auto& h : cos_) {
    const double w = h.k * std::numbers::pi;
    coef[h.k].first += h.amplitude * std::cos(w * shift);
    coef[h.k].second -= h.amplitude * std::sin(w * shift);
  }
  for (const auto& h : sin_) {
    const double w = h.k * std::numbers::pi;
    coef[h.k].first += h.amplitude * std::sin(w * shift);
    coef[h.k].second += h.amplitude * std::cos(w * shift);
  }
  std::vector<Harmonic> c, s;
  for (const auto& [k, ab] : coef) {
    c.push_back({k, ab.first});
    s.push_back({k, ab.second});
  }
  return TrigSeries(constant_, std::move(c), std::move(s));
}

TrigSeries TrigSeries::time_reversed() const {
  auto sin_terms = sin_;
  for (auto& h : sin_terms) h.amplitude = -h.amplitude;
  return TrigSeries(constant_, cos_, std::move(sin_terms));
}

SlitConfig::SlitConfig(TrigSeries left, TrigSeries right, double lambda, double x0)
    : left_(std::move(left)), right_(std::move(right)), lambda_(lambda), x0_(x0) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidConfig, "lambda must lie in (0,1)");
  if (!(x0 >= 0.0 && x0 < lambda)) throw Error(ErrorCode::InvalidConfig, "x0 must satisfy 0 <= x0 < lambda");
  t1_ = reduce_mod2(lambda - x0);
  t2_ = reduce_mod2(2.0 - lambda - x0);
  if (t1_ == t2_) throw Error(ErrorCode::InvalidConfig, "singular times coincide");
}

JumpData SlitConfig::jump_data(int i) const {
  if (i != 1 && i != 2) throw Error(ErrorCode::InvalidConfig, "jump index must be 1 or 2");
  JumpData j;
  j.index = i;
  j.t_star = t_star(i);
  const auto minus = wall_at(j.t_star, Side::LeftLimit);
  const auto plus = wall_at(j.t_star, Side::RightLimit);
  j.f_minus = minus.f;
  j.f_plus = plus.f;
  j.fdot_minus = minus.fd;
  j.fdot_plus = plus.fd;
  j.fddot_minus = minus.fdd;
  j.fddot_plus = plus.fdd;
  j.l_minus = 1.0 - j.f_minus;
  j.l_plus = 1.0 - j.f_plus;
  j.m_minus = -j.f_minus;
  j.m_plus = -j.f_plus;
  j.a = j.fdot_minus * (1.0 - j.f_plus) - j.fdot_plus * (1.0 - j.f_minus);
  j.a_prime = j.fdot_plus * j.f_minus - j.fdot_minus * j.f_plus;
  return j;
}

double SlitConfig::sup_rate() const { return std::max(left_.sup_rate(), right_.sup_rate()); }
double SlitConfig::sup_accel() const { return std::max(left_.sup_accel(), right_.sup_accel()); }

SlitConfig SlitConfig::mirrored() const { return SlitConfig(left_.mirrored(), right_.mirrored(), lambda_, x0_); }
SlitConfig SlitConfig::swapped() const { return SlitConfig(right_, left_, lambda_, x0_); }

SlitConfig SlitConfig::time_reversed() const {
  SlitConfig r;
  r.left_ = left_.time_reversed();
  r.right_ = right_.time_reversed();
  r.lambda_ = lambda_;
  r.x0_ = -x0_;
  r.t1_ = reduce_mod2(2.0 - t2_);
  r.t2_ = reduce_mod2(2.0 - t1_);
  return r;
}

namespace {

void append_series(std::ostringstream& os, const char* name, const TrigSeries& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.constant());
  os << name << ".constant=" << buf << ';';
  os << name << ".cos=";
  for (const auto& h : s.cos_terms()) {
    std::snprintf(buf, sizeof buf, "%d:%.17g,", h.k, h.amplitude);
    os << buf;
  }
  os << ';' << name << ".sin=";
  for (const auto& h : s.sin_terms()) {
    std::snprintf(buf, sizeof buf, "%d:%.17g,", h.k, h.amplitude);
    os << buf;
  }
  os << ';';
}

}  // namespace

std::string SlitConfig::canonical() const {
  std::ostringstream os;
  append_series(os, "left", left_);
  append_series(os, "right", right_);
  char buf[96];
  std::snprintf(buf, sizeof buf, "lambda=%.17g;x0=%.17g;", lambda_, x0_);
  os << buf;
  return os.str();
}

std::uint64_t SlitConfig::hash() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

SlitConfig example_config(double lambda, double x0) {
  return SlitConfig(TrigSeries(0.5, {{1, 0.3}}, {}), TrigSeries(0.5, {}, {{1, 0.3}}), lambda, x0);
}

SlitConfig elliptic_config(double a) {
  TrigSeries s(0.5, {{4, a}}, {});
  return SlitConfig(s, s, 0.5, 0.0);
}

}  // namespace slitbilliard
