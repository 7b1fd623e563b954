#include "slitbilliard/harness/commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "slitbilliard/affine.hpp"
#include "slitbilliard/harness/acceptance.hpp"
#include "slitbilliard/version.hpp"

namespace slitbilliard::harness {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

/// Typed access to experiment.params. Every key must be read before the
/// command starts computing; finish() rejects the ones nobody asked for.
class Params {
 public:
  Params(const ParamMap& m, std::string command) : m_(m), command_(std::move(command)) {}

  double number(const std::string& key, double fallback, double lo, double hi) {
    used_.insert(key);
    const auto it = m_.find(key);
    if (it == m_.end()) return fallback;
    const double* x = std::get_if<double>(&it->second);
    if (!x) fail(key, "expected a number");
    if (!(*x >= lo && *x <= hi)) fail(key, "must lie in [" + format_double(lo) + ", " + format_double(hi) + "]");
    return *x;
  }

  long integer(const std::string& key, long fallback, long lo, long hi) {
    const double x = number(key, static_cast<double>(fallback), static_cast<double>(lo), static_cast<double>(hi));
    if (x != std::floor(x)) fail(key, "expected an integer");
    return static_cast<long>(x);
  }

  std::string word(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    used_.insert(key);
    const auto it = m_.find(key);
    if (it == m_.end()) return fallback;
    const std::string* w = std::get_if<std::string>(&it->second);
    if (!w) fail(key, "expected a word");
    if (std::find(allowed.begin(), allowed.end(), *w) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "must be one of " + list);
    }
    return *w;
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback, double lo, double hi,
                           std::size_t min_size = 1) {
    used_.insert(key);
    const auto it = m_.find(key);
    std::vector<double> xs = std::move(fallback);
    if (it != m_.end()) {
      if (const double* x = std::get_if<double>(&it->second)) xs = {*x};
      else if (const auto* v = std::get_if<std::vector<double>>(&it->second)) xs = *v;
      else fail(key, "expected a list of numbers");
    }
    if (xs.size() < min_size) fail(key, "needs at least " + std::to_string(min_size) + " entries");
    for (double x : xs) {
      if (!(x >= lo && x <= hi)) fail(key, "entries must lie in [" + format_double(lo) + ", " + format_double(hi) + "]");
    }
    return xs;
  }

  /// The raw entry, for parameters with several accepted shapes.
  const Param* raw(const std::string& key) {
    used_.insert(key);
    const auto it = m_.find(key);
    return it == m_.end() ? nullptr : &it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw Error(ErrorCode::InvalidConfig, command_ + ": experiment.params." + key + ": " + what);
  }

  void finish() const {
    for (const auto& [key, value] : m_) {
      if (!used_.count(key)) throw Error(ErrorCode::InvalidConfig, command_ + ": experiment.params." + key + ": unknown parameter");
    }
  }

 private:
  const ParamMap& m_;
  std::string command_;
  std::set<std::string> used_;
};

std::uint64_t seed_of(const ParsedConfig& pc) {
  if (!pc.spec.seed) throw Error(ErrorCode::InvalidConfig, pc.spec.command + ": experiment.seed is required");
  return *pc.spec.seed;
}

struct Csv {
  std::ostringstream os;

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((os << (first ? "" : ",") << cell(cells), first = false), ...);
    os << '\n';
  }

  static std::string cell(double x) { return format_double(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(std::size_t x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "true" : "false"; }
  static std::string cell(const char* x) { return x; }
  static std::string cell(std::string_view x) { return std::string(x); }
  static std::string cell(const std::string& x) { return x; }
};

std::string line(const std::string& name, bool pass, const std::string& detail) {
  return name + ": " + (pass ? "PASS" : "FAIL") + " (" + detail + ")";
}

Chamber chamber_of(const std::string& w) { return w == "upper" ? Chamber::Upper : Chamber::Lower; }

// ---------------------------------------------------------------- simulate

CommandOutput cmd_simulate(const ParsedConfig& pc, Params& p, const std::string& header) {
  const double t0 = p.number("t0", 0.25, 0, 2);
  const double v0 = p.number("v0", 1000, -1e9, 1e9);
  const std::string ch = p.word("chamber", "upper", {"upper", "lower"});
  const long collisions = p.integer("collisions", 1000, 1, 10000000);
  const long survey = p.integer("survey_samples", 0, 0, 10000000);
  const double vmin = p.number("survey_v_min", 1e2, 1e-3, 1e9);
  const double vmax = p.number("survey_v_max", 1e4, 1e-3, 1e9);
  const double residual_tol = p.number("residual_tol", 1e-10, 0, 1);
  const double det_tol = p.number("det_tol", 1e-6, 0, 1);
  p.finish();
  if (t0 >= 2) p.fail("t0", "must lie in [0, 2)");
  if (vmax < vmin) p.fail("survey_v_max", "must be at least survey_v_min");
  const Chamber chamber = chamber_of(ch);
  const double rel = v0 - pc.cfg.wall_at(t0, Side::RightLimit).fd;
  if (chamber == Chamber::Upper ? !(rel > 0) : !(rel < 0)) {
    p.fail("v0", "must leave the slit into the " + ch + " chamber (sign of v0 - f'(t0))");
  }
  const std::uint64_t seed = survey > 0 ? seed_of(pc) : 0;

  CommandOutput out;
  const Trajectory traj = simulate(pc.cfg, slit_record(pc.cfg, t0, v0, chamber), static_cast<int>(collisions), pc.spec.tol);
  out.files.push_back({"trajectory.csv", header + artifact_body(trajectory_csv(pc.cfg, traj, pc.spec.tol))});
  out.numeric_failure = traj.status != TrajectoryStatus::Running;
  out.summary.push_back("simulate: " + std::to_string(traj.records.size()) + " slit collisions, status " +
                        std::string(to_string(traj.status)));
  if (survey > 0) {
    const RelationSurvey s = relation_survey(pc.cfg, static_cast<int>(survey), vmin, vmax, seed, pc.spec.threads, pc.spec.tol);
    Csv csv;
    csv.row("quantity", "value");
    for (int r = 0; r < 6; ++r) csv.row(to_string(static_cast<Relation>(r)), s.counts[r]);
    csv.row("excluded", s.excluded);
    csv.row("max_residual", s.max_residual);
    csv.row("max_det_error", s.max_det_error);
    out.files.push_back({"relation_survey.csv", header + csv.os.str()});
    const bool ok = s.max_residual < residual_tol && s.max_det_error < det_tol;
    out.pass = ok;
    out.summary.push_back(line("relation residuals", ok,
                               "max residual " + fmt("%.3g", s.max_residual) + ", max |det-1| " +
                                   fmt("%.3g", s.max_det_error) + ", excluded " + std::to_string(s.excluded)));
  }
  return out;
}

// ------------------------------------------------------------------- atlas

CommandOutput cmd_atlas(const ParsedConfig& pc, Params& p, const std::string& header) {
  const long n = p.integer("n", 200, 2, 4000);
  const std::string check = p.word("check", "auto", {"auto", "example", "none"});
  p.finish();
  const std::vector<double> grid = cell_centres(static_cast<int>(n));
  const std::vector<AtlasRow> rows = scan(pc.cfg.left(), pc.cfg.right(), grid, grid, pc.spec.threads);
  Csv csv;
  csv.row("lambda", "x0", "kind", "tr", "hyperbolic");
  std::map<TrapKind, int> counts;
  for (const auto& r : rows) {
    csv.row(r.lambda, r.x0, to_string(r.kind), r.tr ? format_double(*r.tr) : std::string(), r.hyperbolic);
    ++counts[r.kind];
  }
  CommandOutput out;
  out.files.push_back({"atlas.csv", header + csv.os.str()});
  std::string tally;
  for (const auto& [k, c] : counts) tally += (tally.empty() ? "" : ", ") + std::string(to_string(k)) + " " + std::to_string(c);
  out.summary.push_back("atlas: " + std::to_string(rows.size()) + " nodes (" + tally + ")");
  const SlitConfig ex = example_config(0.5, 0.0);
  const bool is_example = pc.cfg.left() == ex.left() && pc.cfg.right() == ex.right();
  if (check == "example" && !is_example) p.fail("check", "the example check needs the built-in example walls");
  if (check == "example" || (check == "auto" && is_example)) {
    const AtlasCheck c = check_example_atlas(rows, static_cast<int>(n));
    out.pass = c.pass();
    out.summary.push_back(line("atlas boundaries", c.pass(),
                               std::to_string(c.edges) + " kind changes on the lines, stray " + std::to_string(c.stray_edges) + ", missed " +
                                   std::to_string(c.missed_edges) + ", hyperbolic " + std::to_string(c.hyperbolic) +
                                   " (outside trapping " + std::to_string(c.hyperbolic_outside) + ")"));
  }
  return out;
}

// -------------------------------------------------------------------- rate

CommandOutput cmd_rate(const ParsedConfig& pc, Params& p, const std::string& header) {
  const std::string mode = p.word("mode", "all", {"all", "growth", "contraction", "oscillation"});
  Ensemble ens;
  ens.count = static_cast<int>(p.integer("count", 1000, 1, 10000000));
  ens.v_min = p.number("v_min", 1e3, 1, 1e9);
  ens.v_max = p.number("v_max", 1e3 + 1, 1, 1e9);
  const long periods = p.integer("periods", 30, 1, 100000);
  const long discard = p.integer("discard", 3, 0, 100000);
  const long contraction_periods = p.integer("contraction_periods", 30, 1, 100000);
  const double min_action = p.number("min_action", 20, 0, 1e12);
  const long osc_periods = p.integer("oscillation_periods", 100, 1, 100000);
  const double high = p.number("high", 10, 1, 1e12);
  const double low = p.number("low", 0.5, 0, 1);
  const double growth_tol = p.number("growth_tol", 0.05, 0, 10);
  const double contraction_tol = p.number("contraction_tol", 0.10, 0, 10);
  HybridOptions hyb;
  hyb.tol = pc.spec.tol;
  hyb.margin = static_cast<int>(p.integer("margin", 2, 1, 1000));
  hyb.strip_action = p.number("strip_action", 1e12, 1e3, std::numeric_limits<double>::infinity());
  p.finish();
  if (ens.v_max < ens.v_min) p.fail("v_max", "must be at least v_min");
  if (periods < discard + 2) p.fail("periods", "must exceed discard by at least two");
  ens.seed = seed_of(pc);

  const TrappingVerdict verdict = classify(pc.cfg);
  const GrowthPrediction pred = predicted_rate(pc.cfg, verdict);
  const unsigned threads = pc.spec.threads;
  CommandOutput out;
  Csv csv;
  csv.row("metric", "measured", "predicted", "rel_error", "ci_half_width", "used", "excluded", "pass");

  if (mode == "all" || mode == "growth") {
    const RateReport r = measure_rate(pc.cfg, ens, static_cast<int>(periods), hyb, threads);
    const double target = std::log(pred.rate);
    const double rel = std::abs(r.slope - target) / std::abs(target);
    const bool ok = rel <= growth_tol;
    csv.row("growth", r.slope, target, rel, r.ci_half_width, r.used, r.excluded + r.escaped, ok);
    Csv g;
    g.row("period", "mean_log_speed");
    for (std::size_t k = 0; k < r.mean_log_speed.size(); ++k) g.row(k, r.mean_log_speed[k]);
    out.files.push_back({"growth.csv", header + g.os.str()});
    out.pass = out.pass && ok;
    out.summary.push_back(line("growth", ok,
                               "slope " + fmt("%.5f", r.slope) + " vs log " + fmt("%.4f", pred.rate) + " = " +
                                   fmt("%.5f", target) + ", rel " + fmt("%.4f", rel) + ", used " + std::to_string(r.used) +
                                   ", dropped " + std::to_string(r.excluded + r.escaped)));
  }
  if (mode == "all" || mode == "contraction") {
    const ResidentReport r = measure_contraction(pc.cfg, ens, static_cast<int>(contraction_periods), min_action, hyb, threads);
    const double target = std::log(pred.contraction);
    const double rel = std::abs(r.mean_log_change - target) / std::abs(target);
    const bool ok = rel <= contraction_tol;
    csv.row("contraction", r.mean_log_change, target, rel, r.ci_half_width, r.transitions, r.excluded, ok);
    out.pass = out.pass && ok;
    out.summary.push_back(line("contraction", ok,
                               "mean " + fmt("%.5f", r.mean_log_change) + " vs log " + fmt("%.4f", pred.contraction) +
                                   " = " + fmt("%.5f", target) + ", rel " + fmt("%.4f", rel) + ", periods " +
                                   std::to_string(r.transitions)));
  }
  if (mode == "all" || mode == "oscillation") {
    const OscillationReport r = oscillation_check(pc.cfg, ens, static_cast<int>(osc_periods), high, low, hyb, threads);
    const bool ok = r.events == 0;
    csv.row("oscillation_events", r.events, 0.0, 0.0, 0.0, r.orbits - r.excluded, r.excluded, ok);
    out.pass = out.pass && ok;
    out.summary.push_back(line("oscillation", ok,
                               std::to_string(r.events) + " events in " + std::to_string(r.orbits - r.excluded) +
                                   " orbits, " + std::to_string(r.reached_high) + " exceeded " + format_double(high) +
                                   "|v0|, " + std::to_string(r.trapped) + " trapped"));
  }
  out.files.insert(out.files.begin(), {"rate.csv", header + csv.os.str()});
  return out;
}

// ---------------------------------------------------------------- nf-check

struct BranchTask {
  Leg leg;
  Branch branch;
};

CommandOutput cmd_nf_check(const ParsedConfig& pc, Params& p, const std::string& header) {
  const double a_min = p.number("action_min", 1e2, 1, 1e12);
  const double a_max = p.number("action_max", 1e4, 1, 1e12);
  const long points = p.integer("points", 9, 2, 1000);
  const long per_decade = p.integer("samples_per_decade", 500, 0, 10000000);
  const std::string legs = p.word("legs", "both", {"both", "12", "21"});
  const std::string which = p.word("branches", "reachable",
                                   {"reachable", "UU", "UL_I", "UL_II", "LL", "LU_I", "LU_II"});
  const double gh_target = p.number("gh_slope", -2, -10, 10);
  const double gh_tol = p.number("gh_tol", 0.4, 0, 10);
  const double g_target = p.number("g_slope", -1, -10, 10);
  const double g_tol = p.number("g_tol", 0.3, 0, 10);
  p.finish();
  if (a_max < 100 * a_min) p.fail("action_max", "the actions must span at least two decades");
  if (per_decade == 0) throw Error(ErrorCode::InsufficientSamples, "nf-check: samples_per_decade is zero");
  const std::uint64_t seed = seed_of(pc);
  const double decades = std::log10(a_max / a_min);
  const int per_action = static_cast<int>(std::ceil(static_cast<double>(per_decade) * decades / static_cast<double>(points)));

  std::vector<double> actions;
  for (long i = 0; i < points; ++i) {
    actions.push_back(a_min * std::pow(a_max / a_min, static_cast<double>(i) / static_cast<double>(points - 1)));
  }

  const NormalForms nf(pc.cfg);
  std::vector<BranchTask> tasks;
  for (Leg leg : {Leg::L12, Leg::L21}) {
    if (legs == "12" && leg != Leg::L12) continue;
    if (legs == "21" && leg != Leg::L21) continue;
    for (int b = 0; b < 6; ++b) {
      const Branch br = static_cast<Branch>(b);
      if (which != "reachable" && which != to_string(br)) continue;
      const auto w = nf.window(br, leg);
      if (which == "reachable" && !(w[1] > w[0])) continue;
      tasks.push_back({leg, br});
    }
  }
  if (tasks.empty()) throw Error(ErrorCode::InsufficientSamples, "nf-check: no branch window is open");

  CommandOutput out;
  Csv csv;
  csv.row("leg", "branch", "action", "samples", "excluded", "mismatched", "median_error_g", "median_error_gh");
  Csv slopes;
  slopes.row("leg", "branch", "slope_g", "slope_gh", "pass");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const ScalingReport rep = error_scaling(nf, t.leg, t.branch, actions, per_action, seed + i, pc.spec.threads);
    for (const auto& r : rep.rows) {
      csv.row(to_string(t.leg), to_string(t.branch), r.action, r.samples, r.excluded, r.mismatched, r.median_error_g,
              r.median_error_gh);
    }
    const bool ok = std::abs(rep.slope_gh - gh_target) <= gh_tol && std::abs(rep.slope_g - g_target) <= g_tol;
    slopes.row(to_string(t.leg), to_string(t.branch), rep.slope_g, rep.slope_gh, ok);
    out.pass = out.pass && ok;
    out.summary.push_back(line("nf " + std::string(to_string(t.leg)) + " " + std::string(to_string(t.branch)), ok,
                               "G slope " + fmt("%.3f", rep.slope_g) + ", G+H slope " + fmt("%.3f", rep.slope_gh)));
  }
  out.files.push_back({"nf_scaling.csv", header + csv.os.str()});
  out.files.push_back({"nf_slopes.csv", header + slopes.os.str()});
  return out;
}

// --------------------------------------------------- escape, waiting-time

struct EscapeInputs {
  long box = 0;
  long frag_periods = 10;
  std::vector<double> frag_eps;
  std::size_t max_pieces = 1 << 16;
  double L = 0, delta0 = 0;
  std::vector<double> epsilons;
};

EscapeInputs escape_inputs(Params& p) {
  EscapeInputs in;
  in.box = p.integer("box", 0, -1000000, 1000000);
  in.epsilons = p.list("epsilons", {0.2, 0.1, 0.05}, 1e-12, 1);
  in.frag_periods = p.integer("fragmentation_periods", 10, 0, 60);
  in.frag_eps = p.list("fragmentation_epsilons", {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2}, 1e-15, 1, 2);
  in.max_pieces = static_cast<std::size_t>(p.integer("max_pieces", 1 << 16, 16, 1 << 24));
  in.L = p.number("L", 0, 0, 1e6);
  in.delta0 = p.number("delta0", 0, 0, 1e6);
  return in;
}

struct EscapeModel {
  AffineSystem sys;
  double D = 0, L = 0, delta0 = 0;
  std::vector<LineStats> frag;
  double c_fit = 0;
  GrowthConstant closed;
};

EscapeModel escape_model(const ParsedConfig& pc, const EscapeInputs& in, std::uint64_t seed, bool fragment) {
  EscapeModel m;
  m.sys = build_affine(pc.cfg);
  if (!m.sys.hyperbolic) {
    throw Error(ErrorCode::NotHyperbolic, "|trace| = " + fmt("%.6g", std::abs(m.sys.trace)) + " is not above 2");
  }
  m.D = good_line_bound(m.sys);
  m.L = in.L > 0 ? in.L : m.sys.unstable_extent;
  m.delta0 = in.delta0 > 0 ? in.delta0 : m.L;
  m.closed = growth_constant_closed_form(m.sys.lambda_u, m.L, m.delta0);
  if (fragment) {
    const Segment chord = unstable_chord(m.sys, m.sys.box_centre(in.box));
    m.frag = line_fragmentation(m.sys, chord, static_cast<int>(in.frag_periods), in.frag_eps, {in.max_pieces, seed});
    for (const auto& s : m.frag) m.c_fit = std::max(m.c_fit, s.c_hat);
  }
  return m;
}

std::string fragmentation_csv(const EscapeModel& m, const std::vector<double>& eps) {
  Csv csv;
  csv.row("n", "epsilon", "measure", "piece_count", "resampled", "surviving_measure", "c_hat", "r_squared");
  for (const auto& s : m.frag) {
    for (std::size_t e = 0; e < eps.size(); ++e) {
      csv.row(s.n, eps[e], s.measure[e], s.piece_count, s.resampled, s.surviving_measure, s.c_hat, s.r_squared);
    }
  }
  return csv.os.str();
}

Json waiting_json(const EscapeModel& m, double c_star, const std::string& c_source,
                  const std::vector<std::pair<double, WaitingTime>>& rows) {
  Json j;
  j["trace"] = m.sys.trace;
  j["lambda_u"] = m.sys.lambda_u;
  j["D"] = m.D;
  j["L"] = m.L;
  j["delta0"] = m.delta0;
  j["c_star"] = c_star;
  j["c_star_source"] = c_source;
  j["c_star_closed_form"] = m.closed.value;
  j["c_star_closed_form_valid"] = m.closed.valid;
  j["c_star_fitted"] = m.c_fit;
  Json list = Json::array();
  for (const auto& [eps, w] : rows) list.push_back({{"epsilon", eps}, {"k", w.k}, {"l", w.l}, {"N", w.N}, {"T", w.T}});
  j["waiting_times"] = list;
  return j;
}

/// Normalised fragmentation slope c_hat / surviving measure; its relative
/// spread over n >= 1 measures the stability of the fitted slope.
double slope_spread(const std::vector<LineStats>& frag) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0, sum = 0;
  int count = 0;
  for (const auto& s : frag) {
    if (s.n == 0 || !(s.surviving_measure > 0)) continue;
    const double r = s.c_hat / s.surviving_measure;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
    ++count;
  }
  if (count == 0) return 0;
  return (hi - lo) / (sum / count);
}

CommandOutput cmd_escape(const ParsedConfig& pc, Params& p, const std::string& header) {
  const EscapeInputs in = escape_inputs(p);
  const long samples = p.integer("samples", 100000, 0, 100000000);
  const long replicas = p.integer("replicas", 3, 1, 1000);
  const long lines = p.integer("lines", 20000, 0, 100000000);
  const double good_margin = p.number("good_margin", 0.01, 0, 1);
  const double r2_min = p.number("r_squared_min", 0.95, 0, 1);
  const double spread_max = p.number("slope_spread_max", 0.25, 0, 100);
  p.finish();
  if (samples == 0) throw Error(ErrorCode::InsufficientSamples, "escape: samples is zero");
  const std::uint64_t seed = seed_of(pc);

  const EscapeModel m = escape_model(pc, in, seed, true);
  const double c_star = m.c_fit;
  std::vector<std::pair<double, WaitingTime>> waits;
  long horizon = 0;
  for (double eps : in.epsilons) {
    waits.push_back({eps, waiting_time(m.D, m.sys.lambda_u, c_star, m.L, eps)});
    horizon = std::max(horizon, waits.back().second.N);
  }

  CommandOutput out;
  Csv surv;
  surv.row("seed", "period", "surviving_fraction", "samples");
  bool survival_ok = true;
  std::string survival_detail;
  for (long r = 0; r < replicas; ++r) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(r);
    const std::vector<double> curve =
        survival_curve(m.sys, in.box, static_cast<int>(samples), static_cast<int>(horizon), s, pc.spec.threads);
    for (std::size_t k = 0; k < curve.size(); ++k) surv.row(static_cast<long>(s), k, curve[k], samples);
    for (const auto& [eps, w] : waits) {
      const double frac = curve[static_cast<std::size_t>(w.N)];
      survival_ok = survival_ok && frac < eps;
      if (r == 0) survival_detail += (survival_detail.empty() ? "" : "; ") + ("eps " + format_double(eps) + " N " +
                                     std::to_string(w.N) + " survival " + fmt("%.3g", frac));
    }
  }
  out.files.push_back({"survival.csv", header + surv.os.str()});
  out.summary.push_back(line("survival", survival_ok, survival_detail + " (first seed of " + std::to_string(replicas) + ")"));

  if (lines > 0) {
    const GoodLineReport g = good_line_survey(m.sys, in.box, static_cast<int>(lines), seed);
    const bool ok = g.good > 0 && g.max_surviving <= m.D + good_margin;
    out.pass = out.pass && ok;
    out.summary.push_back(line("good lines", ok,
                               std::to_string(g.good) + " of " + std::to_string(g.lines) + " good, max surviving " +
                                   fmt("%.4f", g.max_surviving) + ", mean " + fmt("%.4f", g.mean_surviving) +
                                   ", D " + fmt("%.4f", m.D)));
  }

  double r2 = 1;
  for (const auto& s : m.frag) {
    if (s.n > 0) r2 = std::min(r2, s.r_squared);
  }
  const double spread = slope_spread(m.frag);
  const bool frag_ok = r2 > r2_min && spread <= spread_max && std::isfinite(m.c_fit);
  out.files.push_back({"fragmentation.csv", header + fragmentation_csv(m, in.frag_eps)});
  out.summary.push_back(line("fragmentation", frag_ok,
                             "min R^2 " + fmt("%.5f", r2) + " over n <= " + std::to_string(in.frag_periods) +
                                 ", normalised slope spread " + fmt("%.3f", spread) + ", C* fitted " +
                                 fmt("%.4g", m.c_fit)));
  out.files.push_back({"waiting_time.json", waiting_json(m, c_star, "fitted", waits).dump(2) + "\n"});
  out.pass = out.pass && survival_ok && frag_ok;
  return out;
}

CommandOutput cmd_waiting_time(const ParsedConfig& pc, Params& p, const std::string&) {
  const EscapeInputs in = escape_inputs(p);
  const Param* c = p.raw("c_star");
  p.finish();
  double c_given = 0;
  std::string source = "fitted";
  if (c) {
    if (const double* x = std::get_if<double>(c)) {
      if (!(*x > 0 && std::isfinite(*x))) p.fail("c_star", "must be positive");
      c_given = *x;
      source = "given";
    } else if (const std::string* w = std::get_if<std::string>(c); w && (*w == "fitted" || *w == "closed_form")) {
      source = *w;
    } else {
      p.fail("c_star", "must be fitted, closed_form or a positive number");
    }
  }
  const bool fitted = source == "fitted";
  const std::uint64_t seed = fitted ? seed_of(pc) : 0;
  const EscapeModel m = escape_model(pc, in, seed, fitted);
  double c_star = c_given;
  if (fitted) c_star = m.c_fit;
  if (source == "closed_form") {
    if (!m.closed.valid) {
      throw Error(ErrorCode::InvalidConfig, "waiting-time: closed-form C* needs |lambda_u| > 32, got " +
                                                fmt("%.4g", std::abs(m.sys.lambda_u)));
    }
    c_star = m.closed.value;
  }
  std::vector<std::pair<double, WaitingTime>> waits;
  CommandOutput out;
  for (double eps : in.epsilons) {
    const WaitingTime w = waiting_time(m.D, m.sys.lambda_u, c_star, m.L, eps);
    waits.push_back({eps, w});
    out.summary.push_back("waiting-time: eps " + format_double(eps) + " k " + std::to_string(w.k) + " l " +
                          std::to_string(w.l) + " N " + std::to_string(w.N) + " T " + std::to_string(w.T));
  }
  out.files.push_back({"waiting_time.json", waiting_json(m, c_star, source, waits).dump(2) + "\n"});
  return out;
}

// ---------------------------------------------------------- periodic-orbit

/// a when the config is 0.5 + a cos(4 pi t) on both slits with lambda = 0.5
/// and x0 = 0.
std::optional<double> elliptic_amplitude(const SlitConfig& cfg) {
  const TrigSeries& s = cfg.left();
  if (!(s == cfg.right()) || s.constant() != 0.5 || !s.sin_terms().empty() || s.cos_terms().size() != 1 ||
      s.cos_terms()[0].k != 4 || cfg.lambda() != 0.5 || cfg.x0() != 0) {
    return std::nullopt;
  }
  return s.cos_terms()[0].amplitude;
}

CommandOutput cmd_periodic_orbit(const ParsedConfig& pc, Params& p, const std::string& header) {
  std::vector<double> amps;
  if (p.raw("amplitudes")) {
    amps = p.list("amplitudes", {}, 1e-6, 0.2);
  } else if (auto a = elliptic_amplitude(pc.cfg)) {
    amps = {*a};
  }
  const double closure_tol = p.number("closure_tol", 1e-9, 0, 1);
  const double trace_tol = p.number("trace_tol", 1e-4, 0, 1);
  p.finish();
  if (amps.empty()) {
    throw Error(ErrorCode::InvalidConfig,
                "periodic-orbit: the config is not 0.5 + a cos(4 pi t) on both slits with lambda 0.5, x0 0; "
                "give experiment.params.amplitudes instead");
  }
  for (double a : amps) {
    if (!(a > 0 && a < 0.2)) p.fail("amplitudes", "entries must lie in (0, 0.2)");
  }
  CommandOutput out;
  Csv csv;
  csv.row("a", "closure_residual", "trace", "predicted_trace", "trace_error", "trace_period", "pass");
  for (double a : amps) {
    const PeriodicOrbitCheck c = elliptic_orbit_check(a, pc.spec.tol);
    const double err = std::abs(c.trace - c.predicted_trace);
    const bool ok = c.closure_residual < closure_tol && err < trace_tol && std::abs(c.trace) < 2;
    csv.row(a, c.closure_residual, c.trace, c.predicted_trace, err, c.trace_period, ok);
    out.pass = out.pass && ok;
    out.summary.push_back(line("periodic orbit a=" + format_double(a), ok,
                               "closure " + fmt("%.2e", c.closure_residual) + ", trace " + fmt("%.10f", c.trace) +
                                   " vs " + fmt("%.10f", c.predicted_trace) + ", period-4 trace " +
                                   fmt("%.8f", c.trace_period)));
  }
  out.files.push_back({"periodic_orbit.csv", header + csv.os.str()});
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate", "atlas",        "rate",          "nf-check",
                                                 "escape",   "waiting-time", "periodic-orbit", "acceptance"};
  return names;
}

bool needs_seed(const ExperimentSpec& spec) {
  const std::string& c = spec.command;
  if (c == "rate" || c == "nf-check" || c == "escape" || c == "acceptance") return true;
  if (c == "simulate") {
    const auto it = spec.params.find("survey_samples");
    const double* x = it == spec.params.end() ? nullptr : std::get_if<double>(&it->second);
    return x && *x > 0;
  }
  if (c == "waiting-time") {
    const auto it = spec.params.find("c_star");
    if (it == spec.params.end()) return true;
    const std::string* w = std::get_if<std::string>(&it->second);
    return w && *w == "fitted";
  }
  return false;
}

std::string artifact_header(const ParsedConfig& pc, const RunOptions& opt) {
  ParsedConfig norm = pc;
  norm.spec.threads = 0;
  norm.spec.out.clear();
  const SolverTolerances& t = pc.spec.tol;
  std::ostringstream os;
  os << "# slitbilliard " << kVersion << "\n";
  os << "# command=" << pc.spec.command << " config_hash=" << hex(pc.cfg.hash())
     << " spec_hash=" << hex(fnv1a(serialize(norm)))
     << " seed=" << (pc.spec.seed ? std::to_string(*pc.spec.seed) : std::string("none")) << "\n";
  os << "# tolerances grazing=" << format_double(t.grazing) << " singular=" << format_double(t.singular)
     << " edge=" << format_double(t.edge) << " max_root_iterations=" << t.max_root_iterations << "\n";
  if (opt.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# created=" << buf << "\n";
  }
  return os.str();
}

std::string artifact_body(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) return {};
    pos = nl + 1;
  }
  return text.substr(pos);
}

int exit_code_for(const Error& e) { return e.numeric() ? kNumeric : kUsage; }

AtlasCheck check_example_atlas(const std::vector<AtlasRow>& rows, int n) {
  std::vector<int> index(static_cast<std::size_t>(n) * n, -1);
  auto cell = [&](double x) { return static_cast<int>(std::floor(x * n)); };
  for (std::size_t r = 0; r < rows.size(); ++r) {
    index[static_cast<std::size_t>(cell(rows[r].lambda)) * n + cell(rows[r].x0)] = static_cast<int>(r);
  }
  auto trapping = [](TrapKind k) { return k == TrapKind::LowerTrapping || k == TrapKind::UpperTrapping; };
  AtlasCheck c;
  for (const auto& r : rows) {
    if (!r.hyperbolic) continue;
    ++c.hyperbolic;
    if (!trapping(r.kind)) ++c.hyperbolic_outside;
  }
  const double h = 1.0 / n;
  // f_L - f_R = 0.3 sqrt(2) cos(pi t + pi/4) vanishes at t = 1/4 and 5/4:
  // t_1^* = 1/4 gives lambda - x0 = 1/4, t_2^* = 5/4 gives lambda + x0 = 3/4
  // and t_2^* = 1/4 gives lambda + x0 = 7/4 (the corner lambda, x0 near 1).
  const std::array<std::pair<double, double>, 3> lines{{{-1.0, 0.25}, {1.0, 0.75}, {1.0, 1.75}}};
  auto g = [&](std::size_t k, double l, double x) { return l + lines[k].first * x - lines[k].second; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int a = index[static_cast<std::size_t>(i) * n + j];
      if (a < 0) continue;
      for (const auto& [di, dj] : {std::pair{1, 0}, std::pair{0, 1}}) {
        if (i + di >= n || j + dj >= n) continue;
        const int b = index[static_cast<std::size_t>(i + di) * n + j + dj];
        if (b < 0) continue;
        const AtlasRow& ra = rows[a];
        const AtlasRow& rb = rows[b];
        const double ml = 0.5 * (ra.lambda + rb.lambda), mx = 0.5 * (ra.x0 + rb.x0);
        bool straddle = false, near = false;
        for (std::size_t k = 0; k < lines.size(); ++k) {
          straddle = straddle || g(k, ra.lambda, ra.x0) * g(k, rb.lambda, rb.x0) < 0;
          near = near || std::abs(g(k, ml, mx)) <= h;
        }
        if (ra.kind != rb.kind) {
          if (near) ++c.edges;
          else ++c.stray_edges;
        }
        // Centres lying on a line are Degenerate on both sides of a corner.
        const bool degenerate = ra.kind == TrapKind::Degenerate || rb.kind == TrapKind::Degenerate;
        if (ra.kind == rb.kind && straddle && !degenerate) ++c.missed_edges;
      }
    }
  }
  return c;
}

CommandOutput execute(const ParsedConfig& pc, const RunOptions& opt) {
  const std::string& cmd = pc.spec.command;
  if (cmd.empty()) throw Error(ErrorCode::InvalidConfig, "experiment.command is missing");
  if (cmd == "acceptance") throw Error(ErrorCode::InvalidConfig, "acceptance is run through run_acceptance");
  Params p(pc.spec.params, cmd);
  const std::string header = artifact_header(pc, opt);
  if (cmd == "simulate") return cmd_simulate(pc, p, header);
  if (cmd == "atlas") return cmd_atlas(pc, p, header);
  if (cmd == "rate") return cmd_rate(pc, p, header);
  if (cmd == "nf-check") return cmd_nf_check(pc, p, header);
  if (cmd == "escape") return cmd_escape(pc, p, header);
  if (cmd == "waiting-time") return cmd_waiting_time(pc, p, header);
  if (cmd == "periodic-orbit") return cmd_periodic_orbit(pc, p, header);
  std::string list;
  for (const auto& c : command_names()) list += (list.empty() ? "" : ", ") + c;
  throw Error(ErrorCode::InvalidConfig, "experiment.command: unknown command '" + cmd + "' (expected one of " + list + ")");
}

RunResult run(const ParsedConfig& pc, const RunOptions& opt) {
  if (pc.spec.command == "acceptance") return run_acceptance(pc, opt);
  RunResult res;
  try {
    CommandOutput out = execute(pc, opt);
    res.summary = std::move(out.summary);
    const std::filesystem::path dir(pc.spec.out.empty() ? "." : pc.spec.out);
    std::filesystem::create_directories(dir);
    for (const auto& f : out.files) {
      const std::filesystem::path path = dir / f.name;
      std::ofstream os(path, std::ios::binary);
      os << f.text;
      if (!os) throw Error(ErrorCode::InvalidConfig, "cannot write " + path.string());
      res.files.push_back(path.string());
    }
    res.exit_code = out.numeric_failure ? kNumeric : out.pass ? kPass : kFail;
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e);
    res.summary = {std::string("error: ") + e.what()};
  } catch (const std::filesystem::filesystem_error& e) {
    res.exit_code = kUsage;
    res.summary = {std::string("error: ") + e.what()};
  }
  return res;
}

}  // namespace slitbilliard::harness
