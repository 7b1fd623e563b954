#include "slitbilliard/harness/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "slitbilliard/action_angle.hpp"
#include "slitbilliard/affine.hpp"
#include "slitbilliard/normal_forms.hpp"
#include "slitbilliard/version.hpp"

namespace slitbilliard::harness {

namespace {

namespace fs = std::filesystem;

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

const char* kNames[kCriteria] = {
    "exact-map residuals", "elliptic orbit",       "adiabatic scaling", "normal-form scaling",
    "trace and determinant", "atlas boundaries",   "growth rates",      "escape statistics",
    "oscillation",           "reproducibility",
};

struct Outcome {
  bool pass = true;
  std::string detail;

  void add(bool ok, const std::string& text) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + text;
  }
};

/// Runs a command in memory and folds its summary into the outcome.
void add_command(Outcome& o, const ParsedConfig& pc, const std::string& tag) {
  const CommandOutput out = execute(pc);
  std::string text;
  for (const auto& s : out.summary) {
    if (s.find(": PASS") == std::string::npos && s.find(": FAIL") == std::string::npos) continue;
    text += (text.empty() ? "" : ", ") + s;
  }
  o.add(out.pass && !out.numeric_failure, tag.empty() ? text : tag + " " + text);
}

Outcome c1_residuals(const AcceptanceOptions& opt) {
  Outcome o;
  std::array<int, 6> counts{};
  double residual = 0, det = 0;
  int excluded = 0;
  // At high energy each trapping configuration realises only one crossing
  // direction, so one node of each kind covers all six relations.
  int node = 0;
  for (const auto& [lambda, x0] : {std::pair{0.6, 0.1}, std::pair{0.5, 0.4}}) {
    const RelationSurvey s = relation_survey(example_config(lambda, x0), 5000, 1e2, 1e4, opt.seed + node++, opt.threads);
    for (int r = 0; r < 6; ++r) counts[r] += s.counts[r];
    residual = std::max(residual, s.max_residual);
    det = std::max(det, s.max_det_error);
    excluded += s.excluded;
  }
  int missing = 0;
  std::string tally;
  for (int r = 0; r < 6; ++r) {
    missing += counts[r] == 0;
    tally += (tally.empty() ? "" : " ") + std::to_string(counts[r]);
  }
  o.add(residual < 1e-10, "max residual " + fmt("%.3g", residual));
  o.add(det < 1e-6, "max |det-1| " + fmt("%.3g", det));
  o.add(missing == 0, "relation counts " + tally + ", excluded " + std::to_string(excluded));
  return o;
}

Outcome c2_elliptic(const AcceptanceOptions& opt) {
  ParsedConfig pc{elliptic_config(0.01), {}};
  pc.spec.command = "periodic-orbit";
  pc.spec.threads = opt.threads;
  pc.spec.params["amplitudes"] = std::vector<double>{0.01, 0.02};
  Outcome o;
  add_command(o, pc, "");
  return o;
}

Outcome c3_drift(const AcceptanceOptions&) {
  Outcome o;
  const SlitConfig cfg = example_config(0.6, 0.1);
  for (Chamber ch : {Chamber::Upper, Chamber::Lower}) {
    const ChamberGeometry g(cfg, ch);
    std::vector<double> speeds;
    for (double I : {1e3, 1e4, 1e5}) speeds.push_back(std::abs(g.velocity_for_density(0.1, 2 * I / g.total())));
    const std::vector<DriftRow> rows = invariant_drift(cfg, ch, speeds, 20, 32);
    std::vector<double> I, da, dt;
    for (const auto& r : rows) {
      I.push_back(r.action);
      da.push_back(r.max_action_change);
      dt.push_back(r.max_angle_defect);
    }
    const double sa = loglog_slope(I, da), st = loglog_slope(I, dt);
    o.add(sa >= -3.4 && sa <= -2.6 && st >= -4.5 && st <= -3.5,
          std::string(to_string(ch)) + " action slope " + fmt("%.3f", sa) + ", angle slope " + fmt("%.3f", st));
  }
  return o;
}

Outcome c4_normal_forms(const AcceptanceOptions& opt) {
  Outcome o;
  for (const auto& [lambda, x0] : {std::pair{0.6, 0.1}, std::pair{0.5, 0.4}}) {
    ParsedConfig pc = example_spec(lambda, x0, "nf-check", opt.seed, opt.threads);
    const CommandOutput out = execute(pc);
    int ok = 0;
    std::string failed;
    for (const auto& s : out.summary) {
      if (s.find(": PASS") != std::string::npos) ++ok;
      else failed += " [" + s + "]";
    }
    o.add(out.pass, "(" + format_double(lambda) + ", " + format_double(x0) + ") " + std::to_string(ok) + " of " +
                        std::to_string(out.summary.size()) + " branches in range" + failed);
  }
  return o;
}

Outcome c5_trace_det() {
  double tr_err = 0, det_err = 0;
  int nodes = 0;
  const std::vector<double> grid = cell_centres(20);
  for (double lambda : grid) {
    for (double x0 : grid) {
      if (x0 >= lambda) continue;
      const NFConstants k = compute_constants(example_config(lambda, x0));
      for (Chamber ch : {Chamber::Upper, Chamber::Lower}) {
        const AffineSystem sys = build_affine(k, ch);
        const double expected = ch == Chamber::Upper ? k.tr_upper : k.tr_lower;
        tr_err = std::max(tr_err, std::abs(sys.trace - expected));
        det_err = std::max(det_err, std::abs(sys.det - 1));
      }
      ++nodes;
    }
  }
  Outcome o;
  o.add(tr_err < 1e-8, "max |trace - Tr| " + fmt("%.3g", tr_err));
  o.add(det_err < 1e-12, "max |det - 1| " + fmt("%.3g", det_err) + " over " + std::to_string(nodes) + " nodes, both chambers");
  return o;
}

Outcome c6_atlas(const AcceptanceOptions& opt) {
  ParsedConfig pc = example_spec(0.6, 0.1, "atlas", opt.seed, opt.threads);
  pc.spec.params["n"] = 200.0;
  pc.spec.params["check"] = std::string("example");
  Outcome o;
  add_command(o, pc, "200x200:");
  return o;
}

Outcome c7_growth(const AcceptanceOptions& opt) {
  Outcome o;
  for (const char* mode : {"growth", "contraction"}) {
    ParsedConfig pc = example_spec(0.6, 0.1, "rate", opt.seed, opt.threads);
    pc.spec.params["mode"] = std::string(mode);
    add_command(o, pc, "");
  }
  return o;
}

Outcome c8_escape(const AcceptanceOptions& opt) {
  ParsedConfig pc = example_spec(0.6, 0.1, "escape", opt.seed, opt.threads);
  Outcome o;
  const AffineSystem sys = build_affine(pc.cfg);
  const double D = good_line_bound(sys);
  o.add(std::abs(D - 0.75) < 1e-9, "D " + fmt("%.6f", D));
  add_command(o, pc, "");
  return o;
}

Outcome c9_oscillation(const AcceptanceOptions& opt) {
  Outcome o;
  for (const auto& [lambda, x0] : {std::pair{0.6, 0.1}, std::pair{0.5, 0.4}}) {
    ParsedConfig pc = example_spec(lambda, x0, "rate", opt.seed, opt.threads);
    pc.spec.params["mode"] = std::string("oscillation");
    add_command(o, pc, "(" + format_double(lambda) + ", " + format_double(x0) + ")");
  }
  return o;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome c10_reproducibility(const AcceptanceOptions& opt) {
  std::vector<ParsedConfig> specs;
  {
    ParsedConfig pc = example_spec(0.6, 0.1, "escape", opt.seed, 0);
    pc.spec.params = {{"samples", 20000.0}, {"replicas", 2.0}, {"lines", 2000.0}, {"fragmentation_periods", 6.0}};
    specs.push_back(pc);
  }
  {
    ParsedConfig pc = example_spec(0.6, 0.1, "rate", opt.seed, 0);
    pc.spec.params = {{"mode", std::string("growth")}, {"count", 64.0}, {"periods", 8.0}};
    specs.push_back(pc);
  }
  {
    ParsedConfig pc = example_spec(0.5, 0.4, "nf-check", opt.seed, 0);
    pc.spec.params = {{"samples_per_decade", 40.0}, {"points", 3.0}, {"legs", std::string("12")}};
    specs.push_back(pc);
  }
  {
    ParsedConfig pc = example_spec(0.6, 0.1, "simulate", opt.seed, 0);
    pc.spec.params = {{"collisions", 2000.0}, {"survey_samples", 500.0}};
    specs.push_back(pc);
  }
  {
    ParsedConfig pc = example_spec(0.6, 0.1, "atlas", opt.seed, 0);
    pc.spec.params = {{"n", 50.0}};
    specs.push_back(pc);
  }
  Outcome o;
  int files = 0, differing = 0;
  std::string diffs;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::vector<fs::path> dirs;
    for (int rep = 0; rep < 2; ++rep) {
      ParsedConfig pc = specs[i];
      // The two runs also differ in thread count; bodies must not.
      pc.spec.threads = rep == 0 ? 1 : opt.threads;
      pc.spec.out = (fs::path(opt.workdir) / (pc.spec.command + "_run" + std::to_string(rep + 1))).string();
      fs::remove_all(pc.spec.out);
      const RunResult r = run(pc);
      if (r.exit_code == kUsage || r.exit_code == kNumeric) {
        o.add(false, pc.spec.command + " exited " + std::to_string(r.exit_code) +
                         (r.summary.empty() ? std::string() : ": " + r.summary.front()));
      }
      dirs.emplace_back(pc.spec.out);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".csv") continue;
      ++files;
      const std::string a = artifact_body(read_file(entry.path()));
      const std::string b = artifact_body(read_file(dirs[1] / name));
      if (a != b || a.empty()) {
        ++differing;
        diffs += " " + specs[i].spec.command + "/" + name;
      }
    }
  }
  o.add(differing == 0 && files > 0,
        std::to_string(files) + " CSV files compared across two runs, " + std::to_string(differing) + " differ" + diffs);
  return o;
}

}  // namespace

ParsedConfig example_spec(double lambda, double x0, const std::string& command, std::uint64_t seed, unsigned threads) {
  ParsedConfig pc{example_config(lambda, x0), {}};
  pc.spec.command = command;
  pc.spec.seed = seed;
  pc.spec.threads = threads;
  return pc;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  if (id < 1 || id > kCriteria) throw Error(ErrorCode::InvalidConfig, "criterion must be in 1..10");
  CriterionResult res;
  res.id = id;
  res.name = kNames[id - 1];
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    switch (id) {
      case 1: o = c1_residuals(opt); break;
      case 2: o = c2_elliptic(opt); break;
      case 3: o = c3_drift(opt); break;
      case 4: o = c4_normal_forms(opt); break;
      case 5: o = c5_trace_det(); break;
      case 6: o = c6_atlas(opt); break;
      case 7: o = c7_growth(opt); break;
      case 8: o = c8_escape(opt); break;
      case 9: o = c9_oscillation(opt); break;
      case 10: o = c10_reproducibility(opt); break;
    }
  } catch (const Error& e) {
    o.add(false, std::string("error: ") + e.what());
  }
  res.pass = o.pass;
  res.detail = o.detail;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::string summary_line(const CriterionResult& r) {
  return "criterion " + std::to_string(r.id) + " " + r.name + ": " + (r.pass ? "PASS" : "FAIL") + " (" + r.detail +
         ") [" + fmt("%.1f", r.seconds) + " s]";
}

std::string acceptance_json(const std::vector<CriterionResult>& results, const AcceptanceOptions& opt) {
  nlohmann::ordered_json j;
  j["tool"] = "slitbilliard";
  j["version"] = std::string(kVersion);
  j["seed"] = opt.seed;
  bool all = !results.empty();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  j["criteria"] = list;
  j["pass"] = all;
  return j.dump(2) + "\n";
}

RunResult run_acceptance(const ParsedConfig& pc, const RunOptions& ropt) {
  RunResult res;
  try {
    std::vector<int> ids;
    if (const auto it = pc.spec.params.find("criteria"); it != pc.spec.params.end()) {
      std::vector<double> xs;
      if (const double* x = std::get_if<double>(&it->second)) xs = {*x};
      else if (const auto* v = std::get_if<std::vector<double>>(&it->second)) xs = *v;
      else throw Error(ErrorCode::InvalidConfig, "acceptance: experiment.params.criteria: expected numbers");
      for (double x : xs) {
        if (x != std::floor(x) || x < 1 || x > kCriteria) {
          throw Error(ErrorCode::InvalidConfig, "acceptance: experiment.params.criteria: entries must be 1..10");
        }
        ids.push_back(static_cast<int>(x));
      }
    } else {
      for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    }
    for (const auto& [key, value] : pc.spec.params) {
      if (key != "criteria") throw Error(ErrorCode::InvalidConfig, "acceptance: experiment.params." + key + ": unknown parameter");
    }
    if (!pc.spec.seed) throw Error(ErrorCode::InvalidConfig, "acceptance: experiment.seed is required");
    AcceptanceOptions opt;
    opt.seed = *pc.spec.seed;
    opt.threads = pc.spec.threads;
    const fs::path dir(pc.spec.out.empty() ? "." : pc.spec.out);
    opt.workdir = (dir / "work").string();
    fs::create_directories(dir);
    std::vector<CriterionResult> results;
    for (int id : ids) {
      results.push_back(run_criterion(id, opt));
      res.summary.push_back(summary_line(results.back()));
      if (ropt.progress) *ropt.progress << res.summary.back() << std::endl;
    }
    const fs::path report = dir / "acceptance.json";
    std::ofstream(report, std::ios::binary) << acceptance_json(results, opt);
    res.files.push_back(report.string());
    bool all = true;
    for (const auto& r : results) all = all && r.pass;
    res.exit_code = all ? kPass : kFail;
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e);
    res.summary = {std::string("error: ") + e.what()};
  }
  return res;
}

}  // namespace slitbilliard::harness
