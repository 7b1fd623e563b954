#include "slitbilliard/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace slitbilliard::harness {

namespace {

[[noreturn]] void fail_at(ErrorCode code, const std::string& source, const YAML::Mark& mark, const std::string& what) {
  std::ostringstream os;
  os << source;
  if (!mark.is_null()) os << ":" << mark.line + 1 << ":" << mark.column + 1;
  os << ": " << what;
  throw Error(code, os.str());
}

std::optional<double> to_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  double x = 0;
  const auto [ptr, ec] = std::from_chars(begin, end, x);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return x;
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& what) const {
    fail_at(ErrorCode::InvalidConfig, source_, node.Mark(), field + ": " + what);
  }

  void require_map(const YAML::Node& node, const std::string& field, std::initializer_list<const char*> keys) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) fail(kv.first, field + "." + key, "unknown key");
    }
  }

  double number(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    const auto x = to_number(node.Scalar());
    if (!x) fail(node, field, "expected a number, got '" + node.Scalar() + "'");
    if (!std::isfinite(*x)) fail(node, field, "must be finite");
    return *x;
  }

  std::int64_t integer(const YAML::Node& node, const std::string& field) const {
    const double x = number(node, field);
    if (x != std::floor(x) || std::abs(x) > 9.007199254740992e15) fail(node, field, "expected an integer");
    return static_cast<std::int64_t>(x);
  }

  std::string word(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    return node.Scalar();
  }

  TrigSeries series(const YAML::Node& node, const std::string& field) const {
    require_map(node, field, {"constant", "cos", "sin"});
    if (!node["constant"]) fail(node, field + ".constant", "missing");
    const double c = number(node["constant"], field + ".constant");
    auto harmonics = [&](const char* name) {
      std::vector<Harmonic> out;
      const YAML::Node list = node[name];
      if (!list) return out;
      const std::string f = field + "." + name;
      if (!list.IsSequence()) fail(list, f, "expected a list of {k, amplitude}");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string fi = f + "[" + std::to_string(i) + "]";
        require_map(list[i], fi, {"k", "amplitude"});
        if (!list[i]["k"] || !list[i]["amplitude"]) fail(list[i], fi, "needs k and amplitude");
        const std::int64_t k = integer(list[i]["k"], fi + ".k");
        if (k < 1 || k > 1000) fail(list[i]["k"], fi + ".k", "harmonic index must be in [1, 1000]");
        out.push_back({static_cast<int>(k), number(list[i]["amplitude"], fi + ".amplitude")});
      }
      return out;
    };
    try {
      return TrigSeries(c, harmonics("cos"), harmonics("sin"));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidConfig) throw;
      const std::string what = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      fail(node, field, what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
    }
  }

  Param param(const YAML::Node& node, const std::string& field) const {
    if (node.IsScalar()) {
      if (auto x = to_number(node.Scalar())) return *x;
      return node.Scalar();
    }
    if (node.IsSequence()) {
      std::vector<double> xs;
      for (std::size_t i = 0; i < node.size(); ++i) xs.push_back(number(node[i], field + "[" + std::to_string(i) + "]"));
      return xs;
    }
    fail(node, field, "expected a scalar or a list of numbers");
  }

 private:
  std::string source_;
};

void emit_series(YAML::Emitter& em, const TrigSeries& s) {
  em << YAML::BeginMap << YAML::Key << "constant" << YAML::Value << format_double(s.constant());
  auto list = [&](const char* name, const std::vector<Harmonic>& hs) {
    em << YAML::Key << name << YAML::Value;
    if (hs.empty()) em << YAML::Flow;
    em << YAML::BeginSeq;
    for (const auto& h : hs) {
      em << YAML::Flow << YAML::BeginMap << YAML::Key << "k" << YAML::Value << h.k << YAML::Key << "amplitude"
         << YAML::Value << format_double(h.amplitude) << YAML::EndMap;
    }
    em << YAML::EndSeq;
  };
  list("cos", s.cos_terms());
  list("sin", s.sin_terms());
  em << YAML::EndMap;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidConfig, "expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

ParsedConfig parse_config_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    fail_at(ErrorCode::ParseError, source, e.mark, e.msg);
  }
  const Reader rd(source);
  if (!root.IsMap()) fail_at(ErrorCode::ParseError, source, root.Mark(), "document must be a mapping");
  rd.require_map(root, "<root>", {"config", "experiment"});
  const YAML::Node c = root["config"];
  if (!c) fail_at(ErrorCode::InvalidConfig, source, root.Mark(), "config: missing section");
  rd.require_map(c, "config", {"left", "right", "lambda", "x0"});
  for (const char* key : {"left", "right", "lambda", "x0"}) {
    if (!c[key]) rd.fail(c, std::string("config.") + key, "missing");
  }
  TrigSeries left = rd.series(c["left"], "config.left");
  TrigSeries right = rd.series(c["right"], "config.right");
  const double lambda = rd.number(c["lambda"], "config.lambda");
  const double x0 = rd.number(c["x0"], "config.x0");
  if (!(lambda > 0 && lambda < 1)) rd.fail(c["lambda"], "config.lambda", "must lie in (0, 1)");
  if (!(x0 >= 0 && x0 < lambda)) rd.fail(c["x0"], "config.x0", "must satisfy 0 <= x0 < lambda");

  ExperimentSpec spec;
  if (const YAML::Node e = root["experiment"]) {
    rd.require_map(e, "experiment", {"command", "seed", "threads", "out", "tolerances", "params"});
    if (e["command"]) spec.command = rd.word(e["command"], "experiment.command");
    if (e["seed"]) {
      const std::int64_t s = rd.integer(e["seed"], "experiment.seed");
      if (s < 0) rd.fail(e["seed"], "experiment.seed", "must be non-negative");
      spec.seed = static_cast<std::uint64_t>(s);
    }
    if (e["threads"]) {
      const std::int64_t t = rd.integer(e["threads"], "experiment.threads");
      if (t < 0 || t > 1024) rd.fail(e["threads"], "experiment.threads", "must be in [0, 1024]");
      spec.threads = static_cast<unsigned>(t);
    }
    if (e["out"]) spec.out = rd.word(e["out"], "experiment.out");
    if (const YAML::Node t = e["tolerances"]) {
      rd.require_map(t, "experiment.tolerances", {"grazing", "singular", "edge", "max_root_iterations"});
      auto positive = [&](const char* key, double& slot) {
        if (!t[key]) return;
        const std::string f = std::string("experiment.tolerances.") + key;
        slot = rd.number(t[key], f);
        if (!(slot > 0 && slot < 1)) rd.fail(t[key], f, "must lie in (0, 1)");
      };
      positive("grazing", spec.tol.grazing);
      positive("singular", spec.tol.singular);
      positive("edge", spec.tol.edge);
      if (t["max_root_iterations"]) {
        const std::int64_t n = rd.integer(t["max_root_iterations"], "experiment.tolerances.max_root_iterations");
        if (n < 1 || n > 100000000) rd.fail(t["max_root_iterations"], "experiment.tolerances.max_root_iterations",
                                             "must be in [1, 1e8]");
        spec.tol.max_root_iterations = static_cast<int>(n);
      }
    }
    if (const YAML::Node p = e["params"]) {
      if (!p.IsMap()) rd.fail(p, "experiment.params", "expected a mapping");
      for (const auto& kv : p) {
        const std::string key = kv.first.as<std::string>();
        spec.params[key] = rd.param(kv.second, "experiment.params." + key);
      }
    }
  }
  return {SlitConfig(std::move(left), std::move(right), lambda, x0), std::move(spec)};
}

ParsedConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config_text(os.str(), path);
}

std::string serialize(const ParsedConfig& pc) {
  YAML::Emitter em;
  em << YAML::BeginMap;
  em << YAML::Key << "config" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "left" << YAML::Value;
  emit_series(em, pc.cfg.left());
  em << YAML::Key << "right" << YAML::Value;
  emit_series(em, pc.cfg.right());
  em << YAML::Key << "lambda" << YAML::Value << format_double(pc.cfg.lambda());
  em << YAML::Key << "x0" << YAML::Value << format_double(pc.cfg.x0());
  em << YAML::EndMap;

  const ExperimentSpec& s = pc.spec;
  em << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "command" << YAML::Value << s.command;
  if (s.seed) em << YAML::Key << "seed" << YAML::Value << *s.seed;
  em << YAML::Key << "threads" << YAML::Value << s.threads;
  em << YAML::Key << "out" << YAML::Value << s.out;
  em << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  em << YAML::Key << "grazing" << YAML::Value << format_double(s.tol.grazing);
  em << YAML::Key << "singular" << YAML::Value << format_double(s.tol.singular);
  em << YAML::Key << "edge" << YAML::Value << format_double(s.tol.edge);
  em << YAML::Key << "max_root_iterations" << YAML::Value << s.tol.max_root_iterations;
  em << YAML::EndMap;
  em << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [key, value] : s.params) {
    em << YAML::Key << key << YAML::Value;
    if (const double* x = std::get_if<double>(&value)) {
      em << format_double(*x);
    } else if (const std::string* w = std::get_if<std::string>(&value)) {
      em << YAML::DoubleQuoted << *w;
    } else {
      em << YAML::Flow << YAML::BeginSeq;
      for (double x : std::get<std::vector<double>>(value)) em << format_double(x);
      em << YAML::EndSeq;
    }
  }
  em << YAML::EndMap;
  em << YAML::EndMap;
  em << YAML::EndMap;
  return std::string(em.c_str()) + "\n";
}

void set_param(ParamMap& params, const std::string& assignment) {
  const auto [key, value] = split_assignment(assignment);
  YAML::Node node;
  try {
    node = YAML::Load(value);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ParseError, "--set " + key + ": " + e.msg);
  }
  params[key] = Reader("--set").param(node, key);
}

void set_tolerance(SolverTolerances& tol, const std::string& assignment) {
  const auto [key, value] = split_assignment(assignment);
  const auto x = to_number(value);
  if (!x) throw Error(ErrorCode::InvalidConfig, "--tolerance " + key + ": expected a number");
  if (key == "max_root_iterations") {
    if (*x < 1 || *x != std::floor(*x) || *x > 1e8) throw Error(ErrorCode::InvalidConfig, "--tolerance " + key + ": expected an integer in [1, 1e8]");
    tol.max_root_iterations = static_cast<int>(*x);
    return;
  }
  if (!(*x > 0 && *x < 1)) throw Error(ErrorCode::InvalidConfig, "--tolerance " + key + ": must lie in (0, 1)");
  if (key == "grazing") tol.grazing = *x;
  else if (key == "singular") tol.singular = *x;
  else if (key == "edge") tol.edge = *x;
  else throw Error(ErrorCode::InvalidConfig, "--tolerance: unknown key '" + key + "'");
}

}  // namespace slitbilliard::harness
