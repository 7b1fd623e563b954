#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slitbilliard/billiard.hpp"
#include "slitbilliard/wall.hpp"

namespace slitbilliard::harness {

/// Scalar, word or list parameter of an experiment.
using Param = std::variant<double, std::string, std::vector<double>>;
using ParamMap = std::map<std::string, Param>;

struct ExperimentSpec {
  std::string command;
  std::optional<std::uint64_t> seed;
  /// 0 uses every hardware thread. Outputs do not depend on it.
  unsigned threads = 0;
  /// Output directory.
  std::string out = "out";
  SolverTolerances tol;
  ParamMap params;
};

struct ParsedConfig {
  SlitConfig cfg;
  ExperimentSpec spec;
};

/// Reads a YAML document with a `config` section (walls, lambda, x0) and an
/// optional `experiment` section. Errors are ParseError (malformed text,
/// diagnostics carry line and column) or InvalidConfig (bad values, naming
/// the field).
ParsedConfig parse_config(const std::string& path);
ParsedConfig parse_config_text(const std::string& text, const std::string& source = "<text>");

/// Canonical YAML text; parse(serialize(x)) serializes to the same bytes.
std::string serialize(const ParsedConfig& pc);

/// Sets one entry from "key=value" text (numbers, words or [a, b, ...]).
void set_param(ParamMap& params, const std::string& assignment);
/// Sets grazing, singular, edge or max_root_iterations from "key=value".
void set_tolerance(SolverTolerances& tol, const std::string& assignment);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace slitbilliard::harness
