#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slitbilliard/harness/commands.hpp"

namespace slitbilliard::harness {

struct AcceptanceOptions {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  /// Scratch directory for the reproducibility runs.
  std::string workdir = "acceptance_work";
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

constexpr int kCriteria = 10;

/// Runs one criterion (1..10) at its stated tolerances. Errors raised by
/// the computation fail the criterion with the diagnostic as detail.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

/// "criterion N <name>: PASS|FAIL (detail) [s]"
std::string summary_line(const CriterionResult& r);
std::string acceptance_json(const std::vector<CriterionResult>& results, const AcceptanceOptions& opt);

/// The `acceptance` command: params.criteria selects the list (default
/// all); writes acceptance.json into spec.out.
RunResult run_acceptance(const ParsedConfig& pc, const RunOptions& opt = {});

/// A ParsedConfig for the built-in example walls at (lambda, x0).
ParsedConfig example_spec(double lambda, double x0, const std::string& command, std::uint64_t seed, unsigned threads);

}  // namespace slitbilliard::harness
