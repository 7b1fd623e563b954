#include <filesystem>
#include <string>

#include "doctest.h"
#include "slitbilliard/harness/acceptance.hpp"
#include "slitbilliard/harness/commands.hpp"
#include "slitbilliard/harness/config.hpp"

using namespace slitbilliard;
using namespace slitbilliard::harness;

namespace {

const char* kDoc = R"(config:
  left:
    constant: 0.5
    cos:
      - {k: 1, amplitude: 0.3}
  right:
    constant: 0.5
    sin:
      - {k: 1, amplitude: 0.3}
  lambda: 0.6
  x0: 0.1
experiment:
  command: nf-check
  seed: 7
  params:
    points: 3
    samples_per_decade: 0
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("config round trip") {
  const ParsedConfig pc = parse_config_text(kDoc);
  CHECK(pc.cfg.hash() == example_config(0.6, 0.1).hash());
  CHECK(pc.spec.command == "nf-check");
  REQUIRE(pc.spec.seed);
  CHECK(*pc.spec.seed == 7);
  const std::string text = serialize(pc);
  const ParsedConfig again = parse_config_text(text);
  CHECK(serialize(again) == text);
  CHECK(again.cfg.hash() == pc.cfg.hash());
}

TEST_CASE("config rejections") {
  CHECK(code_of(replace(kDoc, "x0: 0.1", "x0: 0.6")) == ErrorCode::InvalidConfig);
  CHECK(code_of(replace(kDoc, "x0: 0.1", "x0: 0.7")) == ErrorCode::InvalidConfig);
  CHECK(code_of(replace(kDoc, "amplitude: 0.3}\n  right", "amplitude: 0.5}\n  right")) == ErrorCode::InvalidConfig);
  CHECK(code_of(replace(kDoc, "lambda: 0.6", "lambda: 0.6\n  colour: red")) == ErrorCode::InvalidConfig);
  CHECK(code_of(replace(kDoc, "lambda: 0.6", "lambda: [0.6")) == ErrorCode::ParseError);
  try {
    parse_config_text(replace(kDoc, "x0: 0.1", "x0: 0.6"), "cfg.yaml");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cfg.yaml:") != std::string::npos);
    CHECK(std::string(e.what()).find("x0") != std::string::npos);
  }
}

TEST_CASE("parameter overrides") {
  ParamMap m;
  set_param(m, "n=20");
  set_param(m, "mode=growth");
  set_param(m, "epsilons=[0.2, 0.1]");
  CHECK(std::get<double>(m.at("n")) == 20);
  CHECK(std::get<std::string>(m.at("mode")) == "growth");
  CHECK(std::get<std::vector<double>>(m.at("epsilons")).size() == 2);
  CHECK_THROWS_AS(set_param(m, "novalue"), Error);
  SolverTolerances tol;
  set_tolerance(tol, "grazing=1e-8");
  CHECK(tol.grazing == 1e-8);
  CHECK_THROWS_AS(set_tolerance(tol, "speed=1"), Error);
  for (double x : {0.1, 1e-300, 2.013, 1.0 / 3}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("insufficient samples and exit codes") {
  ParsedConfig pc = parse_config_text(kDoc);
  pc.spec.out = (std::filesystem::temp_directory_path() / "slitbilliard_unit_nf").string();
  try {
    execute(pc);
    FAIL("expected InsufficientSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSamples);
    CHECK(exit_code_for(e) == kUsage);
  }
  CHECK(run(pc).exit_code == kUsage);
  CHECK(exit_code_for(Error(ErrorCode::Grazing, "x")) == kNumeric);
  CHECK(exit_code_for(Error(ErrorCode::NotHyperbolic, "x")) == kUsage);
}

TEST_CASE("unknown parameters are rejected before computing") {
  ParsedConfig pc = parse_config_text(kDoc);
  pc.spec.command = "atlas";
  pc.spec.params = {{"n", 4.0}, {"colour", std::string("red")}};
  CHECK_THROWS_AS(execute(pc), Error);
}

TEST_CASE("seeds") {
  ParsedConfig pc = parse_config_text(kDoc);
  CHECK(needs_seed(pc.spec));
  pc.spec.command = "atlas";
  CHECK_FALSE(needs_seed(pc.spec));
  pc.spec.command = "escape";
  CHECK(needs_seed(pc.spec));
}

TEST_CASE("small atlas artifact") {
  ParsedConfig pc = example_spec(0.6, 0.1, "atlas", 1, 1);
  pc.spec.params = {{"n", 8.0}, {"check", std::string("none")}};
  const CommandOutput out = execute(pc);
  REQUIRE(out.files.size() == 1);
  CHECK(out.files[0].name == "atlas.csv");
  const std::string body = artifact_body(out.files[0].text);
  CHECK(body.rfind("lambda,x0,kind,tr,hyperbolic", 0) == 0);
  CHECK(out.files[0].text.rfind("# slitbilliard", 0) == 0);
  CHECK(out.files[0].text.find("created=") == std::string::npos);
  // Body is independent of the thread count.
  pc.spec.threads = 2;
  CHECK(artifact_body(execute(pc).files[0].text) == body);
}
