#include <iostream>

#include "CLI11.hpp"

#include "slitbilliard/harness/acceptance.hpp"

namespace sh = slitbilliard::harness;

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> criteria;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out = "acceptance_out";
  app.add_option("criteria", criteria, "Criteria to run (default all)")->check(CLI::Range(1, sh::kCriteria));
  app.add_option("-s,--seed", seed, "Seed");
  app.add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("-o,--out", out, "Output directory");
  CLI11_PARSE(app, argc, argv);

  sh::ParsedConfig pc = sh::example_spec(0.6, 0.1, "acceptance", seed, threads);
  pc.spec.out = out;
  if (!criteria.empty()) pc.spec.params["criteria"] = std::vector<double>(criteria.begin(), criteria.end());
  sh::RunOptions opt;
  opt.progress = &std::cout;
  const sh::RunResult res = sh::run_acceptance(pc, opt);
  if (res.exit_code >= sh::kUsage) {
    for (const auto& s : res.summary) std::cerr << s << std::endl;
  } else {
    std::cout << (res.exit_code == sh::kPass ? "all criteria passed" : "some criteria failed") << std::endl;
  }
  return res.exit_code;
}
