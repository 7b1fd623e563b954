#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "slitbilliard/harness/acceptance.hpp"
#include "slitbilliard/harness/config.hpp"
#include "slitbilliard/version.hpp"

namespace sh = slitbilliard::harness;

int main(int argc, char** argv) {
  CLI::App app{"Moving-slit billiard experiments"};
  app.set_version_flag("--version", std::string(slitbilliard::kVersion));

  std::string command, config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> tolerances, sets;
  std::vector<int> criteria;
  bool timestamp = false, print_config = false;

  app.add_option("command", command, "Experiment to run (defaults to experiment.command of the config)")
      ->check(CLI::IsMember(sh::command_names()));
  app.add_option("-c,--config", config, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("-s,--seed", seed, "Seed (required for stochastic commands)");
  app.add_option("-o,--out", out, "Output directory");
  app.add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("-t,--tolerance", tolerances, "Solver tolerance override key=value (grazing, singular, edge, max_root_iterations)");
  app.add_option("--set", sets, "Parameter override key=value");
  app.add_option("--criteria", criteria, "Acceptance criteria to run (default all)")->check(CLI::Range(1, sh::kCriteria));
  app.add_flag("--timestamp", timestamp, "Add a creation time to artifact headers");
  app.add_flag("--print-config", print_config, "Print the canonical config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sh::kUsage;
  }

  try {
    std::optional<sh::ParsedConfig> pc;
    if (!config.empty()) {
      pc = sh::parse_config(config);
    } else if (command == "acceptance") {
      // The criteria carry their own configurations.
      pc = sh::example_spec(0.6, 0.1, "acceptance", 1, 0);
      pc->spec.seed.reset();
    } else {
      std::cerr << "error: --config is required for " << (command.empty() ? "this command" : command) << "\n";
      return sh::kUsage;
    }
    if (!command.empty()) pc->spec.command = command;
    if (seed) pc->spec.seed = *seed;
    if (threads) pc->spec.threads = *threads;
    if (!out.empty()) pc->spec.out = out;
    for (const auto& t : tolerances) sh::set_tolerance(pc->spec.tol, t);
    for (const auto& s : sets) sh::set_param(pc->spec.params, s);
    if (!criteria.empty()) pc->spec.params["criteria"] = std::vector<double>(criteria.begin(), criteria.end());
    if (pc->spec.command == "acceptance" && !pc->spec.seed) pc->spec.seed = 1;
    if (print_config) {
      std::cout << sh::serialize(*pc);
      return sh::kPass;
    }
    if (sh::needs_seed(pc->spec) && !pc->spec.seed) {
      std::cerr << "error: " << pc->spec.command << " is stochastic; give --seed or experiment.seed\n";
      return sh::kUsage;
    }
    sh::RunOptions opt;
    opt.timestamp = timestamp;
    const bool streamed = pc->spec.command == "acceptance";
    if (streamed) opt.progress = &std::cout;
    const sh::RunResult res = sh::run(*pc, opt);
    if (res.exit_code >= sh::kUsage || !streamed) {
      for (const auto& s : res.summary) (res.exit_code >= sh::kUsage ? std::cerr : std::cout) << s << "\n";
    }
    for (const auto& f : res.files) std::cout << "wrote " << f << "\n";
    return res.exit_code;
  } catch (const slitbilliard::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sh::exit_code_for(e);
  }
}
