#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "privsub/commands.hpp"

int main(int argc, char** argv) {
  using namespace privsub;
  CLI::App app{"Distributed subgradient optimization: simulation, adjacency attacks and the projected asynchronous algorithm"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = ".", trace_path;
  std::uint64_t seed = 0;
  long horizon = 0;

  for (const char* name : {"run-sync", "run-async", "attack-consensus", "attack-dssoa", "attack-async",
                           "analyze-discoverability"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", scenario_path, "scenario file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the scenario seed");
    sub->add_option("--horizon", horizon, "override the scenario horizon");
    if (std::string(name).rfind("attack-", 0) == 0)
      sub->add_option("--trace", trace_path, "attack this visible trace CSV instead of simulating");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfiguration;
  }

  auto* sub = app.get_subcommands().front();
  const auto command = parse_command(sub->get_name());
  ExecuteOptions opt;
  opt.out_dir = out_dir;
  if (sub->count("--seed")) opt.seed = seed;
  if (sub->count("--horizon")) opt.horizon = horizon;
  if (sub->get_option_no_throw("--trace") && sub->count("--trace")) opt.trace_path = trace_path;

  try {
    const auto scenario = load_scenario(scenario_path);
    const auto result = execute(scenario, *command, opt);
    std::cout << result.report.dump(2) << '\n';
    return result.exit_code;
  } catch (const ConfigurationError& e) {
    std::cerr << "configuration rejected: " << e.what() << '\n';
    return kExitConfiguration;
  } catch (const DomainError& e) {
    std::cerr << "configuration rejected: " << e.what() << '\n';
    return kExitConfiguration;
  } catch (const NumericVerdict& e) {
    std::cerr << "numeric verdict: " << e.what() << '\n';
    return kExitVerdict;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
