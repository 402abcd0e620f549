#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "afrelay/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"MMSE transceiver design for two-hop AF MIMO relay networks"};
  std::string subcommand;
  afrelay::CliCommand cmd;
  cmd.jobs = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  std::uint64_t seed = 0;

  app.add_option("command", subcommand,
                 "downlink-sweep | uplink-sweep | convergence | compare-baselines | selftest")
      ->required()
      ->check(CLI::IsMember({"downlink-sweep", "uplink-sweep", "convergence", "compare-baselines", "selftest"}));
  app.add_option("--config", cmd.config_path, "config file (key=value with [system]/[sweep]/[run])");
  app.add_option("--out", cmd.output_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "base seed, overrides run.seed");
  app.add_option("--jobs", cmd.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--set", cmd.overrides, "override a config key, e.g. --set trials=7 or --set run.trials=7");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : afrelay::exit_usage;
  }
  cmd.subcommand = afrelay::parse_subcommand(subcommand);
  if (*seed_opt) cmd.seed = seed;
  return afrelay::run_command(cmd, std::cerr);
}
