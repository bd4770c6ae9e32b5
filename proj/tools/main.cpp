#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "cli/commands.hpp"

namespace {

using namespace regbid;
using namespace regbid::cli;

using Command = int (*)(const Context&);

int run(const Command command, const std::optional<std::string>& config_path,
        const std::optional<std::uint64_t>& seed, const std::string& out_dir) {
  try {
    Context ctx;
    ctx.config = config_path ? load_config(*config_path) : default_config();
    if (seed) ctx.config.apply_seed(*seed);
    ctx.out_dir = out_dir;
    ctx.out = &std::cout;
    ctx.log = &std::cerr;
    return command(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Battery frequency-regulation control, bidding and backtesting"};
  app.set_version_flag("--version", std::string(regbid::kVersion));
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "regbid-out";
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Reseed corpus and price generators");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"uhat", {"Optimal cycle depth and regret bound table", &cmd_uhat}},
      {"simulate", {"Run the control policy and write trajectories", &cmd_simulate}},
      {"calibrate", {"Calibrate the performance-vs-gamma curve", &cmd_calibrate}},
      {"bid", {"Build a capacity bid curve", &cmd_bid}},
      {"backtest", {"Settle a strategy over a price and signal history", &cmd_backtest}},
      {"sweep", {"Profit over a range of fixed capacities", &cmd_sweep}},
  };
  Command selected = nullptr;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->fallthrough();
    sub->callback([&selected, fn = entry.second] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }
  return run(selected, config_path, seed, out_dir);
}
