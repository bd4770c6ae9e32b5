#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cli/config.hpp"

namespace regbid::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitInfeasible = 4,
};

// Exit status for a library error code.
int exit_code_for(ErrorCode code) noexcept;

struct Context {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream* out = nullptr;  // human-readable results
  std::ostream* log = nullptr;  // warnings and progress
};

// "# regbid <version> config=<hash>"
std::string header_line(const RunConfig& config);

std::vector<RegulationSignal> load_corpus(const CorpusConfig& corpus, const RunConfig& config,
                                          std::ostream* log);
std::vector<double> load_prices(const RunConfig& config, std::size_t count);
// Configured mu_r, or the calibration corpus mean when unset.
double resolve_mu_r(const RunConfig& config, std::ostream* log);
GammaCurve resolve_gamma_curve(const RunConfig& config, std::ostream* log);

int cmd_uhat(const Context& ctx);
int cmd_simulate(const Context& ctx);
int cmd_calibrate(const Context& ctx);
int cmd_bid(const Context& ctx);
int cmd_backtest(const Context& ctx);
int cmd_sweep(const Context& ctx);

}  // namespace regbid::cli
