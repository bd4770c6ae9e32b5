#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "regbid/regbid.hpp"

namespace regbid::cli {

// Invalid or unknown configuration entry; `field` is "section.key".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct CorpusConfig {
  std::string source = "synthetic";  // synthetic | csv
  std::filesystem::path path;
  SignalKind kind = SignalKind::kOuProcess;
  std::uint64_t seed = 1;
  std::size_t periods = 200;
  SynthParams params;
  bool debias = true;

  std::string id() const;
};

struct PriceConfig {
  std::string source = "synthetic";  // synthetic | csv
  std::filesystem::path path;        // csv: period_id,lambda
  std::uint64_t seed = 3;
  double mean = 25.0;
  double volatility = 0.4;
  double persistence = 0.9;
};

struct UhatCase {
  double penalty_price = 50.0;
  double efficiency = 1.0;
  std::size_t steps = 100;
};

struct RunConfig {
  BatterySpec battery = reference_battery();
  MarketConfig market;
  double xi = 0.9;
  double interval_h = kDefaultIntervalHours;
  std::optional<double> mu_r;  // computed from the calibration corpus if absent

  CorpusConfig corpus;       // evaluation / simulation
  CorpusConfig calibration;  // gamma-curve calibration

  PriceConfig prices;

  std::vector<UhatCase> uhat_cases;
  double uhat_energy_mwh = 1.0;

  double capacity_mw = 10.0;
  std::vector<double> capacities;
  std::vector<double> segments;
  std::vector<double> gamma_grid;
  PolicyKind policy = PolicyKind::kProposed;
  BiddingMode bidding = BiddingMode::kFixedCapacity;
  std::size_t simulate_periods = 1;
  std::filesystem::path gamma_curve_path;

  std::string source_text;  // raw config text, for hashing

  void validate() const;
  // Reseeds every corpus and price generator from one seed.
  void apply_seed(std::uint64_t seed);
  // 16 hex digits identifying the effective configuration.
  std::string hash() const;
};

RunConfig default_config();
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

std::vector<double> parse_number_list(const std::string& field, const std::string& text);

}  // namespace regbid::cli
