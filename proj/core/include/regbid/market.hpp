#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "regbid/battery.hpp"
#include "regbid/bidding.hpp"
#include "regbid/control.hpp"
#include "regbid/performance.hpp"
#include "regbid/signal.hpp"

namespace regbid {

inline constexpr double kHoursPerMonth = 8760.0 / 12.0;

struct MarketPeriod {
  std::size_t period_id = 0;
  double clearing_price = 0.0;  // $/MW
  RegulationSignal signal;
  double cleared_capacity_mw = 0.0;
};

enum class PriceForecast { kFixed, kTrailingMean };

struct MarketConfig {
  PerformanceConfig performance;
  double settlement_h = 1.0;
  double mu_r = 1.0;
  PriceForecast forecast = PriceForecast::kTrailingMean;
  // Fixed forecast, and the seed value before any prices have been seen.
  double mu_lambda = 30.0;
  std::size_t trailing_window = 168;
  double shelf_life_months = 120.0;
  // When false every period is paid regardless of its index.
  bool enforce_eligibility = true;

  void validate() const;
  PenaltyModel penalty(double mu_lambda_now, double interval_h) const;
};

struct SettlementResult {
  double capacity_mw = 0.0;
  double payment = 0.0;
  double aging_cost = 0.0;
  double penalty_equiv = 0.0;  // delta * lambda * ||Cr - b||_1 / ||r||_1
  double profit = 0.0;         // payment - aging_cost
  double perf_index = 1.0;
  double life_loss = 0.0;      // aging_cost / (E R)
  bool eligible = true;
  bool zero_instruction = false;
};

// Throws kLengthMismatch when the trajectory does not cover the period.
SettlementResult settle_period(const MarketPeriod& period,
                               const Trajectory& trajectory,
                               const BatterySpec& spec, const MarketConfig& config);

enum class BiddingMode { kFixedCapacity, kBidCurve };

struct Strategy {
  PolicyKind policy = PolicyKind::kProposed;
  BiddingMode bidding = BiddingMode::kFixedCapacity;
  double capacity_mw = 0.0;  // kFixedCapacity
  BidCurve bid_curve;        // kBidCurve
};

struct PeriodRow {
  std::size_t period_id = 0;
  double clearing_price = 0.0;
  double mu_lambda = 0.0;
  double u_hat = 0.0;
  SettlementResult settlement;
};

struct ReportSummary {
  std::size_t periods = 0;
  double market_income = 0.0;
  double aging_cost = 0.0;
  double penalty_equiv = 0.0;
  double profit = 0.0;
  double cumulative_life_loss = 0.0;
  double life_expectancy_months = 0.0;
  double average_performance = 1.0;
  double hours_under_performance = 0.0;
  double total_capacity_mwh = 0.0;
};

struct Report {
  std::vector<PeriodRow> rows;
  ReportSummary summary;
};

// Sequential settlement with state of charge carried across periods,
// starting from the midpoint of the energy window. Running marks of the
// threshold policy reset at every period boundary.
Report backtest(std::span<const MarketPeriod> periods, const Strategy& strategy,
                const BatterySpec& spec, const MarketConfig& config);

// Months until the cells are spent at the observed rate, capped by shelf life.
double life_expectancy(double cumulative_life_loss, double elapsed_months,
                       double shelf_life_months);

struct SweepRow {
  double capacity_mw = 0.0;
  PolicyKind policy = PolicyKind::kProposed;
  double gross_payment = 0.0;  // sum of lambda * C
  double penalty = 0.0;
  double aging = 0.0;
  double profit = 0.0;
};

// Backtests both policies at every capacity with eligibility relaxed.
std::vector<SweepRow> capacity_sweep(std::span<const MarketPeriod> periods,
                                     std::span<const double> capacities_mw,
                                     const BatterySpec& spec,
                                     const MarketConfig& config);

// Mean-reverting log-normal clearing prices, deterministic per seed.
std::vector<double> synthesize_prices(std::uint64_t seed, std::size_t count,
                                      double mean_price, double volatility,
                                      double persistence = 0.9);

std::vector<MarketPeriod> make_periods(std::vector<RegulationSignal> signals,
                                       std::span<const double> prices);

void write_report_csv(std::ostream& out, const Report& report);
std::string summary_json(const ReportSummary& summary);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace regbid
