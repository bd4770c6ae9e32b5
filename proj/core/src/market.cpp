#include "regbid/market.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "csv_util.hpp"
#include "json.hpp"
#include "regbid/errors.hpp"
#include "regbid/rainflow.hpp"

namespace regbid {

void MarketConfig::validate() const {
  performance.validate();
  if (!(settlement_h > 0.0)) {
    throw Error(ErrorCode::kBadParams, "market: settlement length must be > 0");
  }
  if (!(mu_r > 0.0)) {
    throw Error(ErrorCode::kBadParams, "market: mu_r must be > 0");
  }
  if (!(mu_lambda >= 0.0)) {
    throw Error(ErrorCode::kBadParams, "market: mu_lambda must be >= 0");
  }
  if (forecast == PriceForecast::kTrailingMean && trailing_window == 0) {
    throw Error(ErrorCode::kBadParams, "market: trailing window must be > 0");
  }
}

PenaltyModel MarketConfig::penalty(double mu_lambda_now, double interval_h) const {
  return PenaltyModel{performance.effective_delta(), mu_lambda_now, mu_r, interval_h};
}

SettlementResult settle_period(const MarketPeriod& period,
                               const Trajectory& trajectory,
                               const BatterySpec& spec, const MarketConfig& config) {
  if (trajectory.steps() != period.signal.size()) {
    std::ostringstream os;
    os << "market: period " << period.period_id << " has " << period.signal.size()
       << " samples but the trajectory has " << trajectory.steps();
    throw Error(ErrorCode::kLengthMismatch, os.str());
  }
  SettlementResult s;
  s.capacity_mw = period.cleared_capacity_mw;
  const auto index = performance_index(trajectory.instruction_mw,
                                       trajectory.dispatch_mw, config.performance);
  s.perf_index = index.value;
  s.zero_instruction = index.zero_instruction;
  s.eligible = !config.enforce_eligibility || s.perf_index >= config.performance.rho_min;
  const double gross = period.clearing_price * s.capacity_mw;
  s.payment = s.eligible ? s.perf_index * gross : 0.0;
  s.aging_cost = aging_cost_from_energy(trajectory.energy_mwh, spec);
  s.life_loss = s.aging_cost / (spec.energy_mwh * spec.replacement_cost_per_mwh);
  s.profit = s.payment - s.aging_cost;

  const double r_norm = period.signal.l1_norm();
  if (r_norm > 0.0 && s.capacity_mw > 0.0) {
    double mismatch = 0.0;
    for (std::size_t t = 0; t < trajectory.steps(); ++t) {
      mismatch += std::abs(trajectory.instruction_mw[t] - trajectory.dispatch_mw[t]);
    }
    s.penalty_equiv = config.performance.effective_delta() * period.clearing_price *
                      mismatch / r_norm;
  }
  return s;
}

Report backtest(std::span<const MarketPeriod> periods, const Strategy& strategy,
                const BatterySpec& spec, const MarketConfig& config) {
  spec.validate();
  config.validate();
  if (strategy.bidding == BiddingMode::kFixedCapacity &&
      !(strategy.capacity_mw >= 0.0 && strategy.capacity_mw <= spec.power_mw)) {
    throw Error(ErrorCode::kBadParams, "market: fixed capacity outside [0, B]");
  }
  Report report;
  report.rows.reserve(periods.size());
  std::deque<double> history;
  double history_sum = 0.0;
  double energy = spec.midpoint_mwh();
  double perf_sum = 0.0;
  std::size_t perf_count = 0;
  auto& sum = report.summary;

  for (const auto& source : periods) {
    if (std::abs(source.signal.duration_h() - config.settlement_h) >
        1e-9 * config.settlement_h) {
      std::ostringstream os;
      os << "market: period " << source.period_id << " covers "
         << source.signal.duration_h() << " h, expected " << config.settlement_h;
      throw Error(ErrorCode::kLengthMismatch, os.str());
    }
    double mu_lambda = config.mu_lambda;
    if (config.forecast == PriceForecast::kTrailingMean && !history.empty()) {
      mu_lambda = history_sum / static_cast<double>(history.size());
    }

    MarketPeriod period = source;
    period.cleared_capacity_mw =
        strategy.bidding == BiddingMode::kFixedCapacity
            ? strategy.capacity_mw
            : std::min(spec.power_mw,
                       strategy.bid_curve.cleared_capacity(period.clearing_price));

    RunOptions options;
    options.policy = strategy.policy;
    options.clearing_price = period.clearing_price;
    options.performance = config.performance;
    const auto trajectory =
        run_policy(period.signal, period.cleared_capacity_mw, spec,
                   config.penalty(mu_lambda, period.signal.interval_h), energy, options);
    energy = trajectory.final_energy();

    PeriodRow row;
    row.period_id = period.period_id;
    row.clearing_price = period.clearing_price;
    row.mu_lambda = mu_lambda;
    row.u_hat = trajectory.u_hat;
    row.settlement = settle_period(period, trajectory, spec, config);
    const auto& s = row.settlement;

    sum.market_income += s.payment;
    sum.aging_cost += s.aging_cost;
    sum.penalty_equiv += s.penalty_equiv;
    sum.profit += s.profit;
    sum.cumulative_life_loss += s.life_loss;
    sum.total_capacity_mwh += s.capacity_mw * config.settlement_h;
    if (s.capacity_mw > 0.0) {
      perf_sum += s.perf_index;
      ++perf_count;
      if (!s.eligible || s.perf_index < config.performance.rho_min) {
        sum.hours_under_performance += config.settlement_h;
      }
    }
    report.rows.push_back(row);

    history.push_back(period.clearing_price);
    history_sum += period.clearing_price;
    if (history.size() > config.trailing_window) {
      history_sum -= history.front();
      history.pop_front();
    }
  }
  sum.periods = periods.size();
  sum.average_performance =
      perf_count > 0 ? perf_sum / static_cast<double>(perf_count) : 1.0;
  const double elapsed_months =
      static_cast<double>(periods.size()) * config.settlement_h / kHoursPerMonth;
  sum.life_expectancy_months = life_expectancy(
      sum.cumulative_life_loss, elapsed_months, config.shelf_life_months);
  return report;
}

double life_expectancy(double cumulative_life_loss, double elapsed_months,
                       double shelf_life_months) {
  if (cumulative_life_loss < 0.0) {
    throw Error(ErrorCode::kBadParams, "market: life loss must be >= 0");
  }
  if (cumulative_life_loss == 0.0) return shelf_life_months;
  return std::min(shelf_life_months, elapsed_months / cumulative_life_loss);
}

std::vector<SweepRow> capacity_sweep(std::span<const MarketPeriod> periods,
                                     std::span<const double> capacities_mw,
                                     const BatterySpec& spec,
                                     const MarketConfig& config) {
  MarketConfig relaxed = config;
  relaxed.enforce_eligibility = false;
  const std::array policies{PolicyKind::kProposed, PolicyKind::kSimple};
  std::vector<SweepRow> rows(capacities_mw.size() * policies.size());
  std::vector<std::exception_ptr> errors(rows.size());
  std::atomic<std::size_t> next{0};

  // Each job is an independent battery; rows keep their input order.
  const auto work = [&] {
    for (std::size_t job = next++; job < rows.size(); job = next++) {
      try {
        const double c = capacities_mw[job / policies.size()];
        Strategy strategy;
        strategy.policy = policies[job % policies.size()];
        strategy.bidding = BiddingMode::kFixedCapacity;
        strategy.capacity_mw = c;
        const auto report = backtest(periods, strategy, spec, relaxed);
        SweepRow& row = rows[job];
        row.capacity_mw = c;
        row.policy = strategy.policy;
        for (const auto& r : report.rows) {
          row.gross_payment += r.clearing_price * c;
        }
        row.penalty = report.summary.penalty_equiv;
        row.aging = report.summary.aging_cost;
        row.profit = report.summary.profit;
      } catch (...) {
        errors[job] = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), rows.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::vector<double> synthesize_prices(std::uint64_t seed, std::size_t count,
                                      double mean_price, double volatility,
                                      double persistence) {
  if (!(mean_price >= 0.0) || !(volatility >= 0.0) ||
      !(persistence >= 0.0 && persistence < 1.0)) {
    throw Error(ErrorCode::kBadParams, "market: invalid price generator parameters");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innovation = volatility * std::sqrt(1.0 - persistence * persistence);
  double x = volatility * normal(rng);
  std::vector<double> prices;
  prices.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    prices.push_back(mean_price * std::exp(x - 0.5 * volatility * volatility));
    x = persistence * x + innovation * normal(rng);
  }
  return prices;
}

std::vector<MarketPeriod> make_periods(std::vector<RegulationSignal> signals,
                                       std::span<const double> prices) {
  if (prices.size() < signals.size()) {
    throw Error(ErrorCode::kLengthMismatch, "market: fewer prices than periods");
  }
  std::vector<MarketPeriod> periods;
  periods.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    MarketPeriod p;
    p.period_id = signals[i].period_id;
    p.clearing_price = prices[i];
    p.signal = std::move(signals[i]);
    periods.push_back(std::move(p));
  }
  return periods;
}

void write_report_csv(std::ostream& out, const Report& report) {
  using detail::format_double;
  out << "period_id,lambda,cleared_mw,perf_index,eligible,payment,aging,profit\n";
  for (const auto& row : report.rows) {
    const auto& s = row.settlement;
    out << row.period_id << ',' << format_double(row.clearing_price) << ','
        << format_double(s.capacity_mw) << ',' << format_double(s.perf_index) << ','
        << (s.eligible ? 1 : 0) << ',' << format_double(s.payment) << ','
        << format_double(s.aging_cost) << ',' << format_double(s.profit) << '\n';
  }
}

std::string summary_json(const ReportSummary& s) {
  nlohmann::ordered_json j;
  j["periods"] = s.periods;
  j["market_income"] = s.market_income;
  j["aging_cost"] = s.aging_cost;
  j["prorated_operating_profit"] = s.profit;
  j["penalty_equivalent"] = s.penalty_equiv;
  j["cumulative_life_loss"] = s.cumulative_life_loss;
  j["life_expectancy_months"] = s.life_expectancy_months;
  j["average_performance"] = s.average_performance;
  j["hours_under_performance"] = s.hours_under_performance;
  j["total_capacity_mwh"] = s.total_capacity_mwh;
  return j.dump(2);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  using detail::format_double;
  out << "capacity_mw,policy,gross_payment,penalty,aging,profit\n";
  for (const auto& r : rows) {
    out << format_double(r.capacity_mw) << ',' << to_string(r.policy) << ','
        << format_double(r.gross_payment) << ',' << format_double(r.penalty) << ','
        << format_double(r.aging) << ',' << format_double(r.profit) << '\n';
  }
}

}  // namespace regbid
