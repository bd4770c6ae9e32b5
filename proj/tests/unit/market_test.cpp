#include <doctest.h>

#include <cmath>
#include <sstream>

#include "regbid/errors.hpp"
#include "regbid/market.hpp"

using namespace regbid;

namespace {

MarketConfig config() {
  MarketConfig m;
  m.mu_r = 600.0;
  m.forecast = PriceForecast::kFixed;
  m.mu_lambda = 30.0;
  return m;
}

std::vector<MarketPeriod> year_slice(std::size_t n, double price) {
  SynthParams p;
  auto signals = synthesize_corpus(SignalKind::kOuProcess, 3, n, 1800, p, true, 0.95);
  return make_periods(std::move(signals), std::vector<double>(n, price));
}

Trajectory trajectory_with(const MarketPeriod& period, const std::vector<double>& dispatch,
                           double capacity) {
  Trajectory t;
  t.capacity_mw = capacity;
  t.interval_h = period.signal.interval_h;
  t.signal = period.signal.samples;
  const auto spec = reference_battery();
  double e = spec.midpoint_mwh();
  t.energy_mwh.push_back(e);
  for (std::size_t i = 0; i < dispatch.size(); ++i) {
    t.instruction_mw.push_back(capacity * t.signal[i]);
    t.dispatch_mw.push_back(dispatch[i]);
    e += energy_delta(dispatch[i], t.interval_h, spec.efficiency);
    t.energy_mwh.push_back(e);
  }
  return t;
}

}  // namespace

TEST_CASE("settle_period") {
  const auto spec = reference_battery();
  MarketPeriod period;
  period.clearing_price = 40.0;
  period.cleared_capacity_mw = 5.0;
  period.signal.samples.assign(1800, 0.0);
  for (std::size_t i = 0; i < 1800; ++i) period.signal.samples[i] = (i / 100) % 2 ? -0.2 : 0.2;

  std::vector<double> perfect;
  for (double r : period.signal.samples) perfect.push_back(5.0 * r);
  const auto ok = settle_period(period, trajectory_with(period, perfect, 5.0), spec, config());
  CHECK(ok.perf_index == 1.0);
  CHECK(ok.eligible);
  CHECK(ok.payment == doctest::Approx(200.0));
  CHECK(ok.profit == ok.payment - ok.aging_cost);
  CHECK(ok.aging_cost > 0.0);
  CHECK(ok.penalty_equiv == 0.0);

  const auto idle =
      settle_period(period, trajectory_with(period, std::vector<double>(1800, 0.0), 5.0), spec,
                    config());
  CHECK(idle.perf_index == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(idle.eligible);
  CHECK(idle.payment == 0.0);
  CHECK(idle.aging_cost == 0.0);
  CHECK(idle.penalty_equiv == doctest::Approx((2.0 / 3.0) * 40.0 * 5.0));

  MarketPeriod none = period;
  none.cleared_capacity_mw = 0.0;
  const auto zero =
      settle_period(none, trajectory_with(none, std::vector<double>(1800, 0.0), 0.0), spec,
                    config());
  CHECK(zero.payment == 0.0);
  CHECK(zero.profit == 0.0);

  auto shorter = trajectory_with(period, perfect, 5.0);
  shorter.dispatch_mw.pop_back();
  try {
    settle_period(period, shorter, spec, config());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
}

TEST_CASE("backtest") {
  const auto spec = reference_battery();
  const auto periods = year_slice(48, 25.0);
  Strategy fixed;
  fixed.capacity_mw = 10.0;
  const auto report = backtest(periods, fixed, spec, config());
  CHECK(report.summary.periods == 48);
  CHECK(report.summary.total_capacity_mwh == 480.0);
  for (const auto& row : report.rows) {
    CHECK(row.settlement.profit == row.settlement.payment - row.settlement.aging_cost);
  }
  CHECK(report.summary.profit ==
        doctest::Approx(report.summary.market_income - report.summary.aging_cost));

  const auto again = backtest(periods, fixed, spec, config());
  std::ostringstream a, b;
  write_report_csv(a, report);
  write_report_csv(b, again);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("period_id,lambda,cleared_mw,perf_index,eligible,payment,aging,profit\n", 0) == 0);

  Strategy bids;
  bids.bidding = BiddingMode::kBidCurve;
  bids.bid_curve.segments = {{100.0, 5.0}, {200.0, 5.0}};
  const auto priced_out = backtest(periods, bids, spec, config());
  CHECK(priced_out.summary.total_capacity_mwh == 0.0);
  CHECK(priced_out.summary.profit == 0.0);

  bids.bid_curve.segments = {{10.0, 3.0}, {20.0, 2.0}, {30.0, 5.0}};
  const auto partial = backtest(periods, bids, spec, config());
  CHECK(partial.summary.total_capacity_mwh == doctest::Approx(48.0 * 5.0));

  // Raising the eligibility bar never raises payment.
  double prev = 1e300;
  for (double rho : {0.4, 0.6, 0.7, 0.8, 0.9, 0.99}) {
    auto cfg = config();
    cfg.performance.rho_min = rho;
    const double paid = backtest(periods, fixed, spec, cfg).summary.market_income;
    CHECK(paid <= prev);
    prev = paid;
  }

  auto wrong = periods;
  wrong[3].signal.samples.pop_back();
  try {
    backtest(wrong, fixed, spec, config());
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
}

TEST_CASE("trailing price forecast starts from the fixed value") {
  const auto spec = reference_battery();
  auto periods = year_slice(5, 25.0);
  periods[0].clearing_price = 100.0;
  auto cfg = config();
  cfg.forecast = PriceForecast::kTrailingMean;
  cfg.mu_lambda = 30.0;
  Strategy fixed;
  fixed.capacity_mw = 5.0;
  const auto report = backtest(periods, fixed, spec, cfg);
  CHECK(report.rows[0].mu_lambda == 30.0);
  CHECK(report.rows[1].mu_lambda == doctest::Approx(100.0));
  CHECK(report.rows[2].mu_lambda == doctest::Approx(62.5));
}

TEST_CASE("life expectancy") {
  CHECK(life_expectancy(0.0, 12.0, 120.0) == 120.0);
  CHECK(life_expectancy(1.0, 12.0, 120.0) == 12.0);
  CHECK(life_expectancy(0.4, 12.0, 120.0) == doctest::Approx(30.0));
  CHECK(life_expectancy(0.01, 12.0, 120.0) == 120.0);
}

TEST_CASE("capacity sweep") {
  const auto spec = reference_battery();
  const auto periods = year_slice(6, 25.0);
  const std::vector<double> caps{0.0, 5.0};
  const auto rows = capacity_sweep(periods, caps, spec, config());
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    if (r.capacity_mw == 0.0) {
      CHECK(r.gross_payment == 0.0);
      CHECK(r.aging == 0.0);
      CHECK(r.profit == 0.0);
    }
  }
  std::ostringstream os;
  write_sweep_csv(os, rows);
  CHECK(os.str().rfind("capacity_mw,policy,gross_payment,penalty,aging,profit\n", 0) == 0);
}

TEST_CASE("prices and summary") {
  const auto a = synthesize_prices(4, 1000, 25.0, 0.4);
  CHECK(a == synthesize_prices(4, 1000, 25.0, 0.4));
  double mean = 0.0;
  for (double x : a) {
    CHECK(x > 0.0);
    mean += x / 1000.0;
  }
  CHECK(mean == doctest::Approx(25.0).epsilon(0.25));
  CHECK_THROWS_AS(synthesize_prices(4, 10, 25.0, 0.4, 1.0), Error);

  ReportSummary s;
  s.total_capacity_mwh = 87600.0;
  const auto json = summary_json(s);
  CHECK(json.find("\"total_capacity_mwh\": 87600.0") != std::string::npos);
  CHECK(json.find("\"life_expectancy_months\"") != std::string::npos);
}
