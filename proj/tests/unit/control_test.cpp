#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "regbid/control.hpp"
#include "regbid/errors.hpp"

using namespace regbid;

namespace {

BatterySpec unit_battery(double efficiency) {
  BatterySpec b = reference_battery();
  b.energy_mwh = 1.0;
  b.e_max_mwh = 0.95;
  b.e_min_mwh = 0.1;
  b.efficiency = efficiency;
  return b;
}

RegulationSignal make_signal(std::vector<double> r, double interval_h) {
  RegulationSignal s;
  s.samples = std::move(r);
  s.interval_h = interval_h;
  return s;
}

}  // namespace

TEST_CASE("optimal cycle depth") {
  const auto stress = StressFunction::from_spec(reference_battery());
  auto spec = reference_battery();
  spec.efficiency = 1.0;
  CHECK(optimal_cycle_depth(50.0, spec, stress) == doctest::Approx(0.111).epsilon(0.01));
  CHECK(optimal_cycle_depth(100.0, spec, stress) == doctest::Approx(0.219).epsilon(0.005));
  CHECK(optimal_cycle_depth(0.0, spec, stress) == 0.0);
  CHECK(optimal_cycle_depth(1e6, spec, stress) == 1.0);
  spec.efficiency = 0.92;
  CHECK(optimal_cycle_depth(50.0, spec, stress) == doctest::Approx(0.112).epsilon(0.01));

  // Same depth through the penalty model.
  const auto penalty = PenaltyModel::with_price(50.0, 1.0 / 1800.0);
  CHECK(penalty.penalty_price() == doctest::Approx(50.0));
  CHECK(optimal_cycle_depth(penalty, spec) == optimal_cycle_depth(50.0, spec, stress));

  PenaltyModel p{2.0 / 3.0, 30.0, 600.0, 1.0 / 1800.0};
  CHECK(p.penalty_price() == doctest::Approx((2.0 / 3.0) * 30.0 / (600.0 / 1800.0)));
}

TEST_CASE("policy step") {
  const auto spec = reference_battery();
  const double M = 1.0 / 1800.0;
  auto control = start_control(1.5, 0.1, spec);
  CHECK(control.upper_mwh == doctest::Approx(1.5 + 0.3));
  CHECK(control.lower_mwh == doctest::Approx(1.5 - 0.3));
  const auto idle = policy_step(control, {1.5, 0}, 0.0, spec, M);
  CHECK(idle.dispatch_mw == 0.0);
  CHECK(idle.battery.energy_mwh == 1.5);
}

TEST_CASE("response is truncated once the band is used up") {
  auto spec = unit_battery(1.0);
  const double M = 1.0 / 180.0;
  const double u_hat = 0.1;
  auto control = start_control(0.5, u_hat, spec);
  BatteryState battery{0.5, 0};
  double top = battery.energy_mwh;
  for (int t = 0; t < 6; ++t) {
    const auto s = policy_step(control, battery, 10.0, spec, M);
    control = s.control;
    battery = s.battery;
    top = std::max(top, battery.energy_mwh);
    CHECK(control.e_running_min <= control.e_running_max);
  }
  CHECK(top == doctest::Approx(0.5 + u_hat * spec.energy_mwh).epsilon(1e-12));
  // Pinned at the upper bound: further charging is refused.
  CHECK(policy_step(control, battery, 10.0, spec, M).dispatch_mw == doctest::Approx(0.0).epsilon(1e-9));
  // Discharging is allowed and also stops after u_hat of travel.
  double bottom = battery.energy_mwh;
  for (int t = 0; t < 10; ++t) {
    const auto s = policy_step(control, battery, -10.0, spec, M);
    control = s.control;
    battery = s.battery;
    bottom = std::min(bottom, battery.energy_mwh);
  }
  CHECK(bottom == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("u_hat of one reproduces the simple policy bit for bit") {
  const auto spec = reference_battery();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int run = 0; run < 50; ++run) {
    std::vector<double> r(400);
    for (auto& x : r) x = u(rng);
    const auto signal = make_signal(r, 1.0 / 1800.0);
    RunOptions proposed;
    proposed.u_hat = 1.0;
    RunOptions simple;
    simple.policy = PolicyKind::kSimple;
    const auto penalty = PenaltyModel::with_price(50.0, signal.interval_h);
    const auto a = run_policy(signal, 10.0, spec, penalty, spec.midpoint_mwh(), proposed);
    const auto b = run_policy(signal, 10.0, spec, penalty, spec.midpoint_mwh(), simple);
    CHECK(a.dispatch_mw == b.dispatch_mw);
    CHECK(a.energy_mwh == b.energy_mwh);
  }
}

TEST_CASE("run_policy") {
  const auto spec = reference_battery();
  const auto penalty = PenaltyModel::with_price(50.0, 1.0 / 1800.0);
  SUBCASE("zero signal") {
    RunOptions opts;
    opts.clearing_price = 30.0;
    const auto t = run_policy(make_signal(std::vector<double>(100, 0.0), 1.0 / 1800.0), 10.0,
                              spec, penalty, spec.midpoint_mwh(), opts);
    CHECK(t.penalty_cost == 0.0);
    CHECK(t.aging_cost == 0.0);
    REQUIRE(t.profit.has_value());
    CHECK(*t.profit == doctest::Approx(300.0));
    CHECK(t.energy_mwh.size() == 101);
  }
  SUBCASE("errors") {
    const auto code_of = [&](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::kInvalidSpec;
    };
    CHECK(code_of([&] { run_policy(make_signal({}, 1.0 / 1800.0), 10.0, spec, penalty, 1.5); }) ==
          ErrorCode::kSignalEmpty);
    CHECK(code_of([&] { run_policy(make_signal({0.1}, 1.0 / 1800.0), 11.0, spec, penalty, 1.5); }) ==
          ErrorCode::kBadParams);
    CHECK(code_of([&] { run_policy(make_signal({0.1}, 1.0 / 1800.0), 5.0, spec, penalty, 0.1); }) ==
          ErrorCode::kBadParams);
  }
  SUBCASE("objective decomposes") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> r(1800);
    for (auto& x : r) x = u(rng);
    const auto t = run_policy(make_signal(r, 1.0 / 1800.0), 10.0, spec, penalty, 1.5);
    CHECK(t.objective == doctest::Approx(t.penalty_cost + t.aging_cost));
    CHECK(t.objective == doctest::Approx(policy_objective(t.instruction_mw, t.dispatch_mw, 1.5,
                                                          spec, 50.0, 1.0 / 1800.0)));
  }
}

TEST_CASE("trajectory csv") {
  const auto spec = reference_battery();
  const auto t = run_policy(make_signal({0.5, -0.5}, 1.0 / 1800.0), 10.0, spec,
                            PenaltyModel::with_price(50.0, 1.0 / 1800.0), 1.5);
  std::ostringstream os;
  write_trajectory_csv(os, t, spec);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,r,instruction_mw,dispatch_mw,soc,E_hi_g,E_lo_g");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("offline oracle") {
  const auto spec = unit_battery(1.0);
  const double M = 1.0 / 180.0;
  const auto penalty = PenaltyModel::with_price(50.0, M);

  const auto zero = offline_oracle(make_signal(std::vector<double>(6, 0.0), M), 10.0, spec,
                                   penalty, 0.5);
  CHECK(zero.cost == 0.0);
  CHECK(zero.dispatch_mw == std::vector<double>(6, 0.0));

  SUBCASE("deep pulse is truncated near u_hat") {
    const auto signal = make_signal({1, 1, 1, 1, -1, -1, -1, -1}, M);
    const auto result = offline_oracle(signal, 10.0, spec, penalty, 0.5);
    double e = 0.5, hi = 0.5, lo = 0.5;
    for (double b : result.dispatch_mw) {
      e += energy_delta(b, M, spec.efficiency);
      hi = std::max(hi, e);
      lo = std::min(lo, e);
    }
    const double u_hat = optimal_cycle_depth(penalty, spec);
    const double grain = 10.0 * M / 4.0 / spec.energy_mwh;
    CHECK(std::abs((hi - lo) / spec.energy_mwh - u_hat) <= grain + 1e-9);

    // Without the policy path as incumbent the grid optimum can only miss
    // the policy by the quantisation slack, in either direction.
    const auto policy = run_policy(signal, 10.0, spec, penalty, 0.5);
    const double slack = 50.0 * 10.0 * M * 8.0 / 5.0;
    CHECK(std::abs(policy.objective - result.cost) <= slack);
  }

  SUBCASE("budget") {
    const auto long_signal = make_signal(std::vector<double>(9, 0.5), M);
    try {
      offline_oracle(long_signal, 10.0, spec, penalty, 0.5);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInstanceTooLarge);
    }
    OracleOptions opts;
    opts.levels = 30;
    CHECK_THROWS_AS(offline_oracle(make_signal(std::vector<double>(5, 0.5), M), 10.0, spec,
                                   penalty, 0.5, opts),
                    Error);
  }
}

TEST_CASE("oracle never loses to the policy") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0), soc(0.2, 0.85);
  const double M = 1.0 / 360.0;
  for (double eta : {1.0, 0.92}) {
    const auto spec = unit_battery(eta);
    const auto penalty = PenaltyModel::with_price(50.0, M);
    for (int run = 0; run < 20; ++run) {
      std::vector<double> r(6);
      for (auto& x : r) x = u(rng);
      const auto signal = make_signal(r, M);
      const double e0 = soc(rng);
      const auto policy = run_policy(signal, 10.0, spec, penalty, e0);
      OracleOptions opts;
      opts.incumbent = policy.dispatch_mw;
      const auto best = offline_oracle(signal, 10.0, spec, penalty, e0, opts);
      CHECK(best.cost <= policy.objective + 1e-12);
    }
  }
}

TEST_CASE("regret bound") {
  auto spec = unit_battery(1.0);
  for (double pi : {50.0, 100.0, 200.0}) {
    const auto rb = regret_bound(PenaltyModel::with_price(pi, 1.0 / 1800.0), spec);
    CHECK(rb.epsilon == 0.0);
    CHECK(rb.v_hat == rb.u_hat);
    CHECK(rb.w_hat == rb.u_hat);
  }
  spec.efficiency = 0.92;
  const auto rb = regret_bound(PenaltyModel::with_price(50.0, 1.0 / 1800.0), spec);
  CHECK(rb.epsilon == doctest::Approx(0.06).epsilon(0.1));
  CHECK(rb.w_hat < rb.u_hat);
  CHECK(rb.u_hat < rb.v_hat);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> price(0.0, 500.0), eta(0.5, 1.0), alpha(1.1, 3.0);
  for (int run = 0; run < 1000; ++run) {
    auto s = unit_battery(eta(rng));
    s.stress_alpha = alpha(rng);
    CHECK(regret_bound(price(rng), s, StressFunction::from_spec(s)).epsilon >= 0.0);
  }
  CHECK_THROWS_AS(StressFunction::power_law(1e-3, 0.5), Error);
}
