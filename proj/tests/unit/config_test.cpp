#include <doctest.h>

#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"

using namespace regbid;
using namespace regbid::cli;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string failing_field(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults run without a file") {
  const auto c = default_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.uhat_cases.size() == 5);
  CHECK(c.battery.power_mw == 10.0);
  CHECK(c.market.performance.rho_min == 0.7);
  CHECK(c.corpus.periods == 8760);
  CHECK(c.segments.size() == 10);
}

TEST_CASE("sections and keys") {
  const auto c = parse(
      "[battery]\nenergy_mwh = 1\nsoc_max = 0.9\nsoc_min = 0.2\n"
      "[market]\nrho_min = 0.75\ninterval_seconds = 4\nmu_lambda_source = fixed\n"
      "[uhat]\ncases = 50:1:100, 80:0.9:10\n"
      "[experiment]\ngamma_grid = 0:0.1:0.02\npolicy = simple\nbidding = bid-curve\n");
  CHECK(c.battery.energy_mwh == 1.0);
  CHECK(c.battery.e_max_mwh == doctest::Approx(0.9));
  CHECK(c.battery.e_min_mwh == doctest::Approx(0.2));
  CHECK(c.market.performance.rho_min == 0.75);
  CHECK(c.interval_h == doctest::Approx(4.0 / 3600.0));
  CHECK(c.corpus.params.interval_h == c.interval_h);
  CHECK(c.market.forecast == PriceForecast::kFixed);
  REQUIRE(c.uhat_cases.size() == 2);
  CHECK(c.uhat_cases[1].efficiency == 0.9);
  CHECK(c.gamma_grid.size() == 6);
  CHECK(c.policy == PolicyKind::kSimple);
  CHECK(c.bidding == BiddingMode::kBidCurve);
}

TEST_CASE("bad configs name the field") {
  CHECK(failing_field("[battery]\nvoltage = 3\n") == "battery.voltage");
  CHECK(failing_field("[weather]\nx = 1\n") == "weather");
  CHECK(failing_field("[market]\nrho_min = 0.2\n") == "market.rho_min");
  CHECK(failing_field("[market]\nxi = 1.5\n") == "market.xi");
  CHECK(failing_field("[battery]\npower_mw = ten\n") == "battery.power_mw");
  CHECK(failing_field("[corpus]\nsource = csv\n") == "corpus.path");
  CHECK(failing_field("[battery]\nsoc_min = 0.99\n") == "battery");
  CHECK(failing_field("[market]\ninterval_seconds = 7\n") == "market.settlement_hours");
  CHECK(failing_field("[experiment]\ncapacity_mw = 12\n") == "experiment.capacity_mw");
  CHECK(failing_field("[uhat]\ncases = 50:1\n") == "uhat.cases");
}

TEST_CASE("hash tracks config text and seed") {
  auto a = parse("[market]\nrho_min = 0.75\n");
  auto b = parse("[market]\nrho_min = 0.8\n");
  CHECK(a.hash() != b.hash());
  CHECK(a.hash() == parse("[market]\nrho_min = 0.75\n").hash());
  CHECK(a.hash().size() == 16);
  const auto before = a.hash();
  a.apply_seed(99);
  CHECK(a.hash() != before);
  CHECK(a.corpus.seed == 99);
  CHECK(header_line(a).rfind("# regbid 0.1.0 config=", 0) == 0);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::kBadParams) == 2);
  CHECK(exit_code_for(ErrorCode::kParseError) == 3);
  CHECK(exit_code_for(ErrorCode::kGapError) == 3);
  CHECK(exit_code_for(ErrorCode::kCapExceeded) == 4);
  CHECK(exit_code_for(ErrorCode::kOutOfRange) == 4);
}

TEST_CASE("inline comments") {
  const auto c = parse("[battery]   ; the pack\npower_mw = 8   ; MW\n# full line\n[market]\nxi = 0.8 # confidence\n");
  CHECK(c.battery.power_mw == 8.0);
  CHECK(c.xi == 0.8);
}
