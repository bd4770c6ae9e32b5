#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "regbid/errors.hpp"
#include "regbid/rainflow.hpp"
#include "support/reference_rainflow.hpp"

using namespace regbid;

namespace {

std::vector<std::pair<double, double>> sorted_cycles(const CycleSet& set) {
  std::vector<std::pair<double, double>> v;
  for (const auto& c : set.cycles) v.emplace_back(c.depth, c.weight);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::pair<double, double>> sorted_reference(const std::vector<double>& s) {
  std::vector<std::pair<double, double>> v;
  for (const auto& c : testing::reference_rainflow(s)) v.emplace_back(c.range, c.count);
  std::sort(v.begin(), v.end());
  return v;
}

double total_variation(const std::vector<double>& s) {
  double tv = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) tv += std::abs(s[i] - s[i - 1]);
  return tv;
}

}  // namespace

TEST_CASE("rainflow basics") {
  CHECK(rainflow(std::vector<double>{0.5}).cycles.empty());
  CHECK(rainflow(std::vector<double>{0.5}).source_length == 1);

  const auto tri = rainflow(std::vector<double>{0.2, 0.8, 0.2});
  REQUIRE(tri.cycles.size() == 2);
  for (const auto& c : tri.cycles) {
    CHECK(c.depth == doctest::Approx(0.6));
    CHECK(c.weight == 0.5);
  }

  const auto mono = rainflow(std::vector<double>{0.1, 0.2, 0.35, 0.4});
  REQUIRE(mono.cycles.size() == 1);
  CHECK(mono.cycles[0].depth == doctest::Approx(0.3));
  CHECK(mono.cycles[0].weight == 0.5);

  // A small inner cycle inside a big swing is matched as a full cycle.
  const auto inner = rainflow(std::vector<double>{0.0, 0.8, 0.5, 0.7, 0.1});
  int full = 0;
  for (const auto& c : inner.cycles) {
    if (c.weight == 1.0) {
      ++full;
      CHECK(c.depth == doctest::Approx(0.2));
    }
  }
  CHECK(full == 1);

  try {
    rainflow(std::vector<double>{});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptySeries);
  }
}

TEST_CASE("rainflow matches the reference on random series") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 300; ++run) {
    std::vector<double> s(50);
    for (auto& x : s) x = u(rng);
    REQUIRE(sorted_cycles(rainflow(s)) == sorted_reference(s));
  }
}

TEST_CASE("weighted depth is half the total variation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 200);
  for (int run = 0; run < 500; ++run) {
    std::vector<double> s(static_cast<std::size_t>(len(rng)));
    for (auto& x : s) x = u(rng);
    CHECK(rainflow(s).weighted_depth() == doctest::Approx(0.5 * total_variation(s)).epsilon(1e-9));
  }
}

TEST_CASE("repeating samples leaves the depth set unchanged") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 100; ++run) {
    std::vector<double> s(40), stretched;
    for (auto& x : s) {
      x = u(rng);
      stretched.insert(stretched.end(), 3, x);
    }
    CHECK(sorted_cycles(rainflow(s)) == sorted_cycles(rainflow(stretched)));
  }
}

TEST_CASE("stress function") {
  const auto spec = reference_battery();
  CHECK(stress(0.0, spec) == 0.0);
  CHECK(stress(0.8, spec) == doctest::Approx(1.57e-3 * std::pow(0.8, 2.03)));
  CHECK(stress(0.8, spec) == doctest::Approx(1e-3).epsilon(0.01));
  CHECK(stress(0.1, spec) == doctest::Approx(1.465e-5).epsilon(1e-3));
  CHECK_THROWS_AS(stress(-0.1, spec), Error);
  CHECK_THROWS_AS(stress(1.01, spec), Error);
  CHECK_NOTHROW(stress(1.0 + 5e-10, spec));

  CHECK(phi_derivative(0.5, spec) ==
        doctest::Approx(1.57e-3 * 2.03 * std::pow(0.5, 1.03)));
  for (double y : {1e-6, 1e-4, 2e-3}) {
    CHECK(phi_derivative(phi_derivative_inverse(y, spec), spec) ==
          doctest::Approx(y).epsilon(1e-10));
  }
  CHECK(phi_derivative_inverse(phi_derivative(1.0, spec) * 2.0, spec) == 1.0);
  CHECK(phi_derivative_inverse(2.0 * 50.0 / 300000.0, spec) == doctest::Approx(0.111).epsilon(0.01));

  CHECK_THROWS_AS(StressFunction::power_law(1e-3, 1.0), Error);
  try {
    StressFunction::power_law(1e-3, 0.9);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonMonotoneStress);
  }
}

TEST_CASE("custom stress inverts by bisection") {
  const auto quad = StressFunction::custom([](double u) { return 2e-3 * u * u; },
                                           [](double u) { return 4e-3 * u; });
  CHECK_FALSE(quad.is_power_law());
  CHECK(quad.derivative_inverse(1e-3) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(std::abs(quad.derivative_inverse(1e-3) - 0.25) <= 1e-10);
  CHECK(quad.derivative_inverse(1.0) == 1.0);
  CHECK(quad.derivative_inverse(0.0) == 0.0);
  const auto law = StressFunction::power_law(1.57e-3, 2.03);
  const auto numeric = StressFunction::custom([&](double u) { return law.value(u); },
                                              [&](double u) { return law.derivative(u); });
  for (double y : {1e-5, 3e-4, 1e-3}) {
    CHECK(std::abs(numeric.derivative_inverse(y) - law.derivative_inverse(y)) <= 1e-9);
  }
}

TEST_CASE("aging cost") {
  auto spec = reference_battery();
  CHECK(aging_cost(std::vector<double>{0.4, 0.4, 0.4}, spec) == 0.0);
  spec.energy_mwh = 1.0;
  spec.e_max_mwh = 0.95;
  spec.e_min_mwh = 0.1;
  // One full 0.1 cycle: two half cycles of depth 0.1.
  CHECK(aging_cost(std::vector<double>{0.5, 0.6, 0.5}, spec) ==
        doctest::Approx(300000.0 * 1.57e-3 * std::pow(0.1, 2.03)));
  CHECK(aging_cost(std::vector<double>{0.5, 0.6, 0.5}, spec) == doctest::Approx(4.39).epsilon(2e-3));
  CHECK(aging_cost(std::vector<double>{0.1, 0.9, 0.1}, spec) == doctest::Approx(299.4).epsilon(1e-3));
}

TEST_CASE("aging cost is nonnegative and zero only when constant") {
  const auto spec = reference_battery();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 200; ++run) {
    std::vector<double> s(30);
    for (auto& x : s) x = u(rng);
    CHECK(aging_cost(s, spec) > 0.0);
  }
}

TEST_CASE("splitting a cycle never raises cost under convex stress") {
  const auto law = StressFunction::power_law(1.57e-3, 2.03);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 1000; ++run) {
    const double depth = u(rng);
    const double split = u(rng);
    CHECK(law.value(split * depth) + law.value((1.0 - split) * depth) <=
          law.value(depth) + 1e-18);
  }
}

TEST_CASE("cycles csv") {
  std::ostringstream os;
  write_cycles_csv(os, rainflow(std::vector<double>{0.2, 0.8, 0.2}));
  CHECK(os.str() == "depth,weight\n0.6000000000000001,0.5\n0.6000000000000001,0.5\n");
}
