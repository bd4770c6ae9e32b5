#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "regbid/battery.hpp"

namespace regbid {

inline constexpr double kFullCycle = 1.0;
inline constexpr double kHalfCycle = 0.5;

// Samples closer than this are treated as equal when extracting turning
// points.
inline constexpr double kTurningPointTolerance = 1e-12;

struct Cycle {
  double depth = 0.0;
  double weight = kFullCycle;  // kFullCycle or kHalfCycle

  friend bool operator==(const Cycle&, const Cycle&) = default;
};

struct CycleSet {
  std::vector<Cycle> cycles;
  std::size_t source_length = 0;

  // Sum of depth * weight; equals half the total variation of the series.
  double weighted_depth() const;
};

// Streaming four-point rainflow. Calls on_cycle(depth, weight) for every
// matched full cycle as it closes, then once per residue half cycle.
// `stack` is scratch storage reused across calls.
template <class OnCycle>
void for_each_cycle(std::span<const double> series, std::vector<double>& stack,
                    OnCycle&& on_cycle) {
  stack.clear();
  for (double x : series) {
    const std::size_t n = stack.size();
    if (n >= 1 && std::abs(x - stack[n - 1]) <= kTurningPointTolerance) {
      continue;
    }
    if (n >= 2 && (stack[n - 1] - stack[n - 2]) * (x - stack[n - 1]) > 0.0) {
      // Same direction: extend the current excursion.
      stack[n - 1] = x;
    } else {
      stack.push_back(x);
    }
    while (stack.size() >= 4) {
      const std::size_t m = stack.size();
      const double inner = std::abs(stack[m - 2] - stack[m - 3]);
      if (inner <= std::abs(stack[m - 3] - stack[m - 4]) &&
          inner <= std::abs(stack[m - 1] - stack[m - 2])) {
        on_cycle(inner, kFullCycle);
        stack[m - 3] = stack[m - 1];
        stack.resize(m - 2);
      } else {
        break;
      }
    }
  }
  for (std::size_t i = 1; i < stack.size(); ++i) {
    on_cycle(std::abs(stack[i] - stack[i - 1]), kHalfCycle);
  }
}

// Throws kEmptySeries on an empty series.
CycleSet rainflow(std::span<const double> soc_series);

// Cycle depth stress Phi(u) with its derivative phi and phi^-1.
// The power-law form k*u^alpha has closed-form inverses; any other
// monotone-derivative form uses bisection.
class StressFunction {
 public:
  static StressFunction power_law(double k, double alpha);
  static StressFunction from_spec(const BatterySpec& spec);
  // `derivative` must be nondecreasing on [0, 1].
  static StressFunction custom(std::function<double(double)> stress,
                               std::function<double(double)> derivative);

  // Phi(u); throws kOutOfRangeDepth outside [0, 1].
  double operator()(double depth) const;
  // Phi(u) without range checks.
  double value(double depth) const;
  double derivative(double depth) const;
  // phi^-1(y), clipped to [0, 1].
  double derivative_inverse(double y) const;

  bool is_power_law() const { return power_law_; }

 private:
  StressFunction() = default;

  bool power_law_ = true;
  double k_ = 0.0;
  double alpha_ = 2.0;
  std::function<double(double)> stress_;
  std::function<double(double)> derivative_;
};

inline constexpr double kInverseTolerance = 1e-10;

double stress(double depth, const BatterySpec& spec);
double phi_derivative(double depth, const BatterySpec& spec);
double phi_derivative_inverse(double y, const BatterySpec& spec);

// Sum of weight * Phi(depth): fraction of cycle life consumed.
double cycle_life_loss(const CycleSet& cycles, const StressFunction& stress);

// E * R * sum(weight * Phi(depth)) over rainflow(soc_series).
double aging_cost(std::span<const double> soc_series, const BatterySpec& spec);

// Same, taking energies in MWh and normalising by E.
double aging_cost_from_energy(std::span<const double> energy_mwh,
                              const BatterySpec& spec);

void write_cycles_csv(std::ostream& out, const CycleSet& cycles);

}  // namespace regbid
