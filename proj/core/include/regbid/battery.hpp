#pragma once

#include <cstddef>

namespace regbid {

// Sign convention throughout the library: positive dispatch charges the
// battery, negative dispatch discharges it.

struct BatterySpec {
  double power_mw = 10.0;                    // B
  double energy_mwh = 3.0;                   // E
  double e_max_mwh = 0.95 * 3.0;             // upper energy limit
  double e_min_mwh = 0.10 * 3.0;             // lower energy limit
  double efficiency = 0.95;                  // one-way charge/discharge
  double replacement_cost_per_mwh = 300'000.0;
  double stress_k = 1.57e-3;
  double stress_alpha = 2.03;

  double usable_energy_mwh() const { return e_max_mwh - e_min_mwh; }
  double midpoint_mwh() const { return 0.5 * (e_min_mwh + e_max_mwh); }

  // Throws Error(kInvalidSpec) naming the offending field.
  void validate() const;
};

// 10 MW / 3 MWh NMC system used throughout the simulation studies:
// 95% one-way efficiency, SoC window 10%..95%, $300/kWh cell replacement,
// stress 1.57e-3 * u^2.03.
BatterySpec reference_battery();

struct BatteryState {
  double energy_mwh = 0.0;
  std::size_t interval = 0;
};

struct EnergyBounds {
  double lower_mwh = 0.0;
  double upper_mwh = 0.0;
};

// Absolute tolerance on energy-limit checks (MWh).
inline constexpr double kEnergyTolerance = 1e-9;

// Energy change over one interval for a given dispatch.
double energy_delta(double dispatch_mw, double interval_h, double efficiency);

// Advances the state by one dispatch interval.
// Throws kInvalidDispatch if |dispatch| > B and kBoundsViolation if the new
// energy leaves [e_min, e_max].
BatteryState step(const BatteryState& state, double dispatch_mw,
                  double interval_h, const BatterySpec& spec);

// Largest dispatch in the direction of `requested_mw` (and no larger in
// magnitude) that keeps the energy inside `bounds` after one step.
double clamp_dispatch(const BatteryState& state, double requested_mw,
                      EnergyBounds bounds, double interval_h,
                      const BatterySpec& spec);

}  // namespace regbid
