#include "regbid/battery.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "regbid/errors.hpp"

namespace regbid {
namespace {

void require(bool ok, const char* field, const std::string& why) {
  if (!ok) {
    throw Error(ErrorCode::kInvalidSpec,
                std::string("battery: ") + field + " " + why);
  }
}

}  // namespace

void BatterySpec::validate() const {
  require(std::isfinite(power_mw) && power_mw > 0.0, "power_mw", "must be > 0");
  require(std::isfinite(energy_mwh) && energy_mwh > 0.0, "energy_mwh",
          "must be > 0");
  require(e_min_mwh >= 0.0, "e_min", "must be >= 0");
  require(e_min_mwh < e_max_mwh, "e_min", "must be < e_max");
  require(e_max_mwh <= energy_mwh * (1.0 + 1e-12), "e_max",
          "must not exceed energy capacity");
  require(efficiency > 0.0 && efficiency <= 1.0, "efficiency",
          "must lie in (0, 1]");
  require(replacement_cost_per_mwh > 0.0, "replacement_cost_per_mwh",
          "must be > 0");
  require(stress_k > 0.0, "stress_k", "must be > 0");
  require(stress_alpha > 1.0, "stress_alpha",
          "must be > 1 for a strictly convex stress function");
}

BatterySpec reference_battery() { return BatterySpec{}; }

double energy_delta(double dispatch_mw, double interval_h, double efficiency) {
  if (dispatch_mw >= 0.0) {
    return interval_h * efficiency * dispatch_mw;
  }
  return interval_h * dispatch_mw / efficiency;
}

BatteryState step(const BatteryState& state, double dispatch_mw,
                  double interval_h, const BatterySpec& spec) {
  if (!(std::abs(dispatch_mw) <= spec.power_mw * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << "battery: dispatch " << dispatch_mw << " MW exceeds power rating "
       << spec.power_mw << " MW";
    throw Error(ErrorCode::kInvalidDispatch, os.str());
  }
  double next =
      state.energy_mwh + energy_delta(dispatch_mw, interval_h, spec.efficiency);
  if (next > spec.e_max_mwh + kEnergyTolerance ||
      next < spec.e_min_mwh - kEnergyTolerance) {
    std::ostringstream os;
    os << "battery: energy " << next << " MWh outside [" << spec.e_min_mwh
       << ", " << spec.e_max_mwh << "] at interval " << state.interval;
    throw Error(ErrorCode::kBoundsViolation, os.str());
  }
  next = std::clamp(next, spec.e_min_mwh, spec.e_max_mwh);
  return BatteryState{next, state.interval + 1};
}

double clamp_dispatch(const BatteryState& state, double requested_mw,
                      EnergyBounds bounds, double interval_h,
                      const BatterySpec& spec) {
  const double eta = spec.efficiency;
  const double e = state.energy_mwh;
  if (requested_mw >= 0.0) {
    const double room = (bounds.upper_mwh - e) / (interval_h * eta);
    return std::max(0.0, std::min(room, requested_mw));
  }
  const double room = eta * (bounds.lower_mwh - e) / interval_h;
  return std::min(0.0, std::max(room, requested_mw));
}

}  // namespace regbid
