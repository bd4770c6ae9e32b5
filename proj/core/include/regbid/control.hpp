#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "regbid/battery.hpp"
#include "regbid/performance.hpp"
#include "regbid/rainflow.hpp"
#include "regbid/signal.hpp"

namespace regbid {

// Mismatch penalty price pi = delta * mu_lambda / (mu_r * M) in $/MWh.
// The price is always derived from the current fields.
struct PenaltyModel {
  double delta = 2.0 / 3.0;
  double mu_lambda = 0.0;                  // expected clearing price, $/MW
  double mu_r = 1.0;                       // expected ||r||_1 per period
  double interval_h = kDefaultIntervalHours;

  double penalty_price() const { return delta * mu_lambda / (mu_r * interval_h); }

  // A model whose penalty_price() equals `price_per_mwh`.
  static PenaltyModel with_price(double price_per_mwh, double interval_h);

  void validate() const;
};

// u_hat = phi^-1((eta^2 + 1) / (eta R) * pi), clipped to [0, 1].
double optimal_cycle_depth(double penalty_price, const BatterySpec& spec,
                           const StressFunction& stress);
double optimal_cycle_depth(const PenaltyModel& penalty, const BatterySpec& spec);

// Running energy marks and the dynamic energy band enforced by the
// threshold policy.
struct ControlState {
  double e_running_max = 0.0;
  double e_running_min = 0.0;
  double upper_mwh = 0.0;
  double lower_mwh = 0.0;
  double u_hat = 1.0;
};

// Marks collapsed onto e0; used at the start of every market period.
ControlState start_control(double e0_mwh, double u_hat, const BatterySpec& spec);

struct PolicyStep {
  double dispatch_mw = 0.0;
  ControlState control;
  BatteryState battery;
};

// One interval of the threshold policy: refresh the running marks with the
// current energy, tighten the band to width u_hat * E, then follow the
// instruction as far as the band allows.
PolicyStep policy_step(const ControlState& control, const BatteryState& battery,
                       double instruction_mw, const BatterySpec& spec,
                       double interval_h);

// Benchmark policy: follow the instruction within [e_min, e_max] only.
double simple_dispatch(const BatteryState& battery, double instruction_mw,
                       const BatterySpec& spec, double interval_h);

enum class PolicyKind { kProposed, kSimple };

const char* to_string(PolicyKind kind) noexcept;

struct RunOptions {
  PolicyKind policy = PolicyKind::kProposed;
  // Overrides the depth computed from the penalty model.
  std::optional<double> u_hat;
  // Realised clearing price; enables the profit figure.
  std::optional<double> clearing_price;
  PerformanceConfig performance;
};

struct Trajectory {
  double capacity_mw = 0.0;
  double interval_h = kDefaultIntervalHours;
  double u_hat = 1.0;
  double penalty_price = 0.0;
  std::vector<double> signal;
  std::vector<double> instruction_mw;
  std::vector<double> dispatch_mw;
  std::vector<double> energy_mwh;  // T + 1 entries, starting at e0
  std::vector<double> upper_mwh;
  std::vector<double> lower_mwh;

  double mismatch_mwh = 0.0;  // M * ||Cr - b||_1
  double penalty_cost = 0.0;  // pi * mismatch_mwh
  double aging_cost = 0.0;
  double objective = 0.0;     // penalty_cost + aging_cost
  double perf_index = 1.0;
  std::optional<double> profit;

  std::size_t steps() const { return dispatch_mw.size(); }
  double final_energy() const { return energy_mwh.back(); }
};

// Throws kSignalEmpty on an empty signal and kBadParams for C outside
// [0, B] or e0 outside the energy limits.
Trajectory run_policy(const RegulationSignal& signal, double capacity_mw,
                      const BatterySpec& spec, const PenaltyModel& penalty,
                      double e0_mwh, const RunOptions& options = {});

// pi * M * ||Cr - b||_1 + A(b) for an arbitrary dispatch sequence.
double policy_objective(std::span<const double> instruction_mw,
                        std::span<const double> dispatch_mw, double e0_mwh,
                        const BatterySpec& spec, double penalty_price,
                        double interval_h);

// t,r,instruction_mw,dispatch_mw,soc,E_hi_g,E_lo_g
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const BatterySpec& spec);

struct OracleOptions {
  int levels = 5;              // per-step grid points from 0 to C*r_t
  std::size_t max_steps = 8;
  double path_budget = 1e6;
  // Extra complete dispatch path evaluated alongside the grid.
  std::vector<double> incumbent;
};

struct OracleResult {
  double cost = 0.0;
  std::vector<double> dispatch_mw;
  std::size_t paths_evaluated = 0;
};

// Exhaustive search over quantised dispatch paths that never exceed the
// instruction and respect the power and energy limits. Every complete
// path is costed with a full rainflow pass. Throws kInstanceTooLarge when
// T > max_steps or levels^T > path_budget.
OracleResult offline_oracle(const RegulationSignal& signal, double capacity_mw,
                            const BatterySpec& spec, const PenaltyModel& penalty,
                            double e0_mwh, const OracleOptions& options = {});

struct RegretBound {
  double u_hat = 0.0;
  double v_hat = 0.0;   // best depth for a charging half cycle
  double w_hat = 0.0;   // best depth for a discharging half cycle
  double epsilon = 0.0; // $ per market period
};

// Worst-case loss on the unmatched residue of one period:
//   eps = 2 Jw(w_hat) + Jv(v_hat) - 2 Jw(u_hat) - Jv(u_hat)
// with Jv(v) = pi E v / eta - E R Phi(v) / 2 and Jw(w) = eta pi E w - E R Phi(w) / 2.
RegretBound regret_bound(double penalty_price, const BatterySpec& spec,
                         const StressFunction& stress);
RegretBound regret_bound(const PenaltyModel& penalty, const BatterySpec& spec);

}  // namespace regbid
