#include "regbid/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "csv_util.hpp"
#include "regbid/errors.hpp"

namespace regbid {
namespace {

double depth_price(double penalty_price, const BatterySpec& spec) {
  const double eta = spec.efficiency;
  // Written as (coefficient * pi) / R so that the half-cycle depths in
  // regret_bound coincide bit-for-bit with u_hat when eta = 1.
  return ((eta * eta + 1.0) / eta) * penalty_price / spec.replacement_cost_per_mwh;
}

void check_initial_energy(double e0, const BatterySpec& spec, const char* who) {
  if (!(e0 >= spec.e_min_mwh - kEnergyTolerance &&
        e0 <= spec.e_max_mwh + kEnergyTolerance)) {
    std::ostringstream os;
    os << who << ": initial energy " << e0 << " MWh outside [" << spec.e_min_mwh
       << ", " << spec.e_max_mwh << "]";
    throw Error(ErrorCode::kBadParams, os.str());
  }
}

void check_capacity(double capacity_mw, const BatterySpec& spec, const char* who) {
  if (!(capacity_mw >= 0.0 && capacity_mw <= spec.power_mw * (1.0 + 1e-12))) {
    std::ostringstream os;
    os << who << ": capacity " << capacity_mw << " MW outside [0, "
       << spec.power_mw << "]";
    throw Error(ErrorCode::kBadParams, os.str());
  }
}

}  // namespace

PenaltyModel PenaltyModel::with_price(double price_per_mwh, double interval_h) {
  PenaltyModel p;
  p.delta = 1.0;
  p.mu_r = 1.0;
  p.mu_lambda = price_per_mwh * interval_h;
  p.interval_h = interval_h;
  return p;
}

void PenaltyModel::validate() const {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "control: delta must lie in [0, 1]");
  }
  if (!(mu_lambda >= 0.0)) {
    throw Error(ErrorCode::kBadParams, "control: mu_lambda must be >= 0");
  }
  if (!(mu_r > 0.0) || !(interval_h > 0.0)) {
    throw Error(ErrorCode::kBadParams, "control: mu_r and interval must be > 0");
  }
}

double optimal_cycle_depth(double penalty_price, const BatterySpec& spec,
                           const StressFunction& stress) {
  return std::clamp(stress.derivative_inverse(depth_price(penalty_price, spec)),
                    0.0, 1.0);
}

double optimal_cycle_depth(const PenaltyModel& penalty, const BatterySpec& spec) {
  penalty.validate();
  return optimal_cycle_depth(penalty.penalty_price(), spec,
                             StressFunction::from_spec(spec));
}

ControlState start_control(double e0_mwh, double u_hat, const BatterySpec& spec) {
  ControlState s;
  s.e_running_max = e0_mwh;
  s.e_running_min = e0_mwh;
  s.u_hat = u_hat;
  s.upper_mwh = std::min(spec.e_max_mwh, e0_mwh + u_hat * spec.energy_mwh);
  s.lower_mwh = std::max(spec.e_min_mwh, e0_mwh - u_hat * spec.energy_mwh);
  return s;
}

PolicyStep policy_step(const ControlState& control, const BatteryState& battery,
                       double instruction_mw, const BatterySpec& spec,
                       double interval_h) {
  PolicyStep out;
  ControlState& c = out.control;
  c = control;
  c.e_running_max = std::max(c.e_running_max, battery.energy_mwh);
  c.e_running_min = std::min(c.e_running_min, battery.energy_mwh);
  const double band = c.u_hat * spec.energy_mwh;
  c.upper_mwh = std::min(spec.e_max_mwh, c.e_running_min + band);
  c.lower_mwh = std::max(spec.e_min_mwh, c.e_running_max - band);
  out.dispatch_mw = clamp_dispatch(battery, instruction_mw,
                                   EnergyBounds{c.lower_mwh, c.upper_mwh},
                                   interval_h, spec);
  out.battery = step(battery, out.dispatch_mw, interval_h, spec);
  return out;
}

double simple_dispatch(const BatteryState& battery, double instruction_mw,
                       const BatterySpec& spec, double interval_h) {
  return clamp_dispatch(battery, instruction_mw,
                        EnergyBounds{spec.e_min_mwh, spec.e_max_mwh}, interval_h,
                        spec);
}

const char* to_string(PolicyKind kind) noexcept {
  return kind == PolicyKind::kProposed ? "proposed" : "simple";
}

Trajectory run_policy(const RegulationSignal& signal, double capacity_mw,
                      const BatterySpec& spec, const PenaltyModel& penalty,
                      double e0_mwh, const RunOptions& options) {
  if (signal.empty()) {
    throw Error(ErrorCode::kSignalEmpty, "control: empty regulation signal");
  }
  check_capacity(capacity_mw, spec, "control");
  check_initial_energy(e0_mwh, spec, "control");
  penalty.validate();

  const double M = signal.interval_h;
  const std::size_t T = signal.size();
  Trajectory tr;
  tr.capacity_mw = capacity_mw;
  tr.interval_h = M;
  tr.penalty_price = penalty.penalty_price();
  tr.u_hat = options.policy == PolicyKind::kSimple
                 ? 1.0
                 : options.u_hat.value_or(optimal_cycle_depth(penalty, spec));
  tr.signal = signal.samples;
  tr.instruction_mw.resize(T);
  tr.dispatch_mw.resize(T);
  tr.upper_mwh.resize(T);
  tr.lower_mwh.resize(T);
  tr.energy_mwh.resize(T + 1);

  BatteryState battery{std::clamp(e0_mwh, spec.e_min_mwh, spec.e_max_mwh), 0};
  ControlState control = start_control(battery.energy_mwh, tr.u_hat, spec);
  tr.energy_mwh[0] = battery.energy_mwh;
  double mismatch = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double instruction = capacity_mw * signal.samples[t];
    tr.instruction_mw[t] = instruction;
    if (options.policy == PolicyKind::kProposed) {
      const PolicyStep ps = policy_step(control, battery, instruction, spec, M);
      control = ps.control;
      battery = ps.battery;
      tr.dispatch_mw[t] = ps.dispatch_mw;
      tr.upper_mwh[t] = control.upper_mwh;
      tr.lower_mwh[t] = control.lower_mwh;
    } else {
      const double b = simple_dispatch(battery, instruction, spec, M);
      battery = step(battery, b, M, spec);
      tr.dispatch_mw[t] = b;
      tr.upper_mwh[t] = spec.e_max_mwh;
      tr.lower_mwh[t] = spec.e_min_mwh;
    }
    tr.energy_mwh[t + 1] = battery.energy_mwh;
    mismatch += std::abs(instruction - tr.dispatch_mw[t]);
  }
  tr.mismatch_mwh = M * mismatch;
  tr.penalty_cost = tr.penalty_price * tr.mismatch_mwh;
  tr.aging_cost = aging_cost_from_energy(tr.energy_mwh, spec);
  tr.objective = tr.penalty_cost + tr.aging_cost;
  tr.perf_index =
      performance_index(tr.instruction_mw, tr.dispatch_mw, options.performance).value;
  if (options.clearing_price) {
    tr.profit = tr.perf_index * *options.clearing_price * capacity_mw - tr.aging_cost;
  }
  return tr;
}

double policy_objective(std::span<const double> instruction_mw,
                        std::span<const double> dispatch_mw, double e0_mwh,
                        const BatterySpec& spec, double penalty_price,
                        double interval_h) {
  if (instruction_mw.size() != dispatch_mw.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "control: instruction and dispatch lengths differ");
  }
  std::vector<double> energy(dispatch_mw.size() + 1);
  energy[0] = e0_mwh;
  double mismatch = 0.0;
  for (std::size_t t = 0; t < dispatch_mw.size(); ++t) {
    energy[t + 1] =
        energy[t] + energy_delta(dispatch_mw[t], interval_h, spec.efficiency);
    mismatch += std::abs(instruction_mw[t] - dispatch_mw[t]);
  }
  return penalty_price * interval_h * mismatch + aging_cost_from_energy(energy, spec);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& tr,
                          const BatterySpec& spec) {
  using detail::format_double;
  out << "t,r,instruction_mw,dispatch_mw,soc,E_hi_g,E_lo_g\n";
  for (std::size_t t = 0; t < tr.steps(); ++t) {
    out << t << ',' << format_double(tr.signal[t]) << ','
        << format_double(tr.instruction_mw[t]) << ','
        << format_double(tr.dispatch_mw[t]) << ','
        << format_double(tr.energy_mwh[t + 1] / spec.energy_mwh) << ','
        << format_double(tr.upper_mwh[t]) << ',' << format_double(tr.lower_mwh[t])
        << '\n';
  }
}

OracleResult offline_oracle(const RegulationSignal& signal, double capacity_mw,
                            const BatterySpec& spec, const PenaltyModel& penalty,
                            double e0_mwh, const OracleOptions& options) {
  if (signal.empty()) {
    throw Error(ErrorCode::kSignalEmpty, "control: empty regulation signal");
  }
  check_capacity(capacity_mw, spec, "control");
  check_initial_energy(e0_mwh, spec, "control");
  penalty.validate();
  if (options.levels < 2) {
    throw Error(ErrorCode::kBadParams, "control: oracle needs at least 2 levels");
  }
  const std::size_t T = signal.size();
  const double paths = std::pow(static_cast<double>(options.levels),
                                static_cast<double>(T));
  if (T > options.max_steps || paths > options.path_budget) {
    std::ostringstream os;
    os << "control: oracle instance with T=" << T << " and " << options.levels
       << " levels exceeds limits (max T " << options.max_steps << ", budget "
       << options.path_budget << " paths)";
    throw Error(ErrorCode::kInstanceTooLarge, os.str());
  }

  const double M = signal.interval_h;
  const double pi = penalty.penalty_price();
  const double scale = spec.energy_mwh * spec.replacement_cost_per_mwh;
  const auto stress = StressFunction::from_spec(spec);

  std::vector<std::vector<double>> grid(T);
  std::vector<double> instruction(T);
  for (std::size_t t = 0; t < T; ++t) {
    instruction[t] = capacity_mw * signal.samples[t];
    const int q = instruction[t] == 0.0 ? 1 : options.levels;
    for (int j = 0; j < q; ++j) {
      grid[t].push_back(q == 1 ? 0.0
                               : instruction[t] * static_cast<double>(j) /
                                     static_cast<double>(q - 1));
    }
  }

  OracleResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<double> soc(T + 1);
  std::vector<double> scratch;
  scratch.reserve(2 * T + 4);

  const auto full_cost = [&](std::span<const double> dispatch) {
    double mismatch = 0.0;
    soc[0] = e0_mwh / spec.energy_mwh;
    double e = e0_mwh;
    for (std::size_t t = 0; t < T; ++t) {
      e += energy_delta(dispatch[t], M, spec.efficiency);
      soc[t + 1] = e / spec.energy_mwh;
      mismatch += std::abs(instruction[t] - dispatch[t]);
    }
    double loss = 0.0;
    for_each_cycle(soc, scratch,
                   [&](double depth, double weight) { loss += weight * stress.value(depth); });
    return pi * M * mismatch + scale * loss;
  };

  if (!options.incumbent.empty()) {
    if (options.incumbent.size() != T) {
      throw Error(ErrorCode::kLengthMismatch,
                  "control: oracle incumbent length differs from the signal");
    }
    best.cost = full_cost(options.incumbent);
    best.dispatch_mw = options.incumbent;
    ++best.paths_evaluated;
  }

  // Depth-first enumeration with partial-penalty pruning; aging is
  // nonnegative so a partial penalty above the incumbent cannot win.
  std::vector<std::size_t> choice(T, 0);
  std::vector<double> energy(T + 1);
  std::vector<double> partial(T + 1, 0.0);
  std::vector<double> path(T);
  energy[0] = e0_mwh;
  std::size_t depth = 0;
  while (true) {
    if (choice[depth] >= grid[depth].size()) {
      if (depth == 0) break;
      choice[depth] = 0;
      --depth;
      ++choice[depth];
      continue;
    }
    const double b = grid[depth][choice[depth]];
    const double e = energy[depth] + energy_delta(b, M, spec.efficiency);
    const double p = partial[depth] + pi * M * std::abs(instruction[depth] - b);
    if (e > spec.e_max_mwh + kEnergyTolerance || e < spec.e_min_mwh - kEnergyTolerance ||
        p >= best.cost) {
      ++choice[depth];
      continue;
    }
    path[depth] = b;
    energy[depth + 1] = e;
    partial[depth + 1] = p;
    if (depth + 1 == T) {
      const double cost = full_cost(path);
      ++best.paths_evaluated;
      if (cost < best.cost) {
        best.cost = cost;
        best.dispatch_mw = path;
      }
      ++choice[depth];
      continue;
    }
    ++depth;
  }
  return best;
}

RegretBound regret_bound(double penalty_price, const BatterySpec& spec,
                         const StressFunction& stress) {
  const double eta = spec.efficiency;
  const double E = spec.energy_mwh;
  const double R = spec.replacement_cost_per_mwh;
  const double pi = penalty_price;
  const auto charge_value = [&](double v) {
    return pi * E * v / eta - 0.5 * E * R * stress.value(v);
  };
  const auto discharge_value = [&](double w) {
    return eta * pi * E * w - 0.5 * E * R * stress.value(w);
  };
  RegretBound rb;
  rb.u_hat = optimal_cycle_depth(pi, spec, stress);
  rb.v_hat = stress.derivative_inverse((2.0 / eta) * pi / R);
  rb.w_hat = stress.derivative_inverse((2.0 * eta) * pi / R);
  rb.epsilon = 2.0 * (discharge_value(rb.w_hat) - discharge_value(rb.u_hat)) +
               (charge_value(rb.v_hat) - charge_value(rb.u_hat));
  // v_hat and w_hat maximise their half-cycle values, so rounding is the
  // only way epsilon can dip below zero.
  rb.epsilon = std::max(rb.epsilon, 0.0);
  return rb;
}

RegretBound regret_bound(const PenaltyModel& penalty, const BatterySpec& spec) {
  penalty.validate();
  return regret_bound(penalty.penalty_price(), spec, StressFunction::from_spec(spec));
}

}  // namespace regbid
