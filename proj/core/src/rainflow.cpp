#include "regbid/rainflow.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <utility>

#include "csv_util.hpp"
#include "regbid/errors.hpp"

namespace regbid {

double CycleSet::weighted_depth() const {
  double total = 0.0;
  for (const auto& c : cycles) total += c.depth * c.weight;
  return total;
}

CycleSet rainflow(std::span<const double> soc_series) {
  if (soc_series.empty()) {
    throw Error(ErrorCode::kEmptySeries, "rainflow: empty SoC series");
  }
  CycleSet out;
  out.source_length = soc_series.size();
  std::vector<double> stack;
  stack.reserve(64);
  for_each_cycle(soc_series, stack, [&](double depth, double weight) {
    out.cycles.push_back(Cycle{depth, weight});
  });
  return out;
}

StressFunction StressFunction::power_law(double k, double alpha) {
  if (!(alpha > 1.0)) {
    throw Error(ErrorCode::kNonMonotoneStress,
                "rainflow: stress exponent must exceed 1");
  }
  if (!(k > 0.0)) {
    throw Error(ErrorCode::kNonMonotoneStress,
                "rainflow: stress coefficient must be positive");
  }
  StressFunction f;
  f.power_law_ = true;
  f.k_ = k;
  f.alpha_ = alpha;
  return f;
}

StressFunction StressFunction::from_spec(const BatterySpec& spec) {
  return power_law(spec.stress_k, spec.stress_alpha);
}

StressFunction StressFunction::custom(std::function<double(double)> stress,
                                      std::function<double(double)> derivative) {
  if (!stress || !derivative) {
    throw Error(ErrorCode::kBadParams, "rainflow: custom stress needs both functions");
  }
  if (!(derivative(1.0) > derivative(0.0))) {
    throw Error(ErrorCode::kNonMonotoneStress,
                "rainflow: stress derivative must increase on [0, 1]");
  }
  StressFunction f;
  f.power_law_ = false;
  f.stress_ = std::move(stress);
  f.derivative_ = std::move(derivative);
  return f;
}

double StressFunction::operator()(double depth) const {
  if (!(depth >= 0.0) || depth > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "rainflow: cycle depth " << depth << " outside [0, 1]";
    throw Error(ErrorCode::kOutOfRangeDepth, os.str());
  }
  return value(std::min(depth, 1.0));
}

double StressFunction::value(double depth) const {
  if (power_law_) return depth <= 0.0 ? 0.0 : k_ * std::pow(depth, alpha_);
  return stress_(depth);
}

double StressFunction::derivative(double depth) const {
  if (power_law_) {
    return depth <= 0.0 ? 0.0 : k_ * alpha_ * std::pow(depth, alpha_ - 1.0);
  }
  return derivative_(depth);
}

double StressFunction::derivative_inverse(double y) const {
  if (power_law_) {
    if (y <= 0.0) return 0.0;
    const double u = std::pow(y / (k_ * alpha_), 1.0 / (alpha_ - 1.0));
    return std::min(u, 1.0);
  }
  if (y <= derivative_(0.0)) return 0.0;
  if (y >= derivative_(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > kInverseTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (derivative_(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double stress(double depth, const BatterySpec& spec) {
  return StressFunction::from_spec(spec)(depth);
}

double phi_derivative(double depth, const BatterySpec& spec) {
  return StressFunction::from_spec(spec).derivative(depth);
}

double phi_derivative_inverse(double y, const BatterySpec& spec) {
  return StressFunction::from_spec(spec).derivative_inverse(y);
}

double cycle_life_loss(const CycleSet& cycles, const StressFunction& stress) {
  double loss = 0.0;
  for (const auto& c : cycles.cycles) loss += c.weight * stress(c.depth);
  return loss;
}

double aging_cost(std::span<const double> soc_series, const BatterySpec& spec) {
  const auto stress = StressFunction::from_spec(spec);
  return spec.energy_mwh * spec.replacement_cost_per_mwh *
         cycle_life_loss(rainflow(soc_series), stress);
}

double aging_cost_from_energy(std::span<const double> energy_mwh,
                              const BatterySpec& spec) {
  std::vector<double> soc(energy_mwh.begin(), energy_mwh.end());
  for (auto& x : soc) x /= spec.energy_mwh;
  return aging_cost(soc, spec);
}

void write_cycles_csv(std::ostream& out, const CycleSet& cycles) {
  out << "depth,weight\n";
  for (const auto& c : cycles.cycles) {
    out << detail::format_double(c.depth) << ','
        << detail::format_double(c.weight) << '\n';
  }
}

}  // namespace regbid
