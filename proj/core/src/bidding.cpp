#include "regbid/bidding.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "csv_util.hpp"
#include "regbid/control.hpp"
#include "regbid/errors.hpp"

namespace regbid {
namespace {

double unit_battery_index(const RegulationSignal& signal, double gamma_h,
                          double delta, double eta) {
  const double M = signal.interval_h;
  double e = 0.5 * gamma_h;
  double mismatch = 0.0;
  double instructed = 0.0;
  for (double r : signal.samples) {
    double b = 0.0;
    if (r >= 0.0) {
      b = std::max(0.0, std::min((gamma_h - e) / (M * eta), r));
      e += M * eta * b;
    } else {
      b = std::min(0.0, std::max(eta * (0.0 - e) / M, r));
      e += M * b / eta;
    }
    e = std::clamp(e, 0.0, gamma_h);
    mismatch += std::abs(r - b);
    instructed += std::abs(r);
  }
  if (instructed <= 0.0) return 1.0;
  return std::clamp(1.0 - delta * mismatch / instructed, 0.0, 1.0);
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) {
    throw Error(ErrorCode::kBadParams, "bidding: empty gamma grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(ErrorCode::kBadParams,
                  "bidding: gamma grid must be nonnegative and strictly increasing");
    }
  }
}

void check_xi(double xi) {
  if (!(xi > 0.0 && xi < 1.0)) {
    throw Error(ErrorCode::kBadParams, "bidding: confidence xi must lie in (0, 1)");
  }
}

}  // namespace

double depth_for_price(double mu_lambda, const BatterySpec& spec,
                       const MarketStats& stats) {
  PenaltyModel penalty{stats.delta, mu_lambda, stats.mu_r, stats.interval_h};
  return optimal_cycle_depth(penalty, spec);
}

double gamma_of(double mu_lambda, double capacity_mw, const BatterySpec& spec,
                const MarketStats& stats) {
  if (!(capacity_mw > 0.0)) {
    throw Error(ErrorCode::kZeroCapacity, "bidding: gamma needs a positive capacity");
  }
  const double u_hat = depth_for_price(mu_lambda, spec, stats);
  return std::min(spec.usable_energy_mwh(), u_hat * spec.energy_mwh) / capacity_mw;
}

double GammaCurve::max_quantile() const {
  double best = 0.0;
  for (const auto& p : points) best = std::max(best, p.quantile);
  return best;
}

bool GammaCurve::undersampled() const {
  return static_cast<double>(periods) < 20.0 / (1.0 - xi);
}

void GammaCurve::validate() const {
  check_xi(xi);
  if (points.empty()) {
    throw Error(ErrorCode::kBadParams, "bidding: gamma curve has no points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.quantile < 1.0 - delta - 1e-12 || p.quantile > 1.0 + 1e-12) {
      throw Error(ErrorCode::kBadParams,
                  "bidding: gamma curve quantile outside [1 - delta, 1]");
    }
    if (i > 0 && (!(p.gamma_h > points[i - 1].gamma_h) ||
                  p.quantile < points[i - 1].quantile)) {
      throw Error(ErrorCode::kBadParams,
                  "bidding: gamma curve must be increasing in gamma and "
                  "nondecreasing in quantile");
    }
  }
}

PerformanceSamples simulate_performance(std::span<const RegulationSignal> signals,
                                        double delta,
                                        std::span<const double> gamma_grid,
                                        double efficiency) {
  check_grid(gamma_grid);
  PerformanceSamples out;
  out.gamma_grid.assign(gamma_grid.begin(), gamma_grid.end());
  out.indices.assign(gamma_grid.size(), std::vector<double>(signals.size()));

  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) {
      for (std::size_t s = 0; s < signals.size(); ++s) {
        out.indices[g][s] =
            unit_battery_index(signals[s], gamma_grid[g], delta, efficiency);
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, gamma_grid.size());
  if (workers == 1) {
    work(0, gamma_grid.size());
    return out;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (gamma_grid.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < gamma_grid.size(); begin += chunk) {
    pool.emplace_back(work, begin, std::min(begin + chunk, gamma_grid.size()));
  }
  return out;
}

double lower_confidence_value(std::vector<double> values, double xi) {
  if (values.empty()) {
    throw Error(ErrorCode::kInsufficientData, "bidding: no samples for quantile");
  }
  check_xi(xi);
  std::sort(values.begin(), values.end(), std::greater<>());
  auto rank = static_cast<std::size_t>(
      std::ceil(xi * static_cast<double>(values.size()) - 1e-12));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<double> pool_adjacent_violators(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back(Block{v, 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean());
  // Pooled means can round out of order by an ulp; make it exact.
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::max(out[i], out[i - 1]);
  return out;
}

GammaCurve curve_from_samples(const PerformanceSamples& samples, double xi,
                              double delta, std::string corpus_id,
                              std::size_t periods) {
  check_xi(xi);
  if (periods == 0) {
    throw Error(ErrorCode::kInsufficientData,
                "bidding: calibration corpus has no periods");
  }
  std::vector<double> raw;
  raw.reserve(samples.gamma_grid.size());
  for (const auto& column : samples.indices) {
    raw.push_back(lower_confidence_value(column, xi));
  }
  const auto fitted = pool_adjacent_violators(raw);
  GammaCurve curve;
  curve.xi = xi;
  curve.delta = delta;
  curve.corpus_id = std::move(corpus_id);
  curve.periods = periods;
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    curve.points.push_back(GammaPoint{samples.gamma_grid[i],
                                      std::clamp(fitted[i], 1.0 - delta, 1.0)});
  }
  return curve;
}

GammaCurve calibrate_gamma_curve(std::span<const RegulationSignal> signals,
                                 double xi, double delta,
                                 std::span<const double> gamma_grid,
                                 double efficiency, std::string corpus_id) {
  check_xi(xi);
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "bidding: delta must lie in [0, 1]");
  }
  if (signals.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "bidding: calibration corpus has no periods");
  }
  const auto samples = simulate_performance(signals, delta, gamma_grid, efficiency);
  return curve_from_samples(samples, xi, delta, std::move(corpus_id), signals.size());
}

double inverse_gamma(const GammaCurve& curve, double rho) {
  const double floor = 1.0 - curve.delta;
  if (curve.points.empty() || !(rho > floor) || rho > curve.max_quantile()) {
    std::ostringstream os;
    os << "bidding: performance target " << rho << " outside (" << floor << ", "
       << curve.max_quantile() << "]";
    throw Error(ErrorCode::kOutOfRange, os.str());
  }
  const auto& pts = curve.points;
  if (rho <= pts.front().quantile) return pts.front().gamma_h;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].quantile >= rho) {
      const auto& a = pts[i - 1];
      const auto& b = pts[i];
      const double t = (rho - a.quantile) / (b.quantile - a.quantile);
      return a.gamma_h + t * (b.gamma_h - a.gamma_h);
    }
  }
  return pts.back().gamma_h;
}

void BiddingConfig::validate() const {
  check_xi(xi);
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "bidding: delta must lie in (0, 1]");
  }
  if (!(rho_min > 1.0 - delta && rho_min < 1.0)) {
    throw Error(ErrorCode::kBadParams, "bidding: rho_min must lie in (1 - delta, 1)");
  }
  if (!(mu_r > 0.0) || !(interval_h > 0.0)) {
    throw Error(ErrorCode::kBadParams, "bidding: mu_r and interval must be > 0");
  }
}

CapacityDecision optimal_capacity(double mu_lambda, const BatterySpec& spec,
                                  const BiddingConfig& config,
                                  const GammaCurve& curve) {
  config.validate();
  if (std::abs(config.xi - curve.xi) > 1e-12 ||
      std::abs(config.delta - curve.delta) > 1e-12) {
    throw Error(ErrorCode::kBadParams,
                "bidding: gamma curve was calibrated for a different xi or delta");
  }
  CapacityDecision d;
  d.gamma_required_h = inverse_gamma(curve, config.rho_min);
  d.u_hat = depth_for_price(mu_lambda, spec, config.stats());
  const double band = std::min(spec.usable_energy_mwh(), d.u_hat * spec.energy_mwh);
  if (d.gamma_required_h <= 0.0) {
    d.cap_mw = spec.power_mw;
    d.capacity_mw = band > 0.0 ? spec.power_mw : 0.0;
    return d;
  }
  d.cap_mw = std::min(spec.power_mw, spec.usable_energy_mwh() / d.gamma_required_h);
  d.capacity_mw = std::min(spec.power_mw, band / d.gamma_required_h);
  return d;
}

double price_for_capacity(double capacity_mw, const BatterySpec& spec,
                          const BiddingConfig& config, const GammaCurve& curve) {
  const double cap = optimal_capacity(0.0, spec, config, curve).cap_mw;
  if (!(capacity_mw > 0.0) || capacity_mw > cap * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "bidding: capacity " << capacity_mw << " MW outside (0, " << cap << "]";
    throw Error(ErrorCode::kNonInvertible, os.str());
  }
  const double target = std::min(capacity_mw, cap);
  const auto reaches = [&](double price) {
    return optimal_capacity(price, spec, config, curve).capacity_mw >=
           target * (1.0 - 1e-14);
  };
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (!reaches(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) {
      throw Error(ErrorCode::kNonInvertible,
                  "bidding: no finite price reaches the requested capacity");
    }
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double BidCurve::total_capacity() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.capacity_mw;
  return total;
}

double BidCurve::cleared_capacity(double clearing_price) const {
  double cleared = 0.0;
  for (const auto& s : segments) {
    if (s.price_per_mw > clearing_price) break;
    cleared += s.capacity_mw;
  }
  return cleared;
}

BidCurve build_bid_curve(std::span<const double> segments_mw,
                         const BatterySpec& spec, const BiddingConfig& config,
                         const GammaCurve& curve) {
  for (double c : segments_mw) {
    if (!(c > 0.0)) {
      throw Error(ErrorCode::kBadParams, "bidding: bid segments must be positive");
    }
  }
  BidCurve out;
  if (segments_mw.empty()) return out;
  const double cap = optimal_capacity(0.0, spec, config, curve).cap_mw;
  if (segments_mw.front() > cap * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "bidding: first segment " << segments_mw.front()
       << " MW exceeds the capacity cap " << cap << " MW";
    throw Error(ErrorCode::kCapExceeded, os.str());
  }
  double total = 0.0;
  double paid = 0.0;
  for (double segment : segments_mw) {
    if (total + segment > cap * (1.0 + 1e-12)) break;
    total += segment;
    const double price_total = price_for_capacity(total, spec, config, curve);
    const double price = (price_total * total - paid) / segment;
    out.segments.push_back(BidSegment{price, segment});
    paid = price_total * total;
  }
  return out;
}

void write_gamma_curve_csv(std::ostream& out, const GammaCurve& curve) {
  using detail::format_double;
  out << "# xi=" << format_double(curve.xi) << '\n'
      << "# delta=" << format_double(curve.delta) << '\n'
      << "# corpus=" << curve.corpus_id << '\n'
      << "# periods=" << curve.periods << '\n'
      << "gamma_hours,perf_quantile\n";
  for (const auto& p : curve.points) {
    out << format_double(p.gamma_h) << ',' << format_double(p.quantile) << '\n';
  }
}

GammaCurve read_gamma_curve_csv(std::istream& in) {
  GammaCurve curve;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  const auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "bidding: gamma curve line " << line_no << ": " << what;
    throw Error(ErrorCode::kParseError, os.str());
  };
  while (std::getline(in, line)) {
    ++line_no;
    auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      text.remove_prefix(1);
      text = detail::trim(text);
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = detail::trim(text.substr(0, eq));
      const auto value = detail::trim(text.substr(eq + 1));
      double number = 0.0;
      if (key == "xi" && !detail::parse_double(value, curve.xi)) fail("bad xi");
      if (key == "delta" && !detail::parse_double(value, curve.delta)) fail("bad delta");
      if (key == "corpus") curve.corpus_id = std::string(value);
      if (key == "periods") {
        if (!detail::parse_double(value, number)) fail("bad periods");
        curve.periods = static_cast<std::size_t>(number);
      }
      continue;
    }
    if (!header) {
      if (text != "gamma_hours,perf_quantile") {
        fail("expected header 'gamma_hours,perf_quantile'");
      }
      header = true;
      continue;
    }
    const auto fields = detail::split_fields(text);
    GammaPoint p;
    if (fields.size() != 2 || !detail::parse_double(fields[0], p.gamma_h) ||
        !detail::parse_double(fields[1], p.quantile)) {
      fail("expected two numbers");
    }
    curve.points.push_back(p);
  }
  curve.validate();
  return curve;
}

void write_bid_curve_csv(std::ostream& out, const BidCurve& curve) {
  out << "segment,price_per_mw,capacity_mw\n";
  for (std::size_t j = 0; j < curve.segments.size(); ++j) {
    out << j + 1 << ',' << detail::format_double(curve.segments[j].price_per_mw)
        << ',' << detail::format_double(curve.segments[j].capacity_mw) << '\n';
  }
}

}  // namespace regbid
