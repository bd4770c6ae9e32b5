#include "regbid/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "csv_util.hpp"
#include "regbid/errors.hpp"

namespace regbid {
namespace {

double reflect(double x) {
  // Repeated reflection handles steps larger than the interval width.
  while (x > 1.0 || x < -1.0) {
    if (x > 1.0) x = 2.0 - x;
    if (x < -1.0) x = -2.0 - x;
  }
  return x;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "signal: line " << line << ": " << what;
  throw Error(ErrorCode::kParseError, os.str());
}

}  // namespace

double RegulationSignal::l1_norm() const {
  double total = 0.0;
  for (double r : samples) total += std::abs(r);
  return total;
}

void RegulationSignal::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = samples[i];
    if (!std::isfinite(r) || r < -1.0 || r > 1.0) {
      std::ostringstream os;
      os << "signal: sample " << i << " = " << r << " outside [-1, 1]";
      throw Error(ErrorCode::kBadParams, os.str());
    }
  }
  if (!(interval_h > 0.0)) {
    throw Error(ErrorCode::kBadParams, "signal: interval must be positive");
  }
}

LoadResult read_signal_csv(std::istream& in, double interval_h,
                           double settlement_h) {
  if (!(interval_h > 0.0) || !(settlement_h > 0.0)) {
    throw Error(ErrorCode::kBadParams,
                "signal: interval and settlement length must be positive");
  }
  const double step_s = interval_h * 3600.0;
  const double period_s = settlement_h * 3600.0;
  LoadResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool have_prev = false;
  double prev_ts = 0.0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = detail::split_fields(text);
    if (!header_seen) {
      if (fields.size() != 2 || detail::trim(fields[0]) != "timestamp" ||
          detail::trim(fields[1]) != "r") {
        parse_error(line_no, "expected header 'timestamp,r'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) parse_error(line_no, "expected 2 fields");
    double ts = 0.0;
    double r = 0.0;
    if (!detail::parse_double(fields[0], ts)) {
      parse_error(line_no, "bad timestamp '" + std::string(fields[0]) + "'");
    }
    if (!detail::parse_double(fields[1], r) || !std::isfinite(r)) {
      parse_error(line_no, "bad value '" + std::string(fields[1]) + "'");
    }
    if (have_prev && std::abs((ts - prev_ts) - step_s) > 1e-6 * step_s) {
      std::ostringstream os;
      os << "signal: line " << line_no << ": timestamp " << ts
         << " does not follow " << prev_ts << " by " << step_s << " s";
      throw Error(ErrorCode::kGapError, os.str());
    }
    if (std::abs(r) > 1.0 + 1e-9) {
      ++result.clipped;
    }
    r = std::clamp(r, -1.0, 1.0);
    const auto period =
        static_cast<std::size_t>(std::floor((ts + 1e-6 * step_s) / period_s));
    if (result.signals.empty() || result.signals.back().period_id != period) {
      RegulationSignal s;
      s.interval_h = interval_h;
      s.period_id = period;
      result.signals.push_back(std::move(s));
    }
    result.signals.back().samples.push_back(r);
    prev_ts = ts;
    have_prev = true;
  }
  if (!header_seen) parse_error(line_no, "missing header 'timestamp,r'");
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, double interval_h,
                    double settlement_h) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "signal: cannot open " + path.string());
  }
  return read_signal_csv(in, interval_h, settlement_h);
}

void write_signal_csv(std::ostream& out, std::span<const RegulationSignal> signals,
                      double settlement_h) {
  out << "timestamp,r\n";
  for (const auto& s : signals) {
    const double start_s = static_cast<double>(s.period_id) * settlement_h * 3600.0;
    const double step_s = s.interval_h * 3600.0;
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      out << detail::format_double(start_s + static_cast<double>(i) * step_s)
          << ',' << detail::format_double(s.samples[i]) << '\n';
    }
  }
}

void save_csv(const std::filesystem::path& path,
              std::span<const RegulationSignal> signals, double settlement_h) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kIoError, "signal: cannot write " + path.string());
  }
  write_signal_csv(out, signals, settlement_h);
}

const char* to_string(SignalKind kind) noexcept {
  switch (kind) {
    case SignalKind::kRandomWalk: return "random-walk";
    case SignalKind::kOuProcess: return "ou-process";
    case SignalKind::kScaledReplay: return "scaled-replay";
  }
  return "unknown";
}

SignalKind parse_signal_kind(const std::string& text) {
  if (text == "random-walk") return SignalKind::kRandomWalk;
  if (text == "ou-process") return SignalKind::kOuProcess;
  if (text == "scaled-replay") return SignalKind::kScaledReplay;
  throw Error(ErrorCode::kBadParams, "signal: unknown kind '" + text + "'");
}

void SynthParams::validate(SignalKind kind) const {
  if (!(interval_h > 0.0)) {
    throw Error(ErrorCode::kBadParams, "signal: interval must be positive");
  }
  switch (kind) {
    case SignalKind::kRandomWalk:
      if (!(step_sigma > 0.0)) {
        throw Error(ErrorCode::kBadParams, "signal: step_sigma must be positive");
      }
      break;
    case SignalKind::kOuProcess:
      if (!(step_sigma > 0.0) || !(reversion > 0.0) || reversion >= 1.0) {
        throw Error(ErrorCode::kBadParams,
                    "signal: ou-process needs step_sigma > 0 and reversion in (0, 1)");
      }
      break;
    case SignalKind::kScaledReplay:
      if (replay_source.empty() || !(scale > 0.0)) {
        throw Error(ErrorCode::kBadParams,
                    "signal: scaled-replay needs a source and scale > 0");
      }
      break;
  }
}

RegulationSignal synthesize(SignalKind kind, std::uint64_t seed,
                            std::size_t length, const SynthParams& params) {
  params.validate(kind);
  RegulationSignal out;
  out.interval_h = params.interval_h;
  out.samples.reserve(length);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  switch (kind) {
    case SignalKind::kRandomWalk: {
      double x = 0.0;
      for (std::size_t i = 0; i < length; ++i) {
        x = reflect(x + params.step_sigma * normal(rng));
        out.samples.push_back(x);
      }
      break;
    }
    case SignalKind::kOuProcess: {
      double x = 0.0;
      for (std::size_t i = 0; i < length; ++i) {
        x = reflect(x - params.reversion * x + params.step_sigma * normal(rng));
        out.samples.push_back(x);
      }
      break;
    }
    case SignalKind::kScaledReplay: {
      const auto& src = params.replay_source;
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      std::size_t pos = pick(rng);
      for (std::size_t i = 0; i < length; ++i) {
        out.samples.push_back(reflect(params.scale * src[pos]));
        pos = (pos + 1) % src.size();
      }
      break;
    }
  }
  return out;
}

std::vector<RegulationSignal> synthesize_corpus(
    SignalKind kind, std::uint64_t seed, std::size_t periods,
    std::size_t samples_per_period, const SynthParams& params, bool debias,
    double efficiency) {
  const auto whole = synthesize(kind, seed, periods * samples_per_period, params);
  std::vector<RegulationSignal> out;
  out.reserve(periods);
  for (std::size_t p = 0; p < periods; ++p) {
    RegulationSignal s;
    s.interval_h = params.interval_h;
    s.period_id = p;
    const auto first = whole.samples.begin() +
                       static_cast<std::ptrdiff_t>(p * samples_per_period);
    s.samples.assign(first, first + static_cast<std::ptrdiff_t>(samples_per_period));
    if (debias) s = debias_energy(s, efficiency);
    out.push_back(std::move(s));
  }
  return out;
}

double energy_imbalance(std::span<const double> samples, double efficiency) {
  double charge = 0.0;
  double discharge = 0.0;
  for (double r : samples) {
    if (r > 0.0) {
      charge += r;
    } else {
      discharge -= r;
    }
  }
  return efficiency * charge - discharge / efficiency;
}

RegulationSignal debias_energy(const RegulationSignal& signal, double efficiency) {
  if (signal.empty()) {
    throw Error(ErrorCode::kSignalEmpty, "signal: cannot debias an empty signal");
  }
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "signal: efficiency must lie in (0, 1]");
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(signal.samples.begin(), signal.samples.end());
  if (*hi_it - *lo_it <= 0.0) {
    throw Error(ErrorCode::kDegenerate,
                "signal: all samples equal, no shift balances the signal");
  }
  std::vector<double> shifted(signal.samples.size());
  const auto imbalance_at = [&](double c) {
    for (std::size_t i = 0; i < shifted.size(); ++i) {
      shifted[i] = std::clamp(signal.samples[i] - c, -1.0, 1.0);
    }
    return energy_imbalance(shifted, efficiency);
  };
  // imbalance_at is nonincreasing in c; positive at c = min, negative at max.
  double lo = *lo_it;
  double hi = *hi_it;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (imbalance_at(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Pick the bracket end with the smaller residual.
  const double res_lo = std::abs(imbalance_at(lo));
  const double res_hi = std::abs(imbalance_at(hi));
  imbalance_at(res_lo <= res_hi ? lo : hi);
  RegulationSignal out = signal;
  out.samples = std::move(shifted);
  return out;
}

double mu_r(std::span<const RegulationSignal> signals) {
  if (signals.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : signals) total += s.l1_norm();
  return total / static_cast<double>(signals.size());
}

}  // namespace regbid
