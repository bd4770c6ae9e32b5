#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace regbid {

// Two-second dispatch cadence, in hours.
inline constexpr double kDefaultIntervalHours = 1.0 / 1800.0;

// Normalised regulation instructions r_t in [-1, 1] for one settlement
// period.
struct RegulationSignal {
  std::vector<double> samples;
  double interval_h = kDefaultIntervalHours;
  std::size_t period_id = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double l1_norm() const;
  double duration_h() const { return interval_h * static_cast<double>(size()); }

  // Throws kBadParams if any sample is outside [-1, 1] or not finite.
  void validate() const;
};

struct LoadResult {
  std::vector<RegulationSignal> signals;
  // Samples with |r| > 1 + 1e-9 that were clipped to the nearest bound.
  std::size_t clipped = 0;
};

// Reads `timestamp,r` (timestamp in seconds). Lines starting with '#'
// are ignored. Samples are split into chunks of `settlement_h` aligned to
// multiples of the settlement length. Throws kParseError (with line
// number) or kGapError when consecutive timestamps are not exactly one
// interval apart.
LoadResult read_signal_csv(std::istream& in, double interval_h,
                           double settlement_h);
LoadResult load_csv(const std::filesystem::path& path, double interval_h,
                    double settlement_h);

// Writes `timestamp,r` so that read_signal_csv returns identical samples.
void write_signal_csv(std::ostream& out, std::span<const RegulationSignal> signals,
                      double settlement_h);
void save_csv(const std::filesystem::path& path,
              std::span<const RegulationSignal> signals, double settlement_h);

enum class SignalKind { kRandomWalk, kOuProcess, kScaledReplay };

const char* to_string(SignalKind kind) noexcept;
SignalKind parse_signal_kind(const std::string& text);

struct SynthParams {
  double step_sigma = 0.05;   // per-sample innovation std dev
  double reversion = 0.02;    // OU pull towards zero per sample
  double scale = 1.0;         // scaled-replay gain
  std::vector<double> replay_source;
  double interval_h = kDefaultIntervalHours;

  void validate(SignalKind kind) const;
};

// Bounded synthetic signal; out-of-range excursions are reflected back
// into [-1, 1]. Deterministic for a given seed.
RegulationSignal synthesize(SignalKind kind, std::uint64_t seed,
                            std::size_t length, const SynthParams& params);

// One continuous synthetic realisation chopped into `periods` signals of
// `samples_per_period` each, optionally energy-debiased per period.
std::vector<RegulationSignal> synthesize_corpus(
    SignalKind kind, std::uint64_t seed, std::size_t periods,
    std::size_t samples_per_period, const SynthParams& params,
    bool debias = false, double efficiency = 1.0);

// Shifts the signal by a constant c so that
//   eta * sum [r - c]^+ == (1/eta) * sum [c - r]^+
// with the shifted samples clipped to [-1, 1]. Throws kDegenerate if all
// samples are equal.
RegulationSignal debias_energy(const RegulationSignal& signal, double efficiency);

// Efficiency-weighted charge minus discharge, the quantity debias_energy
// drives to zero.
double energy_imbalance(std::span<const double> samples, double efficiency);

// Mean of ||r||_1 over the corpus (0 for an empty corpus).
double mu_r(std::span<const RegulationSignal> signals);

}  // namespace regbid
