#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "regbid/battery.hpp"
#include "regbid/signal.hpp"

namespace regbid {

// Market statistics that turn an expected price into a penalty price.
struct MarketStats {
  double delta = 2.0 / 3.0;
  double mu_r = 1.0;
  double interval_h = kDefaultIntervalHours;
};

// u_hat implied by an expected clearing price.
double depth_for_price(double mu_lambda, const BatterySpec& spec,
                       const MarketStats& stats);

// Normalised regulation energy capacity min{e_max - e_min, u_hat E} / C in
// hours. Throws kZeroCapacity for C <= 0.
double gamma_of(double mu_lambda, double capacity_mw, const BatterySpec& spec,
                const MarketStats& stats);

struct GammaPoint {
  double gamma_h = 0.0;
  double quantile = 0.0;
};

// Performance index reached with confidence xi as a function of gamma.
struct GammaCurve {
  double xi = 0.9;
  double delta = 2.0 / 3.0;
  std::string corpus_id;
  std::vector<GammaPoint> points;
  std::size_t periods = 0;  // calibration sample size

  double max_quantile() const;
  // Fewer than 20 / (1 - xi) calibration periods.
  bool undersampled() const;
  // Throws kBadParams unless gamma strictly increases and quantiles are
  // nondecreasing within [1 - delta, 1].
  void validate() const;
};

// Per-gamma performance indices of a unit-capacity battery whose energy
// window is gamma MWh, one index per signal period.
struct PerformanceSamples {
  std::vector<double> gamma_grid;
  std::vector<std::vector<double>> indices;  // [gamma][period]
};

PerformanceSamples simulate_performance(std::span<const RegulationSignal> signals,
                                        double delta,
                                        std::span<const double> gamma_grid,
                                        double efficiency);

// Value v with at least ceil(xi * n) of the samples >= v.
double lower_confidence_value(std::vector<double> values, double xi);

// Least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> pool_adjacent_violators(std::span<const double> values);

GammaCurve curve_from_samples(const PerformanceSamples& samples, double xi,
                              double delta, std::string corpus_id,
                              std::size_t periods);

// Throws kInsufficientData for an empty corpus and kBadParams for an
// invalid grid or confidence.
GammaCurve calibrate_gamma_curve(std::span<const RegulationSignal> signals,
                                 double xi, double delta,
                                 std::span<const double> gamma_grid,
                                 double efficiency, std::string corpus_id = {});

// Smallest gamma whose calibrated quantile reaches rho, linear between grid
// points. Throws kOutOfRange outside (1 - delta, max quantile].
double inverse_gamma(const GammaCurve& curve, double rho);

struct BiddingConfig {
  double delta = 2.0 / 3.0;
  double mu_r = 1.0;
  double interval_h = kDefaultIntervalHours;
  double rho_min = 0.7;
  double xi = 0.9;

  MarketStats stats() const { return MarketStats{delta, mu_r, interval_h}; }
  void validate() const;
};

struct CapacityDecision {
  double capacity_mw = 0.0;     // C*(mu_lambda)
  double cap_mw = 0.0;          // largest capacity meeting the chance constraint
  double u_hat = 0.0;
  double gamma_required_h = 0.0;
};

CapacityDecision optimal_capacity(double mu_lambda, const BatterySpec& spec,
                                  const BiddingConfig& config,
                                  const GammaCurve& curve);

// Smallest expected price at which C* reaches `capacity_mw`, found by
// bisection. Throws kNonInvertible outside (0, cap].
double price_for_capacity(double capacity_mw, const BatterySpec& spec,
                          const BiddingConfig& config, const GammaCurve& curve);

struct BidSegment {
  double price_per_mw = 0.0;
  double capacity_mw = 0.0;
};

struct BidCurve {
  std::vector<BidSegment> segments;

  double total_capacity() const;
  // Capacity of the longest prefix priced at or below the clearing price.
  double cleared_capacity(double clearing_price) const;
};

// Prices each capacity segment so that the cumulative offer pays the
// expected price needed for that cumulative capacity; stops before the
// cumulative capacity exceeds the cap. Throws kCapExceeded if the first
// segment alone exceeds the cap.
BidCurve build_bid_curve(std::span<const double> segments_mw,
                         const BatterySpec& spec, const BiddingConfig& config,
                         const GammaCurve& curve);

void write_gamma_curve_csv(std::ostream& out, const GammaCurve& curve);
GammaCurve read_gamma_curve_csv(std::istream& in);
void write_bid_curve_csv(std::ostream& out, const BidCurve& curve);

}  // namespace regbid
