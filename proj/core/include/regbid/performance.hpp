#pragma once

#include <span>

namespace regbid {

enum class IndexMode { kLinear, kPjmApprox };

struct PerformanceConfig {
  double delta = 2.0 / 3.0;
  IndexMode mode = IndexMode::kLinear;
  double rho_min = 0.7;

  // The PJM approximation is the linear index with delta = 2/3.
  double effective_delta() const {
    return mode == IndexMode::kPjmApprox ? 2.0 / 3.0 : delta;
  }

  // Throws kBadParams unless delta in [0, 1] and rho_min in [0, 1].
  void validate() const;
};

struct IndexResult {
  double value = 1.0;
  // Set when the instruction carries no energy; the index is then 1.
  bool zero_instruction = false;
};

// 1 - delta * ||Cr - b||_1 / ||Cr||_1, clipped to [0, 1].
// Throws kLengthMismatch if the series differ in length.
IndexResult performance_index(std::span<const double> instruction_mw,
                              std::span<const double> response_mw,
                              const PerformanceConfig& config);

struct PjmScore {
  double index = 1.0;
  double precision = 1.0;
  double correlation = 1.0;
  double delay = 1.0;
  // Correlation undefined (a constant series); precision used in its place.
  bool degenerate = false;
  bool zero_instruction = false;
};

// Equal-weight precision/correlation/delay composite with zero delay.
PjmScore pjm_index_expost(std::span<const double> instruction_mw,
                          std::span<const double> response_mw);

}  // namespace regbid
