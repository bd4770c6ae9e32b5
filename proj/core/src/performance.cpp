#include "regbid/performance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regbid/errors.hpp"

namespace regbid {
namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "performance: instruction has " << a.size()
       << " samples but response has " << b.size();
    throw Error(ErrorCode::kLengthMismatch, os.str());
  }
}

struct Norms {
  double mismatch = 0.0;
  double instructed = 0.0;
};

Norms l1_norms(std::span<const double> instruction, std::span<const double> response) {
  Norms n;
  for (std::size_t i = 0; i < instruction.size(); ++i) {
    n.mismatch += std::abs(instruction[i] - response[i]);
    n.instructed += std::abs(instruction[i]);
  }
  return n;
}

}  // namespace

void PerformanceConfig::validate() const {
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "performance: delta must lie in [0, 1]");
  }
  if (!(rho_min >= 0.0 && rho_min <= 1.0)) {
    throw Error(ErrorCode::kBadParams, "performance: rho_min must lie in [0, 1]");
  }
}

IndexResult performance_index(std::span<const double> instruction_mw,
                              std::span<const double> response_mw,
                              const PerformanceConfig& config) {
  check_lengths(instruction_mw, response_mw);
  const Norms n = l1_norms(instruction_mw, response_mw);
  if (n.instructed <= 0.0) return IndexResult{1.0, true};
  const double value = 1.0 - config.effective_delta() * n.mismatch / n.instructed;
  return IndexResult{std::clamp(value, 0.0, 1.0), false};
}

PjmScore pjm_index_expost(std::span<const double> instruction_mw,
                          std::span<const double> response_mw) {
  check_lengths(instruction_mw, response_mw);
  PjmScore score;
  const Norms n = l1_norms(instruction_mw, response_mw);
  if (n.instructed <= 0.0) {
    score.zero_instruction = true;
    return score;
  }
  score.precision = std::clamp(1.0 - n.mismatch / n.instructed, 0.0, 1.0);

  const auto count = static_cast<double>(instruction_mw.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < instruction_mw.size(); ++i) {
    mean_x += instruction_mw[i];
    mean_y += response_mw[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < instruction_mw.size(); ++i) {
    const double dx = instruction_mw[i] - mean_x;
    const double dy = response_mw[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    score.degenerate = true;
    score.correlation = score.precision;
  } else {
    score.correlation = std::clamp(sxy / std::sqrt(sxx * syy), 0.0, 1.0);
  }
  score.delay = 1.0;
  score.index = (score.precision + score.correlation + score.delay) / 3.0;
  return score;
}

}  // namespace regbid
