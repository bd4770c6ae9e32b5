#pragma once

#include "regbid/battery.hpp"
#include "regbid/bidding.hpp"
#include "regbid/control.hpp"
#include "regbid/errors.hpp"
#include "regbid/market.hpp"
#include "regbid/performance.hpp"
#include "regbid/rainflow.hpp"
#include "regbid/signal.hpp"

namespace regbid {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace regbid
