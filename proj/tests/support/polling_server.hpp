#pragma once

#include <vector>

#include "platoon/core.hpp"

namespace platoon::testing {

/// Two-queue exhaustive polling server with deterministic service B and a
/// setup S towards the other queue, counted from the last service
/// completion. Written as a queueing model, without any schedule
/// bookkeeping. `arrivals` must be sorted by time; returns the service
/// start time of each arrival, in input order.
std::vector<double> exhaustive_polling_starts(const std::vector<Arrival>& arrivals, double b, double s);

}  // namespace platoon::testing
