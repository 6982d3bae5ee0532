#ifndef PLATOON_OUTPUT_HPP
#define PLATOON_OUTPUT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "platoon/core.hpp"
#include "platoon/pfa.hpp"
#include "platoon/polling.hpp"
#include "platoon/sim.hpp"

namespace platoon {

/// Writes through `fill` into a temporary file next to `path`, then renames
/// it over `path`. Readers never see a partial file. IoError on failure.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill);

/// results.csv / delay_sweep.csv header.
inline constexpr const char* kResultsHeader =
    "rho,discipline,lane,sim_delay_mean,ci95,approx_delay,fairness,n_vehicles,seed";

/// One row per lane followed by the "all" row.
void write_results_rows(std::ostream& out, double rho, const PfaKind& pfa, const SimStats& stats,
                        const std::vector<std::optional<double>>& approx, const std::optional<double>& approx_all,
                        std::uint64_t seed);

/// Aggregate rows only (lane = all), one per sweep point.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, std::uint64_t seed);
/// Per-lane and aggregate rows of every sweep point.
void write_sweep_lanes_csv(std::ostream& out, const std::vector<SweepPoint>& points, std::uint64_t seed);

/// rho, lane, discipline, K1, K2, omega, approx_delay; fields empty where
/// the approximation is undefined (batch).
void write_approx_csv(std::ostream& out, const PollingInput& base, const std::vector<double>& rho_grid,
                      const std::vector<PfaKind>& disciplines);

/// One JSON object per line: id, lane, entry_t, a, c, delay. `offset` is
/// the free-flow travel time from control-region entry to the intersection.
void write_vehicle_log_line(std::ostream& out, const Vehicle& vehicle, double offset);

/// Shortest round-trip decimal form, used by every writer.
std::string format_number(double x);

}  // namespace platoon

#endif  // PLATOON_OUTPUT_HPP
