#ifndef PLATOON_SIM_HPP
#define PLATOON_SIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "platoon/core.hpp"
#include "platoon/pfa.hpp"

namespace platoon {

struct SimConfig {
    SimParams params;
    PfaKind pfa = PfaKind::exhaustive();
    std::int64_t horizon = 1'000'000;  ///< arrivals generated
    std::int64_t warmup = -1;          ///< vehicles discarded; -1 = 10% of horizon
    std::uint64_t seed = 1;
    bool steady_state = true;          ///< reject rho >= 1
    bool check_invariants = false;     ///< verify the schedule after every insertion
    int batches = 20;

    /// Called for every vehicle (warm-up included) when it has crossed.
    std::function<void(const Vehicle&)> on_crossing;

    std::int64_t warmup_vehicles() const { return warmup >= 0 ? warmup : horizon / 10; }
};

struct LaneStats {
    std::int64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  ///< of individual delays
    double ci95 = 0.0;      ///< batch-means half-width
    double ahead = 0.0;     ///< sum of N_ahead
    double seen = 0.0;      ///< sum of N_total

    /// sum N_ahead / sum N_total; 1 when nobody ever saw another vehicle.
    double fairness() const { return seen > 0.0 ? ahead / seen : 1.0; }
    bool operator==(const LaneStats&) const = default;
};

struct SimStats {
    std::vector<LaneStats> lanes;
    LaneStats all;
    std::int64_t arrivals = 0;
    std::int64_t crossed = 0;
    std::int64_t in_system = 0;
    std::size_t max_queue = 0;
    double end_time = 0.0;

    bool operator==(const SimStats&) const = default;
};

/// One replication of the vertical-queue model. The earliest crossing time
/// of a vehicle is its arrival time: the free-flow travel time through the
/// control region is a constant offset that cancels in every delay.
SimStats run(const SimConfig& config);

struct SweepPoint {
    double rho = 0.0;
    PfaKind pfa;
    SimStats stats;
    std::vector<std::optional<double>> approx;  ///< per lane, none for batch
    std::optional<double> approx_all;
};

/// Runs every (rho, discipline) pair, scaling the arrival rates of
/// `base.params` to each rho while keeping their ratio. Points run in
/// parallel on up to `threads` threads; the result order is grid-major and
/// does not depend on scheduling.
std::vector<SweepPoint> sweep(const SimConfig& base, const std::vector<double>& rho_grid,
                              const std::vector<PfaKind>& disciplines, unsigned threads);

/// A scripted control-region entry for trajectory scenarios.
struct ScriptedArrival {
    int lane = 1;
    double t = 0.0;
};

/// Free-flow travel time from control-region entry to the intersection.
double free_flow_offset(const SimParams& params);

/// Runs scripted entries (ids 1, 2, ... in list order) through the PFA in
/// entry-time order and returns every vehicle in crossing order, with
/// earliest = entry + free_flow_offset.
std::vector<Vehicle> schedule_scripted(const SimParams& params, const PfaKind& pfa,
                                       const std::vector<ScriptedArrival>& arrivals);

/// Worker count from PLATOONSIM_THREADS, defaulting to the hardware.
unsigned sweep_threads();

/// Arrival rates with the same split as `rate` scaled to load `rho`.
std::vector<double> scale_rates(const SimParams& params, double rho);

}  // namespace platoon

#endif  // PLATOON_SIM_HPP
