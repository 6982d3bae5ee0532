#ifndef PLATOON_PFA_HPP
#define PLATOON_PFA_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "platoon/core.hpp"

namespace platoon {

struct PfaKind {
    enum class Discipline { Exhaustive, Gated, Batch };

    Discipline discipline = Discipline::Exhaustive;
    int cap = 0;  ///< maximum platoon size, Batch only

    static PfaKind exhaustive() { return {Discipline::Exhaustive, 0}; }
    static PfaKind gated() { return {Discipline::Gated, 0}; }
    static PfaKind batch(int cap);

    std::string name() const;
    bool operator==(const PfaKind&) const = default;
};

/// Accepts "exhaustive", "gated", "batch" (default cap) or "batch:<cap>".
PfaKind parse_pfa(std::string_view text, int default_cap = 100);

/// The not-yet-crossed vehicles, ordered by (crossing, id), plus the last
/// vehicle that left the ordering.
class Schedule {
public:
    Schedule() = default;

    const std::vector<Vehicle>& ordering() const { return ordering_; }
    bool empty() const { return ordering_.empty(); }
    std::size_t size() const { return ordering_.size(); }

    /// Crossing time of the last scheduled vehicle of `lane`, none if the
    /// lane has no vehicle in the ordering.
    std::optional<double> lane_tail(int lane) const;

    /// V_last: the last vehicle of the ordering, or the last departed one.
    std::optional<Vehicle> last() const;
    const std::optional<Vehicle>& last_departed() const { return last_departed_; }

    /// Lane of the first vehicle with crossing > t, if any.
    std::optional<int> lane_after(double t) const;

    /// Inserts at its (crossing, id) position and returns that position.
    std::size_t insert(const Vehicle& vehicle);
    /// Adds `delta` to every crossing strictly after `t`.
    void shift_after(double t, double delta);
    Vehicle pop_front();

    /// Test hook: replace the ordering wholesale (must already be sorted).
    void assign(std::vector<Vehicle> ordering, std::optional<Vehicle> last_departed = std::nullopt);

private:
    std::vector<Vehicle> ordering_;
    std::optional<Vehicle> last_departed_;
};

/// One platoon of the gated bookkeeping: f (start), t (end) and its size.
struct GateEntry {
    double start = 0.0;
    double end = 0.0;
    int size = 1;
};

/// Per-lane ordered platoon start/end times of the gated disciplines. Only
/// platoons whose service has not started are kept; those are the ones a
/// new arrival may join or be scheduled behind.
class GateBook {
public:
    explicit GateBook(int lanes = 0) : lanes_(static_cast<std::size_t>(lanes)) {}

    int lanes() const { return static_cast<int>(lanes_.size()); }
    std::span<const GateEntry> lane(int lane) const { return lanes_.at(lane - 1); }

    void open(int lane, double at);
    void extend(int lane, std::size_t index, double new_end);
    /// Shifts every platoon ending strictly after `t`.
    void shift_after(double t, double delta);
    /// Drops platoons whose service has started (start <= now).
    void close_started(double now);

    /// Throws InconsistentGateBook if an entry does not describe a
    /// contiguous single-lane run of the ordering with the recorded size.
    void check_consistent(const Schedule& schedule) const;

private:
    std::vector<std::vector<GateEntry>> lanes_;
};

struct Placement {
    enum class Branch { ScheduledLast, JoinedPlatoon, NewPlatoon, Fallback };

    Vehicle vehicle;
    std::size_t position = 0;  ///< index in the ordering = vehicles served ahead
    Branch branch = Branch::ScheduledLast;
};

/// Exhaustive platoon forming: join the own-lane tail if it can be reached
/// within one headway, else open a platoon behind the latest lane (reverse
/// cyclic) whose tail plus clearance lies after the arrival.
Placement schedule_exhaustive(Schedule& schedule, const Arrival& arrival, const Gaps& gaps);

/// Gated platoon forming: an arrival may only join an own-lane platoon that
/// has not started before it could reach the intersection.
Placement schedule_gated(Schedule& schedule, GateBook& gates, const Arrival& arrival, const Gaps& gaps);

/// Gated with a maximum platoon size; joins to a full platoon are refused.
Placement schedule_batch(Schedule& schedule, GateBook& gates, const Arrival& arrival, const Gaps& gaps,
                         int cap);

/// Removes the head vehicle, which must finish crossing exactly at `now`.
Vehicle depart(Schedule& schedule, GateBook* gates, double now, const Gaps& gaps);

/// True iff the pre-existing vehicles keep their relative service order.
bool assert_regular(const Schedule& before, const Schedule& after, std::int64_t inserted_id);

/// Schedule + gate book + discipline, as owned by one simulation run.
class PfaEngine {
public:
    PfaEngine(PfaKind kind, Gaps gaps);

    /// Schedules an arrival known at time `now` (<= arrival.earliest).
    Placement on_arrival(const Arrival& arrival, double now);
    Placement on_arrival(const Arrival& arrival) { return on_arrival(arrival, arrival.earliest); }

    /// Time at which the head vehicle has finished crossing.
    std::optional<double> next_departure() const;
    Vehicle depart(double now);

    const Schedule& schedule() const { return schedule_; }
    const GateBook& gates() const { return gates_; }
    const Gaps& gaps() const { return gaps_; }
    const PfaKind& kind() const { return kind_; }

private:
    PfaKind kind_;
    Gaps gaps_;
    Schedule schedule_;
    GateBook gates_;
};

}  // namespace platoon

#endif  // PLATOON_PFA_HPP
