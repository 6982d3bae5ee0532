#include "platoon/pfa.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace platoon {

PfaKind PfaKind::batch(int cap)
{
    if (cap < 1) {
        throw Error(ErrorCode::NonPositiveParameter, fmt::format("batch cap must be >= 1, got {}", cap));
    }
    return {Discipline::Batch, cap};
}

std::string PfaKind::name() const
{
    switch (discipline) {
    case Discipline::Exhaustive: return "exhaustive";
    case Discipline::Gated: return "gated";
    case Discipline::Batch: return "batch";
    }
    return "unknown";
}

PfaKind parse_pfa(std::string_view text, int default_cap)
{
    if (text == "exhaustive") {
        return PfaKind::exhaustive();
    }
    if (text == "gated") {
        return PfaKind::gated();
    }
    if (text == "batch") {
        return PfaKind::batch(default_cap);
    }
    if (text.starts_with("batch:")) {
        auto digits = text.substr(6);
        int cap = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cap);
        if (ec == std::errc{} && ptr == digits.data() + digits.size()) {
            return PfaKind::batch(cap);
        }
    }
    throw Error(ErrorCode::ConfigError, fmt::format("unknown PFA '{}'", text));
}

// ---------------------------------------------------------------- Schedule

namespace {

bool ordered_before(const Vehicle& lhs, const Vehicle& rhs)
{
    return lhs.crossing < rhs.crossing || (lhs.crossing == rhs.crossing && lhs.id < rhs.id);
}

}  // namespace

std::optional<double> Schedule::lane_tail(int lane) const
{
    for (auto it = ordering_.rbegin(); it != ordering_.rend(); ++it) {
        if (it->lane == lane) {
            return it->crossing;
        }
    }
    return std::nullopt;
}

std::optional<Vehicle> Schedule::last() const
{
    if (!ordering_.empty()) {
        return ordering_.back();
    }
    return last_departed_;
}

std::optional<int> Schedule::lane_after(double t) const
{
    auto it = std::find_if(ordering_.begin(), ordering_.end(), [t](const Vehicle& v) { return v.crossing > t; });
    if (it == ordering_.end()) {
        return std::nullopt;
    }
    return it->lane;
}

std::size_t Schedule::insert(const Vehicle& vehicle)
{
    auto it = std::upper_bound(ordering_.begin(), ordering_.end(), vehicle, ordered_before);
    const auto pos = static_cast<std::size_t>(it - ordering_.begin());
    ordering_.insert(it, vehicle);
    return pos;
}

void Schedule::shift_after(double t, double delta)
{
    if (delta == 0.0) {
        return;
    }
    for (auto it = ordering_.rbegin(); it != ordering_.rend() && it->crossing > t; ++it) {
        it->crossing += delta;
    }
}

Vehicle Schedule::pop_front()
{
    Vehicle head = ordering_.front();
    ordering_.erase(ordering_.begin());
    last_departed_ = head;
    return head;
}

void Schedule::assign(std::vector<Vehicle> ordering, std::optional<Vehicle> last_departed)
{
    ordering_ = std::move(ordering);
    last_departed_ = std::move(last_departed);
}

// ---------------------------------------------------------------- GateBook

void GateBook::open(int lane, double at)
{
    auto& entries = lanes_.at(lane - 1);
    auto it = std::upper_bound(entries.begin(), entries.end(), at,
                               [](double value, const GateEntry& e) { return value < e.start; });
    entries.insert(it, GateEntry{at, at, 1});
}

void GateBook::extend(int lane, std::size_t index, double new_end)
{
    auto& entry = lanes_.at(lane - 1).at(index);
    if (new_end < entry.end) {
        throw Error(ErrorCode::InconsistentGateBook, "platoon end moved backwards");
    }
    entry.end = new_end;
    ++entry.size;
}

void GateBook::shift_after(double t, double delta)
{
    if (delta == 0.0) {
        return;
    }
    for (auto& entries : lanes_) {
        for (auto& e : entries) {
            if (e.end > t) {
                if (e.start <= t) {
                    throw Error(ErrorCode::InconsistentGateBook,
                                fmt::format("platoon [{}, {}] straddles shift point {}", e.start, e.end, t));
                }
                e.start += delta;
                e.end += delta;
            }
        }
    }
}

void GateBook::close_started(double now)
{
    for (auto& entries : lanes_) {
        std::erase_if(entries, [now](const GateEntry& e) { return e.start <= now; });
    }
}

void GateBook::check_consistent(const Schedule& schedule) const
{
    const auto& ord = schedule.ordering();
    for (int lane = 1; lane <= lanes(); ++lane) {
        const auto entries = this->lane(lane);
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto& e = entries[k];
            if (e.start > e.end || (k > 0 && entries[k - 1].end >= e.start)) {
                throw Error(ErrorCode::InconsistentGateBook, fmt::format("lane {} entries out of order", lane));
            }
            int count = 0;
            bool found_start = false;
            for (const auto& v : ord) {
                if (v.crossing < e.start || v.crossing > e.end) {
                    continue;
                }
                if (v.lane != lane) {
                    throw Error(ErrorCode::InconsistentGateBook,
                                fmt::format("vehicle {} of lane {} inside lane {} platoon [{}, {}]", v.id, v.lane,
                                            lane, e.start, e.end));
                }
                found_start = found_start || v.crossing == e.start;
                ++count;
            }
            if (!found_start || count != e.size) {
                throw Error(ErrorCode::InconsistentGateBook,
                            fmt::format("lane {} platoon [{}, {}] holds {} vehicles, book says {}", lane, e.start,
                                        e.end, count, e.size));
            }
        }
    }
}

// ---------------------------------------------------------------- algorithms

namespace {

/// Lanes d-1, d-2, ..., 1, n, n-1, ..., d+1.
std::vector<int> reverse_cyclic(int lane, int lanes)
{
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(lanes - 1));
    for (int k = 1; k < lanes; ++k) {
        order.push_back((lane - 1 - k + lanes) % lanes + 1);
    }
    return order;
}

/// Extra time needed by the vehicles after `anchor` (a lane `from` crossing)
/// when a lane `to` crossing is slotted in right behind it.
double insertion_cost(const Schedule& schedule, double anchor, int from, int to, const Gaps& gaps)
{
    const auto next = schedule.lane_after(anchor);
    if (!next) {
        return 0.0;
    }
    return gaps.between(from, to) + gaps.between(to, *next) - gaps.between(from, *next);
}

Placement place(Schedule& schedule, const Arrival& arrival, double crossing, Placement::Branch branch)
{
    Vehicle v{arrival.id, arrival.lane, arrival.earliest, crossing};
    const auto pos = schedule.insert(v);
    return Placement{v, pos, branch};
}

/// Branch (i) of both disciplines: the system will have emptied before the
/// arrival can cross. Returns none when the branch does not apply.
std::optional<double> scheduled_last(const Schedule& schedule, const Arrival& arrival, const Gaps& gaps)
{
    const auto last = schedule.last();
    if (!last) {
        return arrival.earliest;
    }
    if (last->crossing + gaps.headway(last->lane) < arrival.earliest) {
        return std::max(arrival.earliest, last->crossing + gaps.between(last->lane, arrival.lane));
    }
    return std::nullopt;
}

double fallback_crossing(const Schedule& schedule, const Arrival& arrival, const Gaps& gaps)
{
    const auto last = schedule.last();
    if (!last) {
        return arrival.earliest;
    }
    return std::max(arrival.earliest, last->crossing + gaps.between(last->lane, arrival.lane));
}

void check_arrival(const Arrival& arrival, const Gaps& gaps)
{
    if (arrival.lane < 1 || arrival.lane > gaps.lanes()) {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("vehicle {} lane {} outside 1..{}", arrival.id, arrival.lane, gaps.lanes()));
    }
}

Placement schedule_gated_capped(Schedule& schedule, GateBook& gates, const Arrival& arrival, const Gaps& gaps,
                                std::optional<int> cap)
{
    check_arrival(arrival, gaps);
    const int d = arrival.lane;
    const double a = arrival.earliest;

    if (auto c = scheduled_last(schedule, arrival, gaps)) {
        gates.open(d, *c);
        return place(schedule, arrival, *c, Placement::Branch::ScheduledLast);
    }

    const auto own = gates.lane(d);
    auto joinable = std::find_if(own.begin(), own.end(), [a](const GateEntry& e) { return e.start > a; });
    if (joinable != own.end() && (!cap || joinable->size < *cap)) {
        const auto index = static_cast<std::size_t>(joinable - own.begin());
        const double t = joinable->end;
        const double c = t + gaps.headway(d);
        schedule.shift_after(t, gaps.headway(d));
        gates.shift_after(t, gaps.headway(d));
        gates.extend(d, index, c);
        return place(schedule, arrival, c, Placement::Branch::JoinedPlatoon);
    }

    const auto own_tail = schedule.lane_tail(d);
    for (int l : reverse_cyclic(d, gaps.lanes())) {
        const double gap = gaps.between(l, d);
        const auto entries = gates.lane(l);
        auto anchor = std::find_if(entries.begin(), entries.end(), [&](const GateEntry& e) {
            return e.end + gap > a && (!own_tail || e.end >= *own_tail);
        });
        if (anchor == entries.end()) {
            continue;
        }
        const double t = anchor->end;
        const double c = t + gap;
        const double delta = insertion_cost(schedule, t, l, d, gaps);
        schedule.shift_after(t, delta);
        gates.shift_after(t, delta);
        gates.open(d, c);
        return place(schedule, arrival, c, Placement::Branch::NewPlatoon);
    }

    const double c = fallback_crossing(schedule, arrival, gaps);
    gates.open(d, c);
    return place(schedule, arrival, c, Placement::Branch::Fallback);
}

}  // namespace

Placement schedule_exhaustive(Schedule& schedule, const Arrival& arrival, const Gaps& gaps)
{
    check_arrival(arrival, gaps);
    const int d = arrival.lane;
    const double a = arrival.earliest;

    if (auto c = scheduled_last(schedule, arrival, gaps)) {
        return place(schedule, arrival, *c, Placement::Branch::ScheduledLast);
    }

    if (auto t = schedule.lane_tail(d); t && *t + gaps.headway(d) > a) {
        const double c = *t + gaps.headway(d);
        schedule.shift_after(*t, gaps.headway(d));
        return place(schedule, arrival, c, Placement::Branch::JoinedPlatoon);
    }

    const auto own_tail = schedule.lane_tail(d);
    for (int l : reverse_cyclic(d, gaps.lanes())) {
        const auto t = schedule.lane_tail(l);
        if (!t || *t + gaps.between(l, d) <= a || (own_tail && *t < *own_tail)) {
            continue;
        }
        const double c = *t + gaps.between(l, d);
        schedule.shift_after(*t, insertion_cost(schedule, *t, l, d, gaps));
        return place(schedule, arrival, c, Placement::Branch::NewPlatoon);
    }

    // Only reachable on exact ties (c_last + B == a with equal clearances).
    const double c = fallback_crossing(schedule, arrival, gaps);
    return place(schedule, arrival, c, Placement::Branch::Fallback);
}

Placement schedule_gated(Schedule& schedule, GateBook& gates, const Arrival& arrival, const Gaps& gaps)
{
    return schedule_gated_capped(schedule, gates, arrival, gaps, std::nullopt);
}

Placement schedule_batch(Schedule& schedule, GateBook& gates, const Arrival& arrival, const Gaps& gaps,
                         int cap)
{
    if (cap < 1) {
        throw Error(ErrorCode::NonPositiveParameter, fmt::format("batch cap must be >= 1, got {}", cap));
    }
    return schedule_gated_capped(schedule, gates, arrival, gaps, cap);
}

Vehicle depart(Schedule& schedule, GateBook* gates, double now, const Gaps& gaps)
{
    if (schedule.empty()) {
        throw Error(ErrorCode::DepartureOutOfOrder, fmt::format("no vehicle to depart at {}", now));
    }
    const auto& head = schedule.ordering().front();
    const double due = head.crossing + gaps.headway(head.lane);
    if (std::abs(now - due) > 1e-9 * std::max(1.0, std::abs(due))) {
        throw Error(ErrorCode::DepartureOutOfOrder,
                    fmt::format("head vehicle {} finishes at {}, not {}", head.id, due, now));
    }
    Vehicle out = schedule.pop_front();
    if (gates) {
        gates->close_started(now);
    }
    return out;
}

bool assert_regular(const Schedule& before, const Schedule& after, std::int64_t inserted_id)
{
    std::vector<std::int64_t> old_ids;
    old_ids.reserve(before.size());
    for (const auto& v : before.ordering()) {
        old_ids.push_back(v.id);
    }
    std::vector<std::int64_t> new_ids;
    new_ids.reserve(after.size());
    for (const auto& v : after.ordering()) {
        if (v.id != inserted_id) {
            new_ids.push_back(v.id);
        }
    }
    return old_ids == new_ids;
}

// ---------------------------------------------------------------- PfaEngine

PfaEngine::PfaEngine(PfaKind kind, Gaps gaps) : kind_(kind), gaps_(std::move(gaps)), gates_(gaps_.lanes()) {}

Placement PfaEngine::on_arrival(const Arrival& arrival, double now)
{
    switch (kind_.discipline) {
    case PfaKind::Discipline::Exhaustive:
        return schedule_exhaustive(schedule_, arrival, gaps_);
    case PfaKind::Discipline::Gated:
        gates_.close_started(now);
        return schedule_gated(schedule_, gates_, arrival, gaps_);
    case PfaKind::Discipline::Batch:
        gates_.close_started(now);
        return schedule_batch(schedule_, gates_, arrival, gaps_, kind_.cap);
    }
    throw Error(ErrorCode::UnsupportedDiscipline, kind_.name());
}

std::optional<double> PfaEngine::next_departure() const
{
    if (schedule_.empty()) {
        return std::nullopt;
    }
    const auto& head = schedule_.ordering().front();
    return head.crossing + gaps_.headway(head.lane);
}

Vehicle PfaEngine::depart(double now)
{
    const bool gated = kind_.discipline != PfaKind::Discipline::Exhaustive;
    return platoon::depart(schedule_, gated ? &gates_ : nullptr, now, gaps_);
}

}  // namespace platoon
