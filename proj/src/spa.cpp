#include "platoon/spa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace platoon {

namespace {

constexpr double kTimeTol = 1e-9;
constexpr double kSeparationTol = 1e-6;

struct Piece {
    double duration;
    double accel;
};

void fill_segments(Trajectory& traj, std::initializer_list<Piece> pieces)
{
    double t = traj.t0;
    double x = traj.x0;
    double v = traj.v0;
    for (const auto& p : pieces) {
        if (p.duration <= 0.0) {
            continue;
        }
        traj.segments.push_back(Segment{t, p.duration, p.accel, x, v});
        x += v * p.duration + 0.5 * p.accel * p.duration * p.duration;
        v += p.accel * p.duration;
        t += p.duration;
    }
}

double headway_of(const SimParams& params, int lane)
{
    return params.headway.at(static_cast<std::size_t>(lane - 1));
}

double choose_t_full(double t_f, const Trajectory* pred, const SimParams& params, int lane)
{
    if (pred && std::abs(t_f - pred->t_f - headway_of(params, lane)) <= kTimeTol) {
        return pred->t_full;
    }
    return t_f;
}

void check_entry(double x0, double t0, double t_f, double v_max)
{
    if (!(x0 <= 0.0) || !std::isfinite(x0) || !std::isfinite(t_f)) {
        throw Error(ErrorCode::OutOfDomain, fmt::format("entry position must be <= 0, got {}", x0));
    }
    const double T = t_f - t0;
    if (T < -x0 / v_max - kTimeTol) {
        throw Error(ErrorCode::InfeasibleCrossingTime,
                    fmt::format("crossing in {} s needs more than v_max over {} m", T, -x0));
    }
}

}  // namespace

SpaKind parse_spa(std::string_view text)
{
    if (text == "min-distance") {
        return SpaKind::MinDistance;
    }
    if (text == "min-accel") {
        return SpaKind::MinAccel;
    }
    throw Error(ErrorCode::ConfigError, fmt::format("unknown SPA '{}'", text));
}

const char* to_string(SpaKind kind)
{
    return kind == SpaKind::MinDistance ? "min-distance" : "min-accel";
}

int Trajectory::deceleration_count() const
{
    int count = 0;
    bool in_dec = false;
    for (const auto& s : segments) {
        const bool dec = s.accel < 0.0;
        if (dec && !in_dec) {
            ++count;
        }
        in_dec = dec;
    }
    return count;
}

namespace {

Trajectory min_distance_with(double x0, double t_f, double t_full, const SimParams& params, double t0)
{
    const double v = params.v_max;
    const double A = params.a_max;

    Trajectory traj;
    traj.kind = SpaKind::MinDistance;
    traj.t0 = t0;
    traj.t_f = t_f;
    traj.x0 = x0;
    traj.v0 = v;
    traj.v_max = v;
    traj.a_max = A;
    traj.t_full = t_full;

    const double X = -x0;
    const double T = t_f - t0;
    const double slack = std::max(0.0, T * v - X);  // distance to lose, m
    traj.reach = v * (T - v / A);

    if (slack <= 0.0) {
        traj.t_dec = traj.t_stop = traj.t_acc = traj.t_full = t_f;
        traj.v1 = v;
    } else if (traj.reach >= X) {
        traj.full_stop = true;
        const double stop = T - v / A - X / v;
        traj.t_acc = traj.t_full - v / A;
        traj.t_stop = traj.t_acc - stop;
        traj.t_dec = traj.t_stop - v / A;
        traj.t_tilde = v / A;
        traj.v1 = 0.0;
    } else {
        traj.t_tilde = std::sqrt(slack / A);
        traj.t_acc = traj.t_full - traj.t_tilde;
        traj.t_stop = traj.t_acc;
        traj.t_dec = traj.t_acc - traj.t_tilde;
        traj.v1 = v - A * traj.t_tilde;
    }
    if (traj.t_dec < t0 - kTimeTol) {
        throw Error(ErrorCode::OvercrowdingViolation,
                    fmt::format("braking would have to start {} s before entry", t0 - traj.t_dec));
    }
    traj.t_dec = std::max(traj.t_dec, t0);

    fill_segments(traj, {{traj.t_dec - t0, 0.0},
                         {traj.t_stop - traj.t_dec, -A},
                         {traj.t_acc - traj.t_stop, 0.0},
                         {traj.t_full - traj.t_acc, A},
                         {t_f - traj.t_full, 0.0}});
    return traj;
}

Trajectory min_accel_with(double x0, double v0, double t_f, double t_full, const SimParams& params, double t0)
{
    const double v = params.v_max;
    const double A = params.a_max;

    Trajectory traj;
    traj.kind = SpaKind::MinAccel;
    traj.t0 = t0;
    traj.t_f = t_f;
    traj.x0 = x0;
    traj.v0 = v0;
    traj.v_max = v;
    traj.a_max = A;
    traj.t_full = t_full;

    const double X = -x0;
    const double T = t_f - t0;
    const double Tf = traj.t_full - t0;
    const double delta = (v - v0) / A;

    // Distance after braking s seconds, then accelerating just in time to
    // be at v_max at t_full: A s^2 - A (Tf - delta) s + c = X.
    const double b = A * (Tf - delta);
    const double c = v0 * Tf + 0.5 * A * delta * delta + v * (T - Tf) - X;
    double disc = b * b - 4.0 * A * c;
    if (disc < -1e-9 * std::max(1.0, b * b)) {
        throw Error(ErrorCode::NegativeDiscriminant,
                    fmt::format("no single-dip profile reaches x=0 at t={} (discriminant {})", t_f, disc));
    }
    disc = std::max(disc, 0.0);
    double s = (b - std::sqrt(disc)) / (2.0 * A);
    if (s < -kTimeTol) {
        throw Error(ErrorCode::InfeasibleCrossingTime,
                    fmt::format("crossing at {} would need acceleration above v0={}", t_f, v0));
    }
    s = std::max(s, 0.0);
    traj.t1 = s;
    traj.t2 = std::max(s, Tf - delta - s);
    traj.v_cruise = v0 - A * s;
    if (traj.v_cruise < -1e-9) {
        throw Error(ErrorCode::InfeasibleCrossingTime, fmt::format("cruise speed {} below zero", traj.v_cruise));
    }
    traj.v_cruise = std::max(traj.v_cruise, 0.0);
    traj.t_cruise = t0 + traj.t1;
    traj.t_acc = t0 + traj.t2;
    traj.t_dec = t0;
    traj.t_stop = traj.t_cruise;
    traj.v1 = traj.v_cruise;

    fill_segments(traj, {{traj.t1, -A}, {traj.t2 - traj.t1, 0.0}, {Tf - traj.t2, A}, {T - Tf, 0.0}});
    return traj;
}

bool separated(const Trajectory& traj, const Trajectory& pred, const SimParams& params, double tol = kSeparationTol)
{
    return min_separation(traj, pred) >= params.l_min - tol;
}

/// Plans with t_full chosen from the predecessor. If that collides (the
/// predecessor is still waiting where this vehicle wants to stop), t_full is
/// lowered to the largest value that keeps the spacing: an earlier t_full
/// moves the whole profile back.
template <class Plan>
Trajectory plan_behind(double t_f, const Trajectory* pred, const SimParams& params, int lane, Plan plan)
{
    const double t_full = choose_t_full(t_f, pred, params, lane);
    Trajectory traj = plan(t_full);
    if (!pred || separated(traj, *pred, params)) {
        return traj;
    }
    const double gap = min_separation(traj, *pred);
    double bad = t_full;
    double good = t_full;
    std::optional<Trajectory> found;
    for (double step = 0.01; !found; step *= 2.0) {
        good = t_full - step;
        try {
            Trajectory candidate = plan(good);
            if (separated(candidate, *pred, params, 0.0)) {
                found = std::move(candidate);
            } else {
                bad = good;
            }
        } catch (const Error&) {
            throw Error(ErrorCode::SeparationViolation,
                        fmt::format("distance to predecessor drops to {} m (< {})", gap, params.l_min));
        }
    }
    for (int k = 0; k < 40 && bad - good > 1e-9; ++k) {
        const double mid = 0.5 * (good + bad);
        Trajectory candidate = plan(mid);
        if (separated(candidate, *pred, params, 0.0)) {
            good = mid;
            found = std::move(candidate);
        } else {
            bad = mid;
        }
    }
    return *found;
}

}  // namespace

Trajectory plan_min_distance(double x0, double t_f, const Trajectory* pred, const SimParams& params, double t0,
                             int lane)
{
    check_entry(x0, t0, t_f, params.v_max);
    return plan_behind(t_f, pred, params, lane,
                       [&](double t_full) { return min_distance_with(x0, t_f, t_full, params, t0); });
}

Trajectory plan_min_accel(double x0, double v0, double t_f, const Trajectory* pred, const SimParams& params,
                          double t0, int lane)
{
    check_entry(x0, t0, t_f, params.v_max);
    if (!(v0 >= 0.0) || v0 > params.v_max + kTimeTol) {
        throw Error(ErrorCode::OutOfDomain, fmt::format("entry speed {} outside [0, {}]", v0, params.v_max));
    }
    return plan_behind(t_f, pred, params, lane,
                       [&](double t_full) { return min_accel_with(x0, v0, t_f, t_full, params, t0); });
}

KinematicState eval(const Trajectory& traj, double t)
{
    if (t < traj.t0 - kTimeTol || t > traj.t_f + kTimeTol) {
        throw Error(ErrorCode::OutOfDomain, fmt::format("t={} outside [{}, {}]", t, traj.t0, traj.t_f));
    }
    if (t >= traj.t_f) {
        return {0.0, traj.v_max, 0.0};
    }
    if (traj.segments.empty()) {
        return {traj.x0, traj.v0, 0.0};
    }
    auto it = std::upper_bound(traj.segments.begin(), traj.segments.end(), t,
                               [](double value, const Segment& s) { return value < s.start; });
    const Segment& seg = it == traj.segments.begin() ? *it : *std::prev(it);
    const double tau = std::max(0.0, t - seg.start);
    return {seg.x_start + seg.v_start * tau + 0.5 * seg.accel * tau * tau, seg.v_start + seg.accel * tau, seg.accel};
}

double area(const Trajectory& traj)
{
    double total = 0.0;
    for (const auto& s : traj.segments) {
        const double tau = s.duration;
        total -= s.x_start * tau + s.v_start * tau * tau / 2.0 + s.accel * tau * tau * tau / 6.0;
    }
    return total;
}

double accel_cost(const Trajectory& traj)
{
    double total = 0.0;
    for (const auto& s : traj.segments) {
        total += std::abs(s.accel) * s.duration;
    }
    return total;
}

bool check_overcrowding(double x0, double t_f, double t_full, const SimParams& params)
{
    const double v = params.v_max;
    return (t_f - t_full) * v + v * v / params.a_max <= std::abs(x0);
}

double min_separation(const Trajectory& follower, const Trajectory& leader)
{
    const double lo = std::max(follower.t0, leader.t0);
    const double hi = std::min(follower.t_f, leader.t_f);
    if (hi < lo) {
        return std::numeric_limits<double>::infinity();
    }
    std::vector<double> times{lo, hi};
    for (const auto* traj : {&follower, &leader}) {
        for (const auto& s : traj->segments) {
            for (double t : {s.start, s.end()}) {
                if (t > lo && t < hi) {
                    times.push_back(t);
                }
            }
        }
    }
    std::sort(times.begin(), times.end());
    auto gap = [&](double t) { return eval(leader, t).x - eval(follower, t).x; };
    double best = gap(lo);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double a = times[k];
        const double b = times[k + 1];
        best = std::min(best, gap(b));
        if (b - a <= 0.0) {
            continue;
        }
        // the gap is quadratic in between; check its stationary point
        const auto mid_l = eval(leader, 0.5 * (a + b));
        const auto mid_f = eval(follower, 0.5 * (a + b));
        const double rel_accel = mid_l.a - mid_f.a;
        if (rel_accel > 0.0) {
            const double rel_speed = eval(leader, a).v - eval(follower, a).v;
            const double tau = -rel_speed / rel_accel;
            if (tau > 0.0 && a + tau < b) {
                best = std::min(best, gap(a + tau));
            }
        }
    }
    return best;
}

std::vector<PlannedVehicle> plan_schedule(const std::vector<Vehicle>& crossed, const std::vector<double>& spa_entry,
                                          SpaKind kind, const SimParams& params)
{
    if (crossed.size() != spa_entry.size()) {
        throw Error(ErrorCode::ConfigError, "one SPA entry time per vehicle required");
    }
    std::vector<std::size_t> order(crossed.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& u = crossed[a];
        const auto& w = crossed[b];
        return u.crossing < w.crossing || (u.crossing == w.crossing && u.id < w.id);
    });

    std::vector<PlannedVehicle> out;
    out.reserve(crossed.size());
    std::map<int, std::size_t> lane_last;  // index into `out` of the last planned vehicle per lane
    const double x0 = -params.region_spa;
    for (std::size_t idx : order) {
        PlannedVehicle pv{crossed[idx], spa_entry[idx], std::nullopt, std::nullopt, {}};
        const Trajectory* pred = nullptr;
        if (auto it = lane_last.find(pv.vehicle.lane); it != lane_last.end()) {
            pred = &*out[it->second].trajectory;
        }
        try {
            pv.trajectory = kind == SpaKind::MinDistance
                                ? plan_min_distance(x0, pv.vehicle.crossing, pred, params, pv.spa_entry,
                                                    pv.vehicle.lane)
                                : plan_min_accel(x0, params.v_max, pv.vehicle.crossing, pred, params, pv.spa_entry,
                                                 pv.vehicle.lane);
        } catch (const Error& e) {
            pv.error = ErrorCode::SingleDipViolation;
            pv.message = fmt::format("vehicle {}: {}", pv.vehicle.id, e.what());
        }
        out.push_back(std::move(pv));
        if (out.back().trajectory) {
            lane_last[out.back().vehicle.lane] = out.size() - 1;
        }
    }
    return out;
}

void write_segments_csv(std::ostream& out, const std::vector<PlannedVehicle>& plans)
{
    fmt::print(out, "vehicle_id,segment_index,t_start,duration,accel,x_start,v_start\n");
    for (const auto& pv : plans) {
        if (!pv.trajectory) {
            continue;
        }
        const auto& segs = pv.trajectory->segments;
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const auto& s = segs[k];
            fmt::print(out, "{},{},{},{},{},{},{}\n", pv.vehicle.id, k, s.start, s.duration, s.accel, s.x_start,
                       s.v_start);
        }
    }
}

void write_samples_csv(std::ostream& out, const std::vector<PlannedVehicle>& plans, double dt)
{
    fmt::print(out, "vehicle_id,lane,t,x,v,a\n");
    for (const auto& pv : plans) {
        if (!pv.trajectory) {
            continue;
        }
        const auto& traj = *pv.trajectory;
        const auto steps = static_cast<long>(std::floor((traj.t_f - traj.t0) / dt + 1e-9));
        for (long k = 0; k <= steps; ++k) {
            const double t = std::min(traj.t0 + static_cast<double>(k) * dt, traj.t_f);
            const auto st = eval(traj, t);
            fmt::print(out, "{},{},{},{},{},{}\n", pv.vehicle.id, pv.vehicle.lane, t, st.x, st.v, st.a);
        }
        if (traj.t0 + static_cast<double>(steps) * dt < traj.t_f) {
            fmt::print(out, "{},{},{},{},{},{}\n", pv.vehicle.id, pv.vehicle.lane, traj.t_f, 0.0, traj.v_max, 0.0);
        }
    }
}

}  // namespace platoon
