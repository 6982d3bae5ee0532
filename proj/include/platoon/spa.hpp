#ifndef PLATOON_SPA_HPP
#define PLATOON_SPA_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "platoon/core.hpp"

namespace platoon {

enum class SpaKind { MinDistance, MinAccel };

SpaKind parse_spa(std::string_view text);
const char* to_string(SpaKind kind);

/// Constant-acceleration piece of a trajectory; x_start/v_start are the
/// state at `start`.
struct Segment {
    double start = 0.0;
    double duration = 0.0;
    double accel = 0.0;
    double x_start = 0.0;
    double v_start = 0.0;

    double end() const { return start + duration; }
};

struct KinematicState {
    double x = 0.0;
    double v = 0.0;
    double a = 0.0;
};

/// Piecewise constant acceleration motion from SPA-region entry (t0, x0 < 0)
/// to the conflict area (t_f, x = 0, v = v_max). All times are absolute.
struct Trajectory {
    SpaKind kind = SpaKind::MinDistance;
    double t0 = 0.0;
    double t_f = 0.0;
    double x0 = 0.0;
    double v0 = 0.0;
    double v_max = 0.0;
    double a_max = 0.0;
    double t_full = 0.0;  ///< back at full speed
    std::vector<Segment> segments;

    // min-distance breakpoints
    double t_dec = 0.0;
    double t_stop = 0.0;
    double t_acc = 0.0;
    bool full_stop = false;
    double reach = 0.0;    ///< L, distance covered when stopping for zero seconds
    double t_tilde = 0.0;  ///< deceleration time without a stop
    double v1 = 0.0;       ///< lowest speed reached

    // min-accel breakpoints (t1, t2 relative to t0)
    double t_cruise = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double v_cruise = 0.0;

    int deceleration_count() const;
};

/// Plans the minimum-distance profile (stay close to the intersection).
/// The vehicle enters at full speed. With a same-lane predecessor crossing
/// exactly one headway (of `lane`) earlier, both regain full speed at the
/// same time.
Trajectory plan_min_distance(double x0, double t_f, const Trajectory* pred, const SimParams& params,
                             double t0 = 0.0, int lane = 1);

/// Plans the minimum-acceleration profile: brake, cruise, accelerate.
Trajectory plan_min_accel(double x0, double v0, double t_f, const Trajectory* pred, const SimParams& params,
                          double t0 = 0.0, int lane = 1);

KinematicState eval(const Trajectory& traj, double t);

/// Integral of |x(t)| over [t0, t_f], exact per segment.
double area(const Trajectory& traj);

/// Integral of |a(t)| over [t0, t_f].
double accel_cost(const Trajectory& traj);

/// True iff a vehicle entering at full speed can stop and be back at full
/// speed by t_full: (t_f - t_full) v + v^2 / a <= |x0|.
bool check_overcrowding(double x0, double t_f, double t_full, const SimParams& params);

/// Smallest follower-to-leader distance y(t) - x(t) over the overlap of the
/// two trajectories, exact: the distance is quadratic between breakpoints.
double min_separation(const Trajectory& follower, const Trajectory& leader);

struct PlannedVehicle {
    Vehicle vehicle;
    double spa_entry = 0.0;
    std::optional<Trajectory> trajectory;
    std::optional<ErrorCode> error;  ///< SingleDipViolation when planning failed
    std::string message;
};

/// Plans every vehicle of a final schedule, lane by lane in crossing order,
/// each against its same-lane predecessor. `spa_entry[i]` is the time
/// vehicle i enters the SPA region at full speed, at x0 = -region_spa.
/// Failures are reported per vehicle, not thrown.
std::vector<PlannedVehicle> plan_schedule(const std::vector<Vehicle>& crossed, const std::vector<double>& spa_entry,
                                          SpaKind kind, const SimParams& params);

/// Segment table: vehicle_id, segment_index, t_start, duration, accel, x_start, v_start.
void write_segments_csv(std::ostream& out, const std::vector<PlannedVehicle>& plans);
/// Sampled table: vehicle_id, lane, t, x, v, a.
void write_samples_csv(std::ostream& out, const std::vector<PlannedVehicle>& plans, double dt);

}  // namespace platoon

#endif  // PLATOON_SPA_HPP
