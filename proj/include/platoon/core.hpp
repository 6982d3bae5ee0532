#ifndef PLATOON_CORE_HPP
#define PLATOON_CORE_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoon {

enum class ErrorCode {
    NonPositiveParameter,
    UnstableLoad,
    SClearanceBelowB,
    NoInsertionPoint,
    InconsistentGateBook,
    DepartureOutOfOrder,
    InfeasibleCrossingTime,
    OvercrowdingViolation,
    SeparationViolation,
    NegativeDiscriminant,
    OutOfDomain,
    InfeasibleInstance,
    UnsupportedDiscipline,
    SingleDipViolation,
    ConfigError,
    IoError,
    InvariantViolation,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

/// A crossing request: a vehicle entered the control region and can reach
/// the conflict area no earlier than `earliest`.
struct Arrival {
    std::int64_t id = 0;
    int lane = 1;           ///< 1-based
    double earliest = 0.0;  ///< a_V, seconds
};

/// A scheduled vehicle. Invariant: crossing >= earliest.
struct Vehicle {
    std::int64_t id = 0;
    int lane = 1;
    double earliest = 0.0;  ///< a_V
    double crossing = 0.0;  ///< c_V

    double delay() const { return crossing - earliest; }
};

/// How the configured S maps onto the gap between crossings of different
/// lanes.
enum class ClearanceModel {
    /// S is a setup following the service B of the previous vehicle: a lane
    /// switch from i to j needs B_i + S_j between crossing starts. This is
    /// the polling-model reading and the default.
    Setup,
    /// S is the start-to-start gap itself (requires S >= B).
    StartToStart,
};

struct SimParams {
    int lanes = 2;
    std::vector<double> headway{1.0, 1.0};        ///< B_i, seconds
    std::vector<double> setup{2.375, 2.375};      ///< S_i, seconds
    std::vector<double> arrival_rate{0.25, 0.25}; ///< lambda_i, vehicles/s
    double v_max = 15.0;        ///< m/s
    double a_max = 4.0;         ///< m/s^2
    double l_min = 5.0;         ///< front-to-front spacing, m
    double region_pfa = 25.0;   ///< m
    double region_spa = 50.0;   ///< m
    ClearanceModel clearance_model = ClearanceModel::Setup;

    /// rho = sum_i lambda_i B_i
    double load() const;
    double lane_load(int lane) const;
};

/// Minimum start-to-start separation of consecutive crossings. Shared by the
/// PFAs so that they are agnostic to the clearance model.
class Gaps {
public:
    Gaps(std::vector<double> headway, std::vector<double> setup, ClearanceModel model);
    explicit Gaps(const SimParams& params);

    /// Plain start-to-start values: same(i) = B_i, switch(i -> j) = S_j.
    static Gaps start_to_start(double headway, double clearance, int lanes);

    int lanes() const { return static_cast<int>(headway_.size()); }
    double headway(int lane) const { return headway_.at(lane - 1); }
    /// Gap required between a lane `from` crossing and a following `to` one.
    double between(int from, int to) const;

private:
    std::vector<double> headway_;
    std::vector<double> setup_;
    ClearanceModel model_;
};

struct ValidatedParams {
    SimParams params;
    double load = 0.0;
    std::vector<std::string> warnings;
};

/// Checks positivity, clearance and (when `steady_state`) stability.
/// ρ >= 1 is an error in steady-state mode and a warning otherwise.
ValidatedParams validate_config(const SimParams& params, bool steady_state = true);

}  // namespace platoon

#endif  // PLATOON_CORE_HPP
