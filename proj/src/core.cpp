#include "platoon/core.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace platoon {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::UnstableLoad: return "UnstableLoad";
    case ErrorCode::SClearanceBelowB: return "SClearanceBelowB";
    case ErrorCode::NoInsertionPoint: return "NoInsertionPoint";
    case ErrorCode::InconsistentGateBook: return "InconsistentGateBook";
    case ErrorCode::DepartureOutOfOrder: return "DepartureOutOfOrder";
    case ErrorCode::InfeasibleCrossingTime: return "InfeasibleCrossingTime";
    case ErrorCode::OvercrowdingViolation: return "OvercrowdingViolation";
    case ErrorCode::SeparationViolation: return "SeparationViolation";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::InfeasibleInstance: return "InfeasibleInstance";
    case ErrorCode::UnsupportedDiscipline: return "UnsupportedDiscipline";
    case ErrorCode::SingleDipViolation: return "SingleDipViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), what)), code_(code), detail_(what)
{
}

double SimParams::load() const
{
    double rho = 0.0;
    for (int i = 1; i <= lanes; ++i) {
        rho += lane_load(i);
    }
    return rho;
}

double SimParams::lane_load(int lane) const
{
    return arrival_rate.at(lane - 1) * headway.at(lane - 1);
}

Gaps::Gaps(std::vector<double> headway, std::vector<double> setup, ClearanceModel model)
    : headway_(std::move(headway)), setup_(std::move(setup)), model_(model)
{
    if (headway_.empty() || headway_.size() != setup_.size()) {
        throw Error(ErrorCode::ConfigError, "headway and setup must be non-empty and of equal length");
    }
}

Gaps::Gaps(const SimParams& params) : Gaps(params.headway, params.setup, params.clearance_model) {}

Gaps Gaps::start_to_start(double headway, double clearance, int lanes)
{
    return Gaps(std::vector<double>(lanes, headway), std::vector<double>(lanes, clearance),
                ClearanceModel::StartToStart);
}

double Gaps::between(int from, int to) const
{
    if (from == to) {
        return headway(from);
    }
    const double s = setup_.at(to - 1);
    return model_ == ClearanceModel::Setup ? headway(from) + s : s;
}

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorCode::NonPositiveParameter, fmt::format("{} must be > 0, got {}", name, value));
    }
}

}  // namespace

ValidatedParams validate_config(const SimParams& params, bool steady_state)
{
    if (params.lanes < 1) {
        throw Error(ErrorCode::NonPositiveParameter, fmt::format("n must be >= 1, got {}", params.lanes));
    }
    const auto n = static_cast<std::size_t>(params.lanes);
    if (params.headway.size() != n || params.setup.size() != n || params.arrival_rate.size() != n) {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("per-lane arrays must have n={} entries (B: {}, S: {}, lambda: {})", n,
                                params.headway.size(), params.setup.size(), params.arrival_rate.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        require_positive(params.headway[i], "B");
        require_positive(params.setup[i], "S");
        require_positive(params.arrival_rate[i], "lambda");
    }
    require_positive(params.v_max, "v_max");
    require_positive(params.a_max, "a_max");
    require_positive(params.l_min, "l_min");
    require_positive(params.region_pfa, "region_pfa_m");
    require_positive(params.region_spa, "region_spa_m");

    if (n > 1) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && params.setup[j] < params.headway[i]) {
                    throw Error(ErrorCode::SClearanceBelowB,
                                fmt::format("S={} below B={} (lane {} -> {})", params.setup[j],
                                            params.headway[i], i + 1, j + 1));
                }
            }
        }
    }

    ValidatedParams out{params, params.load(), {}};
    if (out.load >= 1.0) {
        const auto msg = fmt::format("rho = {} >= 1, no steady state exists", out.load);
        if (steady_state) {
            throw Error(ErrorCode::UnstableLoad, msg);
        }
        out.warnings.push_back(msg);
    }
    return out;
}

}  // namespace platoon
