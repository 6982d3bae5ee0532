#ifndef PLATOON_CONFIG_HPP
#define PLATOON_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "platoon/core.hpp"
#include "platoon/pfa.hpp"
#include "platoon/sim.hpp"

namespace platoon {

/// Everything a JSON experiment file can set.
struct ExperimentConfig {
    SimParams params;
    PfaKind pfa = PfaKind::exhaustive();
    std::int64_t horizon = 1'000'000;
    std::int64_t warmup = -1;  ///< -1 = 10% of the horizon
    std::uint64_t seed = 1;
    std::vector<ScriptedArrival> arrivals;
};

/// Parses a JSON document. Keys: n, lambda, B, S, v_max, a_max, l_min,
/// region_pfa_m, region_spa_m, pfa, batch_cap, horizon_vehicles,
/// warmup_vehicles, seed, clearance_model, arrivals. B, S and lambda accept
/// a number (same for every lane) or an array of n numbers. Unknown keys and
/// malformed values raise ConfigError; the result is not yet validated
/// against the physical constraints (see validate_config).
ExperimentConfig parse_config(std::string_view json_text);

/// Reads and parses a file; IoError when it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

ClearanceModel parse_clearance_model(std::string_view text);
const char* to_string(ClearanceModel model);

}  // namespace platoon

#endif  // PLATOON_CONFIG_HPP
