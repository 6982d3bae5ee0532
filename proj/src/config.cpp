#include "platoon/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

namespace platoon {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

double number(const json& j, const char* key)
{
    if (!j.is_number()) {
        fail(fmt::format("'{}' must be a number", key));
    }
    return j.get<double>();
}

std::int64_t integer(const json& j, const char* key)
{
    if (!j.is_number_integer()) {
        fail(fmt::format("'{}' must be an integer", key));
    }
    return j.get<std::int64_t>();
}

std::vector<double> per_lane(const json& j, const char* key, int lanes)
{
    if (j.is_number()) {
        return std::vector<double>(static_cast<std::size_t>(lanes), j.get<double>());
    }
    if (!j.is_array()) {
        fail(fmt::format("'{}' must be a number or an array", key));
    }
    if (j.size() != static_cast<std::size_t>(lanes)) {
        fail(fmt::format("'{}' has {} entries, expected n = {}", key, j.size(), lanes));
    }
    std::vector<double> out;
    for (const auto& x : j) {
        out.push_back(number(x, key));
    }
    return out;
}

const std::set<std::string> kKeys = {
    "n",           "lambda",       "B",     "S",          "v_max",           "a_max",
    "l_min",       "region_pfa_m", "region_spa_m", "pfa", "batch_cap",       "horizon_vehicles",
    "warmup_vehicles", "seed",     "clearance_model", "arrivals",
};

}  // namespace

ClearanceModel parse_clearance_model(std::string_view text)
{
    if (text == "setup") {
        return ClearanceModel::Setup;
    }
    if (text == "start_to_start") {
        return ClearanceModel::StartToStart;
    }
    fail(fmt::format("unknown clearance_model '{}' (expected setup or start_to_start)", text));
}

const char* to_string(ClearanceModel model)
{
    return model == ClearanceModel::Setup ? "setup" : "start_to_start";
}

ExperimentConfig parse_config(std::string_view json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(fmt::format("invalid JSON: {}", e.what()));
    }
    if (!doc.is_object()) {
        fail("configuration must be a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (!kKeys.contains(key)) {
            fail(fmt::format("unknown key '{}'", key));
        }
    }

    ExperimentConfig cfg;
    SimParams& p = cfg.params;
    if (doc.contains("n")) {
        const auto n = integer(doc["n"], "n");
        if (n < 1 || n > 1000) {
            fail(fmt::format("'n' must be in [1, 1000], got {}", n));
        }
        p.lanes = static_cast<int>(n);
    }
    p.arrival_rate = doc.contains("lambda") ? per_lane(doc["lambda"], "lambda", p.lanes)
                                            : std::vector<double>(static_cast<std::size_t>(p.lanes), 0.25);
    p.headway = doc.contains("B") ? per_lane(doc["B"], "B", p.lanes)
                                  : std::vector<double>(static_cast<std::size_t>(p.lanes), 1.0);
    p.setup = doc.contains("S") ? per_lane(doc["S"], "S", p.lanes)
                                : std::vector<double>(static_cast<std::size_t>(p.lanes), 2.375);

    const std::pair<const char*, double*> scalars[] = {
        {"v_max", &p.v_max},
        {"a_max", &p.a_max},
        {"l_min", &p.l_min},
        {"region_pfa_m", &p.region_pfa},
        {"region_spa_m", &p.region_spa},
    };
    for (const auto& [key, target] : scalars) {
        if (doc.contains(key)) {
            *target = number(doc[key], key);
        }
    }
    if (doc.contains("clearance_model")) {
        if (!doc["clearance_model"].is_string()) {
            fail("'clearance_model' must be a string");
        }
        p.clearance_model = parse_clearance_model(doc["clearance_model"].get<std::string>());
    }

    int cap = 100;
    if (doc.contains("batch_cap")) {
        const auto c = integer(doc["batch_cap"], "batch_cap");
        if (c < 1) {
            fail(fmt::format("'batch_cap' must be >= 1, got {}", c));
        }
        cap = static_cast<int>(c);
    }
    if (doc.contains("pfa")) {
        if (!doc["pfa"].is_string()) {
            fail("'pfa' must be a string");
        }
        try {
            cfg.pfa = parse_pfa(doc["pfa"].get<std::string>(), cap);
        } catch (const Error& e) {
            fail(e.detail());
        }
    }

    if (doc.contains("horizon_vehicles")) {
        cfg.horizon = integer(doc["horizon_vehicles"], "horizon_vehicles");
        if (cfg.horizon < 1) {
            fail("'horizon_vehicles' must be positive");
        }
    }
    if (doc.contains("warmup_vehicles")) {
        cfg.warmup = integer(doc["warmup_vehicles"], "warmup_vehicles");
        if (cfg.warmup < 0) {
            fail("'warmup_vehicles' must be non-negative");
        }
    }
    if (doc.contains("seed")) {
        const auto& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            fail("'seed' must be a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }

    if (doc.contains("arrivals")) {
        const auto& list = doc["arrivals"];
        if (!list.is_array()) {
            fail("'arrivals' must be an array of {lane, t} objects");
        }
        for (const auto& item : list) {
            if (!item.is_object() || !item.contains("lane") || !item.contains("t") || item.size() != 2) {
                fail("each arrival must be an object with exactly 'lane' and 't'");
            }
            const auto lane = integer(item["lane"], "lane");
            if (lane < 1 || lane > p.lanes) {
                fail(fmt::format("arrival lane {} outside 1..{}", lane, p.lanes));
            }
            cfg.arrivals.push_back({static_cast<int>(lane), number(item["t"], "t")});
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::error_code ec;
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path, ec)) {
        throw Error(ErrorCode::IoError, fmt::format("cannot read config file '{}'", path.string()));
    }
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::IoError, fmt::format("error reading '{}'", path.string()));
    }
    try {
        return parse_config(text.str());
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path.string(), e.detail()));
    }
}

}  // namespace platoon
