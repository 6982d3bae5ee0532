#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "platoon/config.hpp"
#include "platoon/output.hpp"

using namespace platoon;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::string& json)
{
    try {
        parse_config(json);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error for " << json);
    return ErrorCode::InvariantViolation;
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "platoonsim_unit";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("configuration keys")
{
    const auto cfg = parse_config(R"({
        "n": 2, "lambda": [0.3, 0.1], "B": 1.0, "S": [2.375, 3.0], "v_max": 14, "a_max": 3.5,
        "l_min": 6, "region_pfa_m": 30, "region_spa_m": 120, "pfa": "batch", "batch_cap": 7,
        "horizon_vehicles": 5000, "warmup_vehicles": 100, "seed": 99, "clearance_model": "start_to_start",
        "arrivals": [{"lane": 2, "t": 0.5}, {"lane": 1, "t": 1}]
    })");
    CHECK(cfg.params.lanes == 2);
    CHECK(cfg.params.arrival_rate == std::vector<double>{0.3, 0.1});
    CHECK(cfg.params.headway == std::vector<double>{1.0, 1.0});
    CHECK(cfg.params.setup == std::vector<double>{2.375, 3.0});
    CHECK(cfg.params.v_max == 14.0);
    CHECK(cfg.params.a_max == 3.5);
    CHECK(cfg.params.l_min == 6.0);
    CHECK(cfg.params.region_pfa == 30.0);
    CHECK(cfg.params.region_spa == 120.0);
    CHECK(cfg.params.clearance_model == ClearanceModel::StartToStart);
    CHECK(cfg.pfa == PfaKind::batch(7));
    CHECK(cfg.horizon == 5000);
    CHECK(cfg.warmup == 100);
    CHECK(cfg.seed == 99);
    REQUIRE(cfg.arrivals.size() == 2);
    CHECK(cfg.arrivals[0].lane == 2);
    CHECK(cfg.arrivals[1].t == 1.0);
}

TEST_CASE("configuration defaults")
{
    const auto cfg = parse_config("{}");
    CHECK(cfg.params.lanes == 2);
    CHECK(cfg.params.clearance_model == ClearanceModel::Setup);
    CHECK(cfg.pfa == PfaKind::exhaustive());
    CHECK(cfg.warmup == -1);
    CHECK(parse_config(R"({"n": 3, "lambda": 0.1})").params.arrival_rate.size() == 3);
    CHECK(parse_config(R"({"pfa": "batch"})").pfa == PfaKind::batch(100));
    CHECK(parse_config(R"({"pfa": "batch:3"})").pfa == PfaKind::batch(3));
}

TEST_CASE("configuration errors")
{
    CHECK(code_of("not json") == ErrorCode::ConfigError);
    CHECK(code_of("[1, 2]") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"lamda": [0.1, 0.1]})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"lambda": [0.1, 0.1, 0.1]})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"B": "one"})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"n": 0})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"n": 1.5})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"pfa": "fifo"})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"batch_cap": 0})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"seed": -1})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"clearance_model": "both"})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"arrivals": [{"lane": 3, "t": 0}]})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"arrivals": [{"lane": 1}]})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"horizon_vehicles": 0})") == ErrorCode::ConfigError);
}

TEST_CASE("load_config reports unreadable files as I/O errors")
{
    try {
        load_config("/nonexistent/platoonsim.json");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
    const auto path = scratch("bad.json");
    std::ofstream(path) << R"({"n": -2})";
    try {
        load_config(path);
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
    }
}

TEST_CASE("write_atomic replaces the file or leaves it untouched")
{
    const auto path = scratch("atomic.txt");
    write_atomic(path, [](std::ostream& out) { out << "first\n"; });
    CHECK(slurp(path) == "first\n");
    CHECK_THROWS(write_atomic(path, [](std::ostream& out) {
        out << "partial";
        throw std::runtime_error("boom");
    }));
    CHECK(slurp(path) == "first\n");
    CHECK_FALSE(fs::exists(fs::path(path.string() + ".tmp")));
    try {
        write_atomic("/nonexistent/dir/x.csv", [](std::ostream&) {});
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}

TEST_CASE("results rows")
{
    SimStats s;
    LaneStats lane;
    lane.count = 10;
    lane.mean = 1.5;
    lane.ci95 = 0.25;
    lane.ahead = 3;
    lane.seen = 4;
    s.lanes = {lane, lane};
    s.all = lane;
    s.all.count = 20;
    std::ostringstream out;
    write_results_rows(out, 0.5, PfaKind::gated(), s, {2.0, std::nullopt}, 2.0, 42);
    CHECK(out.str() ==
          "0.5,gated,1,1.5,0.25,2,0.75,10,42\n"
          "0.5,gated,2,1.5,0.25,,0.75,10,42\n"
          "0.5,gated,all,1.5,0.25,2,0.75,20,42\n");
    CHECK(std::string(kResultsHeader) ==
          "rho,discipline,lane,sim_delay_mean,ci95,approx_delay,fairness,n_vehicles,seed");
}

TEST_CASE("approximation table")
{
    const auto inp = PollingInput::deterministic({0.25, 0.25}, {1.0, 1.0}, {2.375, 2.375});
    std::ostringstream out;
    write_approx_csv(out, inp, {0.5}, {PfaKind::exhaustive(), PfaKind::batch(100)});
    CHECK(out.str() ==
          "rho,lane,discipline,K1,K2,omega,approx_delay\n"
          "0.5,1,exhaustive,3.09765625,-1.41015625,1.6875,2.392578125\n"
          "0.5,2,exhaustive,3.09765625,-1.41015625,1.6875,2.392578125\n"
          "0.5,1,batch,,,,\n"
          "0.5,2,batch,,,,\n");
}

TEST_CASE("vehicle log line")
{
    std::ostringstream out;
    write_vehicle_log_line(out, Vehicle{7, 2, 10.0, 12.5}, 5.0);
    CHECK(out.str() == R"({"id":7,"lane":2,"entry_t":10,"a":15,"c":17.5,"delay":2.5})"
                       "\n");
}

TEST_CASE("scripted scenario")
{
    SimParams p;
    p.region_spa = 200.0;
    const auto crossed = schedule_scripted(p, PfaKind::exhaustive(), {{1, 0.0}, {2, 0.2}, {1, 0.5}});
    REQUIRE(crossed.size() == 3);
    const double offset = free_flow_offset(p);
    CHECK(offset == doctest::Approx(225.0 / 15.0));
    CHECK(crossed[0].id == 1);
    CHECK(crossed[0].crossing == doctest::Approx(offset));
    CHECK(crossed[1].id == 3);
    CHECK(crossed[1].crossing == doctest::Approx(offset + 1.0));
    CHECK(crossed[2].id == 2);
    CHECK(crossed[2].crossing == doctest::Approx(offset + 1.0 + 1.0 + 2.375));
    CHECK_THROWS_AS(schedule_scripted(p, PfaKind::gated(), {{3, 0.0}}), Error);
}
