#include <optional>
#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fmt/format.h>

#include "platoon/config.hpp"
#include "platoon/core.hpp"
#include "platoon/output.hpp"
#include "platoon/pfa.hpp"
#include "platoon/polling.hpp"
#include "platoon/sim.hpp"
#include "platoon/spa.hpp"

namespace py = pybind11;
using namespace platoon;

namespace {

const char* branch_name(Placement::Branch b)
{
    switch (b) {
    case Placement::Branch::ScheduledLast: return "scheduled_last";
    case Placement::Branch::JoinedPlatoon: return "joined_platoon";
    case Placement::Branch::NewPlatoon: return "new_platoon";
    case Placement::Branch::Fallback: return "fallback";
    }
    return "unknown";
}

SimConfig make_config(const SimParams& params, const PfaKind& pfa, std::int64_t horizon, std::int64_t warmup,
                      std::uint64_t seed, bool steady_state, bool check_invariants)
{
    SimConfig cfg;
    cfg.params = params;
    cfg.pfa = pfa;
    cfg.horizon = horizon;
    cfg.warmup = warmup;
    cfg.seed = seed;
    cfg.steady_state = steady_state;
    cfg.check_invariants = check_invariants;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_platoonsim, m)
{
    m.doc() = "Platoon-forming algorithms, speed profiles and polling-model delay analysis";

    static PyObject* error_type = py::exception<Error>(m, "PlatoonError", PyExc_RuntimeError).release().ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object inst = py::handle(error_type)(e.what());
            inst.attr("code") = to_string(e.code());
            PyErr_SetObject(error_type, inst.ptr());
        }
    });

    py::enum_<ClearanceModel>(m, "ClearanceModel")
        .value("SETUP", ClearanceModel::Setup)
        .value("START_TO_START", ClearanceModel::StartToStart);

    py::class_<SimParams>(m, "SimParams")
        .def(py::init<>())
        .def_readwrite("lanes", &SimParams::lanes)
        .def_readwrite("headway", &SimParams::headway)
        .def_readwrite("setup", &SimParams::setup)
        .def_readwrite("arrival_rate", &SimParams::arrival_rate)
        .def_readwrite("v_max", &SimParams::v_max)
        .def_readwrite("a_max", &SimParams::a_max)
        .def_readwrite("l_min", &SimParams::l_min)
        .def_readwrite("region_pfa", &SimParams::region_pfa)
        .def_readwrite("region_spa", &SimParams::region_spa)
        .def_readwrite("clearance_model", &SimParams::clearance_model)
        .def("load", &SimParams::load)
        .def("lane_load", &SimParams::lane_load, py::arg("lane"));

    py::class_<ValidatedParams>(m, "ValidatedParams")
        .def_readonly("params", &ValidatedParams::params)
        .def_readonly("load", &ValidatedParams::load)
        .def_readonly("warnings", &ValidatedParams::warnings);
    m.def("validate_config", &validate_config, py::arg("params"), py::arg("steady_state") = true);

    py::class_<Arrival>(m, "Arrival")
        .def(py::init([](std::int64_t id, int lane, double earliest) { return Arrival{id, lane, earliest}; }),
             py::arg("id"), py::arg("lane"), py::arg("earliest"))
        .def_readwrite("id", &Arrival::id)
        .def_readwrite("lane", &Arrival::lane)
        .def_readwrite("earliest", &Arrival::earliest);

    py::class_<Vehicle>(m, "Vehicle")
        .def_readonly("id", &Vehicle::id)
        .def_readonly("lane", &Vehicle::lane)
        .def_readonly("earliest", &Vehicle::earliest)
        .def_readonly("crossing", &Vehicle::crossing)
        .def_property_readonly("delay", &Vehicle::delay)
        .def("__repr__", [](const Vehicle& v) {
            return fmt::format("Vehicle(id={}, lane={}, earliest={}, crossing={})", v.id, v.lane, v.earliest,
                               v.crossing);
        });

    py::class_<Gaps>(m, "Gaps")
        .def(py::init<const SimParams&>(), py::arg("params"))
        .def_static("start_to_start", &Gaps::start_to_start, py::arg("headway"), py::arg("clearance"),
                    py::arg("lanes"))
        .def("between", &Gaps::between, py::arg("from_lane"), py::arg("to_lane"))
        .def("headway", &Gaps::headway, py::arg("lane"));

    py::class_<PfaKind> kind(m, "PfaKind");
    py::enum_<PfaKind::Discipline>(kind, "Discipline")
        .value("EXHAUSTIVE", PfaKind::Discipline::Exhaustive)
        .value("GATED", PfaKind::Discipline::Gated)
        .value("BATCH", PfaKind::Discipline::Batch);
    kind.def_static("exhaustive", &PfaKind::exhaustive)
        .def_static("gated", &PfaKind::gated)
        .def_static("batch", &PfaKind::batch, py::arg("cap"))
        .def_readonly("discipline", &PfaKind::discipline)
        .def_readonly("cap", &PfaKind::cap)
        .def_property_readonly("name", &PfaKind::name)
        .def(py::self == py::self)
        .def("__repr__", [](const PfaKind& k) {
            return k.discipline == PfaKind::Discipline::Batch ? fmt::format("PfaKind.batch({})", k.cap)
                                                              : fmt::format("PfaKind.{}()", k.name());
        });
    m.def("parse_pfa", &parse_pfa, py::arg("text"), py::arg("default_cap") = 100);

    py::class_<Placement>(m, "Placement")
        .def_readonly("vehicle", &Placement::vehicle)
        .def_readonly("position", &Placement::position)
        .def_property_readonly("branch", [](const Placement& p) { return branch_name(p.branch); });

    py::class_<PfaEngine>(m, "PfaEngine")
        .def(py::init<PfaKind, Gaps>(), py::arg("kind"), py::arg("gaps"))
        .def("on_arrival", py::overload_cast<const Arrival&, double>(&PfaEngine::on_arrival), py::arg("arrival"),
             py::arg("now"))
        .def("on_arrival", py::overload_cast<const Arrival&>(&PfaEngine::on_arrival), py::arg("arrival"))
        .def("next_departure", &PfaEngine::next_departure)
        .def("depart", &PfaEngine::depart, py::arg("now"))
        .def_property_readonly("ordering", [](const PfaEngine& e) { return e.schedule().ordering(); });

    py::class_<LaneStats>(m, "LaneStats")
        .def_readonly("count", &LaneStats::count)
        .def_readonly("mean", &LaneStats::mean)
        .def_readonly("variance", &LaneStats::variance)
        .def_readonly("ci95", &LaneStats::ci95)
        .def_readonly("ahead", &LaneStats::ahead)
        .def_readonly("seen", &LaneStats::seen)
        .def_property_readonly("fairness", &LaneStats::fairness);

    py::class_<SimStats>(m, "SimStats")
        .def_readonly("lanes", &SimStats::lanes)
        .def_readonly("all", &SimStats::all)
        .def_readonly("arrivals", &SimStats::arrivals)
        .def_readonly("crossed", &SimStats::crossed)
        .def_readonly("in_system", &SimStats::in_system)
        .def_readonly("max_queue", &SimStats::max_queue)
        .def_readonly("end_time", &SimStats::end_time)
        .def(py::self == py::self);

    m.def(
        "run",
        [](const SimParams& params, const PfaKind& pfa, std::int64_t horizon, std::int64_t warmup,
           std::uint64_t seed, bool steady_state, bool check_invariants,
           std::optional<std::function<void(const Vehicle&)>> on_crossing) {
            auto cfg = make_config(params, pfa, horizon, warmup, seed, steady_state, check_invariants);
            if (on_crossing) {
                cfg.on_crossing = *on_crossing;
                return run(cfg);
            }
            py::gil_scoped_release release;
            return run(cfg);
        },
        py::arg("params"), py::arg("pfa") = PfaKind::exhaustive(), py::arg("horizon") = 1'000'000,
        py::arg("warmup") = -1, py::arg("seed") = 1, py::arg("steady_state") = true,
        py::arg("check_invariants") = false, py::arg("on_crossing") = py::none(),
        "One replication; warmup=-1 discards the first 10% of vehicles.");

    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("rho", &SweepPoint::rho)
        .def_readonly("pfa", &SweepPoint::pfa)
        .def_readonly("stats", &SweepPoint::stats)
        .def_readonly("approx", &SweepPoint::approx)
        .def_readonly("approx_all", &SweepPoint::approx_all);

    m.def(
        "sweep",
        [](const SimParams& params, const std::vector<double>& rho_grid, const std::vector<PfaKind>& pfas,
           std::int64_t horizon, std::int64_t warmup, std::uint64_t seed, bool steady_state,
           std::optional<unsigned> threads) {
            const auto cfg = make_config(params, PfaKind::exhaustive(), horizon, warmup, seed, steady_state, false);
            py::gil_scoped_release release;
            return sweep(cfg, rho_grid, pfas, threads.value_or(sweep_threads()));
        },
        py::arg("params"), py::arg("rho_grid"), py::arg("pfas"), py::arg("horizon") = 1'000'000,
        py::arg("warmup") = -1, py::arg("seed") = 1, py::arg("steady_state") = true, py::arg("threads") = py::none());
    m.def("scale_rates", &scale_rates, py::arg("params"), py::arg("rho"));

    py::class_<PollingInput>(m, "PollingInput")
        .def(py::init([](std::vector<double> lambda, std::vector<double> b_mean, std::vector<double> b_second,
                         std::vector<double> s_mean, std::vector<double> s_second) {
                 return PollingInput{std::move(lambda), std::move(b_mean), std::move(b_second), std::move(s_mean),
                                     std::move(s_second)};
             }),
             py::arg("lambda_"), py::arg("b_mean"), py::arg("b_second"), py::arg("s_mean"), py::arg("s_second"))
        .def_static("deterministic", &PollingInput::deterministic, py::arg("lambda_"), py::arg("b"), py::arg("s"))
        .def_readwrite("lambda_", &PollingInput::lambda)
        .def_readwrite("b_mean", &PollingInput::b_mean)
        .def_readwrite("b_second", &PollingInput::b_second)
        .def_readwrite("s_mean", &PollingInput::s_mean)
        .def_readwrite("s_second", &PollingInput::s_second)
        .def("rho", &PollingInput::rho)
        .def("scaled_to", &PollingInput::scaled_to, py::arg("rho"));

    py::class_<ApproxCoefficients>(m, "ApproxCoefficients")
        .def_readonly("k0", &ApproxCoefficients::k0)
        .def_readonly("k1", &ApproxCoefficients::k1)
        .def_readonly("k2", &ApproxCoefficients::k2)
        .def_readonly("omega", &ApproxCoefficients::omega);

    m.def("polling_input", &polling_input, py::arg("params"));
    m.def("light_traffic_delay", &light_traffic_delay, py::arg("inp"), py::arg("lane"));
    m.def("ht_omega", &ht_omega, py::arg("inp"), py::arg("discipline"), py::arg("lane"));
    m.def("coefficients", &coefficients, py::arg("inp"), py::arg("discipline"), py::arg("lane"));
    m.def("approx_mean_delay", &approx_mean_delay, py::arg("inp"), py::arg("discipline"), py::arg("lane"));
    m.def("approx_mean_delay_all", &approx_mean_delay_all, py::arg("inp"), py::arg("discipline"));
    m.def("mean_queue_length", &mean_queue_length, py::arg("inp"), py::arg("discipline"), py::arg("lane"));

    py::enum_<SpaKind>(m, "SpaKind")
        .value("MIN_DISTANCE", SpaKind::MinDistance)
        .value("MIN_ACCEL", SpaKind::MinAccel);

    py::class_<Segment>(m, "Segment")
        .def_readonly("start", &Segment::start)
        .def_readonly("duration", &Segment::duration)
        .def_readonly("accel", &Segment::accel)
        .def_readonly("x_start", &Segment::x_start)
        .def_readonly("v_start", &Segment::v_start);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("kind", &Trajectory::kind)
        .def_readonly("t0", &Trajectory::t0)
        .def_readonly("t_f", &Trajectory::t_f)
        .def_readonly("x0", &Trajectory::x0)
        .def_readonly("v0", &Trajectory::v0)
        .def_readonly("t_full", &Trajectory::t_full)
        .def_readonly("segments", &Trajectory::segments)
        .def_readonly("t_dec", &Trajectory::t_dec)
        .def_readonly("t_stop", &Trajectory::t_stop)
        .def_readonly("t_acc", &Trajectory::t_acc)
        .def_readonly("full_stop", &Trajectory::full_stop)
        .def_readonly("t_tilde", &Trajectory::t_tilde)
        .def_readonly("v1", &Trajectory::v1)
        .def_readonly("t1", &Trajectory::t1)
        .def_readonly("t2", &Trajectory::t2)
        .def_readonly("v_cruise", &Trajectory::v_cruise)
        .def("eval",
             [](const Trajectory& t, double at) {
                 const auto s = eval(t, at);
                 return py::make_tuple(s.x, s.v, s.a);
             },
             py::arg("t"), "(x, v, a) at absolute time t")
        .def("area", [](const Trajectory& t) { return area(t); })
        .def("accel_cost", [](const Trajectory& t) { return accel_cost(t); });

    m.def(
        "plan_min_distance",
        [](double x0, double t_f, const SimParams& params, const Trajectory* pred, double t0, int lane) {
            return plan_min_distance(x0, t_f, pred, params, t0, lane);
        },
        py::arg("x0"), py::arg("t_f"), py::arg("params"), py::arg("pred") = nullptr, py::arg("t0") = 0.0,
        py::arg("lane") = 1);
    m.def(
        "plan_min_accel",
        [](double x0, double v0, double t_f, const SimParams& params, const Trajectory* pred, double t0, int lane) {
            return plan_min_accel(x0, v0, t_f, pred, params, t0, lane);
        },
        py::arg("x0"), py::arg("v0"), py::arg("t_f"), py::arg("params"), py::arg("pred") = nullptr,
        py::arg("t0") = 0.0, py::arg("lane") = 1);
    m.def("min_separation", &min_separation, py::arg("follower"), py::arg("leader"));
    m.def("check_overcrowding", &check_overcrowding, py::arg("x0"), py::arg("t_f"), py::arg("t_full"),
          py::arg("params"));

    py::class_<PlannedVehicle>(m, "PlannedVehicle")
        .def_readonly("vehicle", &PlannedVehicle::vehicle)
        .def_readonly("spa_entry", &PlannedVehicle::spa_entry)
        .def_readonly("trajectory", &PlannedVehicle::trajectory)
        .def_property_readonly("error",
                               [](const PlannedVehicle& p) -> py::object {
                                   if (!p.error) {
                                       return py::none();
                                   }
                                   return py::str(to_string(*p.error));
                               })
        .def_readonly("message", &PlannedVehicle::message);

    m.def("plan_schedule", &plan_schedule, py::arg("crossed"), py::arg("spa_entry"), py::arg("kind"),
          py::arg("params"));
    m.def(
        "segments_csv",
        [](const std::vector<PlannedVehicle>& plans) {
            std::ostringstream out;
            write_segments_csv(out, plans);
            return out.str();
        },
        py::arg("plans"));
    m.def(
        "samples_csv",
        [](const std::vector<PlannedVehicle>& plans, double dt) {
            std::ostringstream out;
            write_samples_csv(out, plans, dt);
            return out.str();
        },
        py::arg("plans"), py::arg("dt") = 0.1);

    py::class_<ScriptedArrival>(m, "ScriptedArrival")
        .def(py::init([](int lane, double t) { return ScriptedArrival{lane, t}; }), py::arg("lane"), py::arg("t"))
        .def_readonly("lane", &ScriptedArrival::lane)
        .def_readonly("t", &ScriptedArrival::t);
    m.def("free_flow_offset", &free_flow_offset, py::arg("params"));
    m.def("schedule_scripted", &schedule_scripted, py::arg("params"), py::arg("pfa"), py::arg("arrivals"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_readonly("params", &ExperimentConfig::params)
        .def_readonly("pfa", &ExperimentConfig::pfa)
        .def_readonly("horizon", &ExperimentConfig::horizon)
        .def_readonly("warmup", &ExperimentConfig::warmup)
        .def_readonly("seed", &ExperimentConfig::seed)
        .def_readonly("arrivals", &ExperimentConfig::arrivals);
    m.def("parse_config", &parse_config, py::arg("json_text"));
    m.def("load_config", &load_config, py::arg("path"));
}
