#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "platoon/sim.hpp"
#include "polling_server.hpp"

using namespace platoon;

namespace {

SimConfig symmetric(double rho, PfaKind kind, std::int64_t horizon)
{
    SimConfig cfg;
    cfg.params.arrival_rate = {rho / 2.0, rho / 2.0};
    cfg.pfa = kind;
    cfg.horizon = horizon;
    cfg.seed = 11;
    return cfg;
}

SimConfig single_lane(double rho, std::int64_t horizon)
{
    SimConfig cfg;
    cfg.params.lanes = 1;
    cfg.params.headway = {1.0};
    cfg.params.setup = {2.0};
    cfg.params.arrival_rate = {rho};
    cfg.horizon = horizon;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST_CASE("identical seeds give identical statistics")
{
    for (auto kind : {PfaKind::exhaustive(), PfaKind::gated(), PfaKind::batch(5)}) {
        const auto cfg = symmetric(0.6, kind, 50'000);
        CHECK(run(cfg) == run(cfg));
        auto other = cfg;
        other.seed = 12;
        CHECK_FALSE(run(other).all.mean == run(cfg).all.mean);
    }
}

TEST_CASE("vehicles are conserved")
{
    std::int64_t calls = 0;
    auto cfg = symmetric(0.8, PfaKind::gated(), 40'000);
    cfg.on_crossing = [&](const Vehicle&) { ++calls; };
    const auto s = run(cfg);
    CHECK(s.arrivals == cfg.horizon);
    CHECK(s.arrivals == s.crossed + s.in_system);
    CHECK(calls == s.crossed);
    CHECK(s.max_queue >= static_cast<std::size_t>(s.in_system));
}

TEST_CASE("lane counts cover the crossed vehicles after warm-up")
{
    auto cfg = symmetric(0.5, PfaKind::exhaustive(), 20'000);
    cfg.warmup = 1'000;
    std::int64_t measured = 0;
    cfg.on_crossing = [&](const Vehicle& v) { measured += v.id >= 1'000 ? 1 : 0; };
    const auto s = run(cfg);
    CHECK(s.lanes[0].count + s.lanes[1].count == measured);
    CHECK(s.all.count == measured);
    CHECK(SimConfig{}.warmup_vehicles() == 100'000);
}

TEST_CASE("a single lane is a FIFO M/D/1 queue")
{
    const double rho = 0.5;
    const auto s = run(single_lane(rho, 400'000));
    CHECK(s.lanes[0].fairness() == 1.0);
    CHECK(s.all.ahead == s.all.seen);
    // Pollaczek-Khinchine waiting time for deterministic unit service
    const double wq = rho / (2.0 * (1.0 - rho));
    CHECK(std::abs(s.all.mean - wq) < 4.0 * s.all.ci95);
    CHECK(s.all.ci95 < 0.02);
}

TEST_CASE("delays are never negative and fairness lies in [0, 1]")
{
    for (auto kind : {PfaKind::exhaustive(), PfaKind::gated(), PfaKind::batch(3)}) {
        auto cfg = symmetric(0.7, kind, 30'000);
        double min_delay = 0.0;
        cfg.on_crossing = [&](const Vehicle& v) { min_delay = std::min(min_delay, v.delay()); };
        const auto s = run(cfg);
        CHECK(min_delay >= -1e-9);
        for (const auto& lane : s.lanes) {
            CHECK(lane.fairness() >= 0.0);
            CHECK(lane.fairness() <= 1.0);
            CHECK(lane.ci95 > 0.0);
        }
    }
}

TEST_CASE("invariant checking passes on every discipline")
{
    for (auto kind : {PfaKind::exhaustive(), PfaKind::gated(), PfaKind::batch(2), PfaKind::batch(20)}) {
        for (double rho : {0.3, 0.9}) {
            if (kind.cap == 2 && rho > 0.5) {
                continue;  // a cap of 2 cannot carry this load
            }
            auto cfg = symmetric(rho, kind, 5'000);
            cfg.check_invariants = true;
            CHECK_NOTHROW(run(cfg));
        }
    }
    auto cfg = symmetric(0.9, PfaKind::exhaustive(), 5'000);
    cfg.params.lanes = 3;
    cfg.params.headway = {1.0, 0.8, 1.2};
    cfg.params.setup = {2.0, 1.5, 3.0};
    cfg.params.arrival_rate = {0.3, 0.2, 0.25};
    cfg.check_invariants = true;
    for (auto kind : {PfaKind::exhaustive(), PfaKind::gated(), PfaKind::batch(20)}) {
        cfg.pfa = kind;
        CHECK_NOTHROW(run(cfg));
    }
}

TEST_CASE("unstable load")
{
    auto cfg = symmetric(1.0, PfaKind::exhaustive(), 1'000);
    try {
        run(cfg);
        FAIL("expected UnstableLoad");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnstableLoad);
    }
    cfg.steady_state = false;
    const auto s = run(cfg);
    CHECK(s.arrivals == 1'000);
}

TEST_CASE("bad horizon and warm-up")
{
    auto cfg = symmetric(0.5, PfaKind::exhaustive(), 0);
    CHECK_THROWS_AS(run(cfg), Error);
    cfg.horizon = 100;
    cfg.warmup = 100;
    CHECK_THROWS_AS(run(cfg), Error);
}

TEST_CASE("arrival streams are shared across disciplines")
{
    std::map<std::int64_t, std::pair<int, double>> first;
    std::map<std::int64_t, std::pair<int, double>> second;
    auto cfg = symmetric(0.6, PfaKind::exhaustive(), 5'000);
    cfg.on_crossing = [&](const Vehicle& v) { first[v.id] = {v.lane, v.earliest}; };
    run(cfg);
    cfg.pfa = PfaKind::gated();
    cfg.on_crossing = [&](const Vehicle& v) { second[v.id] = {v.lane, v.earliest}; };
    run(cfg);
    std::size_t compared = 0;
    for (const auto& [id, arrival] : second) {
        if (auto it = first.find(id); it != first.end()) {
            CHECK(it->second == arrival);
            ++compared;
        }
    }
    CHECK(compared > 4'900);
}

TEST_CASE("exhaustive beats gated at moderate load")
{
    const auto exh = run(symmetric(0.5, PfaKind::exhaustive(), 200'000));
    const auto gat = run(symmetric(0.5, PfaKind::gated(), 200'000));
    CHECK(exh.all.mean < gat.all.mean);
    CHECK(exh.all.fairness() <= gat.all.fairness());
    // symmetric lanes see the same delay up to noise
    CHECK(std::abs(exh.lanes[0].mean - exh.lanes[1].mean) < 2.0 * (exh.lanes[0].ci95 + exh.lanes[1].ci95));
}

TEST_CASE("batch with a cap of one never forms platoons across a waiting lane")
{
    const auto batch = run(symmetric(0.2, PfaKind::batch(1), 100'000));
    const auto gated = run(symmetric(0.2, PfaKind::gated(), 100'000));
    CHECK(batch.all.mean > gated.all.mean);
}

TEST_CASE("rates scale to the target load and keep their split")
{
    SimParams p;
    p.arrival_rate = {0.3, 0.1};
    const auto r = scale_rates(p, 0.8);
    CHECK(r[0] == doctest::Approx(0.6));
    CHECK(r[1] == doctest::Approx(0.2));
}

TEST_CASE("sweep order and results do not depend on the thread count")
{
    auto base = symmetric(0.5, PfaKind::exhaustive(), 5'000);
    base.params.arrival_rate = {0.3, 0.1};
    const std::vector<double> grid{0.2, 0.5, 0.8};
    const std::vector<PfaKind> kinds{PfaKind::exhaustive(), PfaKind::gated(), PfaKind::batch(100)};
    const auto one = sweep(base, grid, kinds, 1);
    const auto three = sweep(base, grid, kinds, 3);
    REQUIRE(one.size() == 9);
    REQUIRE(three.size() == 9);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].rho == grid[i / 3]);
        CHECK(one[i].pfa == kinds[i % 3]);
        CHECK(one[i].stats == three[i].stats);
        const bool batch = one[i].pfa.discipline == PfaKind::Discipline::Batch;
        CHECK(one[i].approx_all.has_value() == !batch);
        REQUIRE(one[i].approx.size() == 2);
        CHECK(one[i].approx[0].has_value() == !batch);
    }
    CHECK(*one[3].approx[0] != *one[3].approx[1]);
    CHECK(one[7].stats.lanes[0].count > 2 * one[7].stats.lanes[1].count);
}

TEST_CASE("sweep rejects an unstable grid point before running")
{
    const auto base = symmetric(0.5, PfaKind::exhaustive(), 1'000);
    try {
        sweep(base, {0.5, 1.2}, {PfaKind::exhaustive()}, 2);
        FAIL("expected UnstableLoad");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnstableLoad);
    }
}

TEST_CASE("exhaustive PFA crossing times equal an exhaustive polling server with setups")
{
    for (double rho : {0.2, 0.6, 0.95}) {
        CAPTURE(rho);
        std::vector<Vehicle> crossed;
        auto cfg = symmetric(rho, PfaKind::exhaustive(), 100'000);
        cfg.on_crossing = [&](const Vehicle& v) { crossed.push_back(v); };
        run(cfg);
        std::sort(crossed.begin(), crossed.end(), [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
        std::vector<Arrival> arrivals;
        for (const auto& v : crossed) {
            arrivals.push_back({v.id, v.lane, v.earliest});
        }
        const auto starts = testing::exhaustive_polling_starts(arrivals, 1.0, 2.375);
        double worst = 0.0;
        for (std::size_t i = 0; i < crossed.size(); ++i) {
            worst = std::max(worst, std::abs(starts[i] - crossed[i].crossing));
        }
        CHECK(worst < 1e-6);
    }
}
