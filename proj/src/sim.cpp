#include "platoon/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "platoon/polling.hpp"

namespace platoon {

namespace {

/// Running delay statistics of one lane (or all lanes).
class Accumulator {
public:
    explicit Accumulator(int batches) : batch_sum_(batches, 0.0), batch_count_(batches, 0) {}

    void add(double delay, int batch)
    {
        ++n_;
        const double d = delay - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (delay - mean_);
        batch_sum_[batch] += delay;
        ++batch_count_[batch];
    }

    LaneStats finish(double ahead, double seen) const
    {
        LaneStats s;
        s.count = n_;
        s.mean = mean_;
        s.variance = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
        s.ahead = ahead;
        s.seen = seen;

        std::vector<double> means;
        for (std::size_t b = 0; b < batch_sum_.size(); ++b) {
            if (batch_count_[b] > 0) {
                means.push_back(batch_sum_[b] / static_cast<double>(batch_count_[b]));
            }
        }
        if (means.size() >= 2) {
            double m = 0.0;
            for (double x : means) {
                m += x;
            }
            m /= static_cast<double>(means.size());
            double ss = 0.0;
            for (double x : means) {
                ss += (x - m) * (x - m);
            }
            const double k = static_cast<double>(means.size());
            const boost::math::students_t dist(k - 1.0);
            s.ci95 = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(ss / (k - 1.0) / k);
        }
        return s;
    }

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    std::vector<double> batch_sum_;
    std::vector<std::int64_t> batch_count_;
};

void check_after_insertion(const Schedule& before, const PfaEngine& engine, std::int64_t id)
{
    if (!assert_regular(before, engine.schedule(), id)) {
        throw Error(ErrorCode::InvariantViolation, fmt::format("vehicle {} reordered the schedule", id));
    }
    const auto& ord = engine.schedule().ordering();
    for (std::size_t i = 0; i < ord.size(); ++i) {
        if (ord[i].crossing < ord[i].earliest - 1e-9) {
            throw Error(ErrorCode::InvariantViolation, fmt::format("vehicle {} before its earliest time", ord[i].id));
        }
        if (i > 0 && ord[i].crossing - ord[i - 1].crossing <
                         engine.gaps().between(ord[i - 1].lane, ord[i].lane) - 1e-9) {
            throw Error(ErrorCode::InvariantViolation,
                        fmt::format("vehicles {} and {} too close", ord[i - 1].id, ord[i].id));
        }
    }
    if (engine.kind().discipline != PfaKind::Discipline::Exhaustive) {
        engine.gates().check_consistent(engine.schedule());
    }
}

}  // namespace

std::vector<double> scale_rates(const SimParams& params, double rho)
{
    const double now = params.load();
    std::vector<double> out = params.arrival_rate;
    for (auto& r : out) {
        r *= rho / now;
    }
    return out;
}

SimStats run(const SimConfig& config)
{
    const auto validated = validate_config(config.params, config.steady_state);
    const SimParams& p = validated.params;
    if (config.horizon < 1 || config.batches < 1) {
        throw Error(ErrorCode::NonPositiveParameter, "horizon and batch count must be positive");
    }
    const std::int64_t warmup = config.warmup_vehicles();
    if (warmup >= config.horizon) {
        throw Error(ErrorCode::ConfigError,
                    fmt::format("warm-up ({}) must be shorter than the horizon ({})", warmup, config.horizon));
    }

    const auto n = static_cast<std::size_t>(p.lanes);
    std::vector<std::mt19937_64> streams;
    std::vector<std::exponential_distribution<double>> gaps;
    std::vector<double> next_arrival(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::seed_seq seq{config.seed, static_cast<std::uint64_t>(i + 1)};
        streams.emplace_back(seq);
        gaps.emplace_back(p.arrival_rate[i]);
        next_arrival[i] = gaps[i](streams[i]);
    }

    PfaEngine engine(config.pfa, Gaps(p));
    std::vector<Accumulator> lane_acc(n, Accumulator(config.batches));
    Accumulator all_acc(config.batches);
    std::vector<double> ahead(n, 0.0);
    std::vector<double> seen(n, 0.0);
    SimStats stats;
    const double measured = static_cast<double>(config.horizon - warmup);

    auto batch_of = [&](std::int64_t id) {
        const auto b = static_cast<int>(static_cast<double>(id - warmup) * config.batches / measured);
        return std::min(b, config.batches - 1);
    };
    auto cross = [&](double now) {
        const Vehicle v = engine.depart(now);
        ++stats.crossed;
        if (v.id >= warmup) {
            const int b = batch_of(v.id);
            lane_acc[static_cast<std::size_t>(v.lane - 1)].add(v.delay(), b);
            all_acc.add(v.delay(), b);
        }
        if (config.on_crossing) {
            config.on_crossing(v);
        }
    };

    double now = 0.0;
    for (std::int64_t id = 0; id < config.horizon; ++id) {
        const auto lane_idx =
            static_cast<std::size_t>(std::min_element(next_arrival.begin(), next_arrival.end()) - next_arrival.begin());
        now = next_arrival[lane_idx];
        next_arrival[lane_idx] = now + gaps[lane_idx](streams[lane_idx]);

        while (auto due = engine.next_departure()) {
            if (*due > now) {
                break;
            }
            cross(*due);
        }

        const Arrival arrival{id, static_cast<int>(lane_idx) + 1, now};
        const std::size_t present = engine.schedule().size();
        std::optional<Schedule> before;
        if (config.check_invariants) {
            before = engine.schedule();
        }
        const auto placed = engine.on_arrival(arrival, now);
        if (before) {
            check_after_insertion(*before, engine, id);
        }
        ++stats.arrivals;
        stats.max_queue = std::max(stats.max_queue, engine.schedule().size());
        if (id >= warmup) {
            ahead[lane_idx] += static_cast<double>(placed.position);
            seen[lane_idx] += static_cast<double>(present);
        }
    }

    stats.in_system = static_cast<std::int64_t>(engine.schedule().size());
    stats.end_time = now;
    double ahead_all = 0.0;
    double seen_all = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stats.lanes.push_back(lane_acc[i].finish(ahead[i], seen[i]));
        ahead_all += ahead[i];
        seen_all += seen[i];
    }
    stats.all = all_acc.finish(ahead_all, seen_all);
    return stats;
}

double free_flow_offset(const SimParams& params) { return (params.region_pfa + params.region_spa) / params.v_max; }

std::vector<Vehicle> schedule_scripted(const SimParams& params, const PfaKind& pfa,
                                       const std::vector<ScriptedArrival>& arrivals)
{
    const auto p = validate_config(params, false).params;
    std::vector<std::size_t> order(arrivals.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (arrivals[i].lane < 1 || arrivals[i].lane > p.lanes) {
            throw Error(ErrorCode::ConfigError, fmt::format("arrival {} on unknown lane {}", i + 1, arrivals[i].lane));
        }
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return arrivals[x].t < arrivals[y].t; });

    const double offset = free_flow_offset(p);
    PfaEngine engine(pfa, Gaps(p));
    std::vector<Vehicle> crossed;
    for (std::size_t i : order) {
        const double now = arrivals[i].t;
        while (auto due = engine.next_departure()) {
            if (*due > now) {
                break;
            }
            crossed.push_back(engine.depart(*due));
        }
        engine.on_arrival(Arrival{static_cast<std::int64_t>(i + 1), arrivals[i].lane, now + offset}, now);
    }
    const auto& rest = engine.schedule().ordering();
    crossed.insert(crossed.end(), rest.begin(), rest.end());
    return crossed;
}

unsigned sweep_threads()
{
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PLATOONSIM_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) {
            threads = static_cast<unsigned>(cap);
        }
    }
    return threads;
}

std::vector<SweepPoint> sweep(const SimConfig& base, const std::vector<double>& rho_grid,
                              const std::vector<PfaKind>& disciplines, unsigned threads)
{
    std::vector<SweepPoint> points;
    for (double rho : rho_grid) {
        for (const auto& kind : disciplines) {
            SweepPoint pt;
            pt.rho = rho;
            pt.pfa = kind;
            points.push_back(std::move(pt));
        }
    }
    // Validate every point up front so that errors surface before any work.
    std::vector<SimConfig> configs;
    for (const auto& pt : points) {
        SimConfig cfg = base;
        cfg.on_crossing = nullptr;
        cfg.pfa = pt.pfa;
        cfg.params.arrival_rate = scale_rates(base.params, pt.rho);
        validate_config(cfg.params, cfg.steady_state);
        configs.push_back(std::move(cfg));
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                points[i].stats = run(configs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < count; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        auto& pt = points[i];
        const auto inp = polling_input(configs[i].params);
        const bool analytic = pt.pfa.discipline != PfaKind::Discipline::Batch && inp.rho() < 1.0;
        for (int lane = 1; lane <= inp.lanes(); ++lane) {
            pt.approx.push_back(analytic ? std::optional(approx_mean_delay(inp, pt.pfa.discipline, lane))
                                         : std::nullopt);
        }
        if (analytic) {
            pt.approx_all = approx_mean_delay_all(inp, pt.pfa.discipline);
        }
    }
    return points;
}

}  // namespace platoon
