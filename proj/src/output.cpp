#include "platoon/output.hpp"

#include <fstream>
#include <ostream>
#include <system_error>

#include <fmt/format.h>

namespace platoon {

namespace {

std::string optional_number(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

void row(std::ostream& out, double rho, const PfaKind& pfa, const std::string& lane, const LaneStats& s,
         const std::optional<double>& approx, std::uint64_t seed)
{
    out << fmt::format("{},{},{},{},{},{},{},{},{}\n", format_number(rho), pfa.name(), lane, format_number(s.mean),
                       format_number(s.ci95), optional_number(approx), format_number(s.fairness()), s.count, seed);
}

}  // namespace

std::string format_number(double x) { return fmt::format("{}", x); }

void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fill)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for writing", tmp.string()));
        }
        try {
            fill(out);
        } catch (...) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw;
        }
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw Error(ErrorCode::IoError, fmt::format("cannot rename '{}' to '{}': {}", tmp.string(), path.string(),
                                                    ec.message()));
    }
}

void write_results_rows(std::ostream& out, double rho, const PfaKind& pfa, const SimStats& stats,
                        const std::vector<std::optional<double>>& approx, const std::optional<double>& approx_all,
                        std::uint64_t seed)
{
    for (std::size_t i = 0; i < stats.lanes.size(); ++i) {
        row(out, rho, pfa, std::to_string(i + 1), stats.lanes[i], i < approx.size() ? approx[i] : std::nullopt,
            seed);
    }
    row(out, rho, pfa, "all", stats.all, approx_all, seed);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, std::uint64_t seed)
{
    out << kResultsHeader << '\n';
    for (const auto& pt : points) {
        row(out, pt.rho, pt.pfa, "all", pt.stats.all, pt.approx_all, seed);
    }
}

void write_sweep_lanes_csv(std::ostream& out, const std::vector<SweepPoint>& points, std::uint64_t seed)
{
    out << kResultsHeader << '\n';
    for (const auto& pt : points) {
        write_results_rows(out, pt.rho, pt.pfa, pt.stats, pt.approx, pt.approx_all, seed);
    }
}

void write_approx_csv(std::ostream& out, const PollingInput& base, const std::vector<double>& rho_grid,
                      const std::vector<PfaKind>& disciplines)
{
    out << "rho,lane,discipline,K1,K2,omega,approx_delay\n";
    for (double rho : rho_grid) {
        const auto inp = base.scaled_to(rho);
        for (const auto& kind : disciplines) {
            for (int lane = 1; lane <= inp.lanes(); ++lane) {
                if (kind.discipline == PfaKind::Discipline::Batch) {
                    out << fmt::format("{},{},{},,,,\n", format_number(rho), lane, kind.name());
                    continue;
                }
                const auto c = coefficients(inp, kind.discipline, lane);
                out << fmt::format("{},{},{},{},{},{},{}\n", format_number(rho), lane, kind.name(),
                                   format_number(c.k1), format_number(c.k2), format_number(c.omega),
                                   format_number(approx_mean_delay(inp, kind.discipline, lane)));
            }
        }
    }
}

void write_vehicle_log_line(std::ostream& out, const Vehicle& vehicle, double offset)
{
    out << fmt::format(R"({{"id":{},"lane":{},"entry_t":{},"a":{},"c":{},"delay":{}}})", vehicle.id, vehicle.lane,
                       format_number(vehicle.earliest), format_number(vehicle.earliest + offset),
                       format_number(vehicle.crossing + offset), format_number(vehicle.delay()))
        << '\n';
}

}  // namespace platoon
