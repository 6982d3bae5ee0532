#include "platoon/polling.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace platoon {

namespace {

std::size_t idx(int lane)
{
    return static_cast<std::size_t>(lane - 1);
}

void require_discipline(PfaKind::Discipline d)
{
    if (d == PfaKind::Discipline::Batch) {
        throw Error(ErrorCode::UnsupportedDiscipline, "no heavy-traffic limit is known for the batch PFA");
    }
}

}  // namespace

double residual(double mean, double second)
{
    return second / (2.0 * mean);
}

PollingInput PollingInput::deterministic(std::vector<double> lambda, std::vector<double> b, std::vector<double> s)
{
    PollingInput inp;
    inp.lambda = std::move(lambda);
    inp.b_mean = std::move(b);
    inp.s_mean = std::move(s);
    for (double x : inp.b_mean) {
        inp.b_second.push_back(x * x);
    }
    for (double x : inp.s_mean) {
        inp.s_second.push_back(x * x);
    }
    return inp;
}

double PollingInput::rho_i(int lane) const
{
    return lambda.at(idx(lane)) * b_mean.at(idx(lane));
}

double PollingInput::rho() const
{
    double total = 0.0;
    for (int i = 1; i <= lanes(); ++i) {
        total += rho_i(i);
    }
    return total;
}

double PollingInput::rho_hat(int lane) const
{
    return rho_i(lane) / rho();
}

double PollingInput::lambda_hat(int lane) const
{
    return rho_hat(lane) / b_mean.at(idx(lane));
}

double PollingInput::sigma2() const
{
    double total = 0.0;
    for (int j = 1; j <= lanes(); ++j) {
        total += rho_hat(j) * b_second.at(idx(j)) / b_mean.at(idx(j));
    }
    return total;
}

double PollingInput::b_res(int lane) const
{
    return residual(b_mean.at(idx(lane)), b_second.at(idx(lane)));
}

double PollingInput::s_res(int lane) const
{
    return residual(s_mean.at(idx(lane)), s_second.at(idx(lane)));
}

PollingInput PollingInput::scaled_to(double target) const
{
    PollingInput out = *this;
    const double now = rho();
    for (auto& l : out.lambda) {
        l *= target / now;
    }
    return out;
}

void PollingInput::validate() const
{
    const auto n = lambda.size();
    if (n == 0 || b_mean.size() != n || b_second.size() != n || s_mean.size() != n || s_second.size() != n) {
        throw Error(ErrorCode::ConfigError, "polling input arrays must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lambda[i] >= 0.0) || !(b_mean[i] > 0.0) || !(s_mean[i] > 0.0)) {
            throw Error(ErrorCode::NonPositiveParameter, fmt::format("lane {}: moments must be positive", i + 1));
        }
        if (b_second[i] < b_mean[i] * b_mean[i] * (1.0 - 1e-12) ||
            s_second[i] < s_mean[i] * s_mean[i] * (1.0 - 1e-12)) {
            throw Error(ErrorCode::NonPositiveParameter,
                        fmt::format("lane {}: second moment below the squared mean", i + 1));
        }
    }
}

PollingInput polling_input(const SimParams& params)
{
    std::vector<double> setup = params.setup;
    if (params.clearance_model == ClearanceModel::StartToStart) {
        for (std::size_t i = 0; i < setup.size(); ++i) {
            setup[i] -= params.headway[i];
        }
    }
    return PollingInput::deterministic(params.arrival_rate, params.headway, setup);
}

double light_traffic_delay(const PollingInput& inp, int lane)
{
    double d = inp.rho_i(lane) * inp.b_res(lane);
    const double s = inp.s_mean.at(idx(lane));
    for (int j = 1; j <= inp.lanes(); ++j) {
        if (j != lane) {
            d += inp.rho_i(j) * (inp.b_res(j) + s);
            d += inp.lambda.at(idx(j)) * s * inp.s_res(lane);
        }
    }
    return d;
}

double ht_omega(const PollingInput& inp, PfaKind::Discipline discipline, int lane)
{
    require_discipline(discipline);
    const double sign = discipline == PfaKind::Discipline::Exhaustive ? -1.0 : 1.0;
    double spread = 0.0;
    double setups = 0.0;
    for (int j = 1; j <= inp.lanes(); ++j) {
        spread += inp.rho_hat(j) * (1.0 + sign * inp.rho_hat(j));
        setups += inp.s_mean.at(idx(j));
    }
    return (1.0 + sign * inp.rho_hat(lane)) / 2.0 * (inp.sigma2() / spread + setups);
}

ApproxCoefficients coefficients(const PollingInput& inp, PfaKind::Discipline discipline, int lane)
{
    ApproxCoefficients k;
    k.omega = ht_omega(inp, discipline, lane);
    k.k1 = inp.rho_hat(lane) * inp.b_res(lane);
    const double s = inp.s_mean.at(idx(lane));
    for (int j = 1; j <= inp.lanes(); ++j) {
        if (j != lane) {
            k.k1 += inp.rho_hat(j) * (inp.b_res(j) + s);
            k.k1 += inp.lambda_hat(j) * inp.s_res(lane) * s;
        }
    }
    k.k2 = k.omega - k.k1;
    return k;
}

double approx_mean_delay(const PollingInput& inp, PfaKind::Discipline discipline, int lane)
{
    require_discipline(discipline);
    const double rho = inp.rho();
    if (rho >= 1.0) {
        throw Error(ErrorCode::UnstableLoad, fmt::format("rho = {} >= 1", rho));
    }
    if (rho == 0.0) {
        return 0.0;
    }
    const auto k = coefficients(inp, discipline, lane);
    return (k.k1 * rho + k.k2 * rho * rho) / (1.0 - rho);
}

double approx_mean_delay_all(const PollingInput& inp, PfaKind::Discipline discipline)
{
    double rate = 0.0;
    double weighted = 0.0;
    for (int i = 1; i <= inp.lanes(); ++i) {
        rate += inp.lambda.at(idx(i));
        weighted += inp.lambda.at(idx(i)) * approx_mean_delay(inp, discipline, i);
    }
    return rate > 0.0 ? weighted / rate : 0.0;
}

double mean_queue_length(const PollingInput& inp, PfaKind::Discipline discipline, int lane)
{
    return inp.lambda.at(idx(lane)) * approx_mean_delay(inp, discipline, lane);
}

}  // namespace platoon
