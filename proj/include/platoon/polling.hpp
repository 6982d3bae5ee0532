#ifndef PLATOON_POLLING_HPP
#define PLATOON_POLLING_HPP

#include <vector>

#include "platoon/core.hpp"
#include "platoon/pfa.hpp"

namespace platoon {

/// Arrival rates and service/setup moments of the polling model.
struct PollingInput {
    std::vector<double> lambda;
    std::vector<double> b_mean;
    std::vector<double> b_second;
    std::vector<double> s_mean;
    std::vector<double> s_second;

    /// Deterministic B and S.
    static PollingInput deterministic(std::vector<double> lambda, std::vector<double> b, std::vector<double> s);

    int lanes() const { return static_cast<int>(lambda.size()); }
    double rho_i(int lane) const;
    double rho() const;
    double rho_hat(int lane) const;
    double lambda_hat(int lane) const;
    /// sum_j rho_hat_j E[B_j^2] / E[B_j]; E[B^2]/E[B] for identical lanes
    double sigma2() const;
    double b_res(int lane) const;
    double s_res(int lane) const;

    /// Same split of the load, total load `rho`.
    PollingInput scaled_to(double rho) const;

    void validate() const;
};

/// E[X^2] / (2 E[X])
double residual(double mean, double second);

/// Converts simulation parameters. Under the start-to-start clearance model
/// the setup is the part of S that exceeds B.
PollingInput polling_input(const SimParams& params);

struct ApproxCoefficients {
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double omega = 0.0;
};

/// First-order light-traffic mean delay of lane i.
double light_traffic_delay(const PollingInput& inp, int lane);

/// Heavy-traffic constant: (1 - rho) E[D_i] -> omega_i.
double ht_omega(const PollingInput& inp, PfaKind::Discipline discipline, int lane);

ApproxCoefficients coefficients(const PollingInput& inp, PfaKind::Discipline discipline, int lane);

/// (K1 rho + K2 rho^2) / (1 - rho)
double approx_mean_delay(const PollingInput& inp, PfaKind::Discipline discipline, int lane);

/// Mean over all vehicles: lane delays weighted by arrival rate.
double approx_mean_delay_all(const PollingInput& inp, PfaKind::Discipline discipline);

/// Little's law: lambda_i times the approximate delay.
double mean_queue_length(const PollingInput& inp, PfaKind::Discipline discipline, int lane);

}  // namespace platoon

#endif  // PLATOON_POLLING_HPP
