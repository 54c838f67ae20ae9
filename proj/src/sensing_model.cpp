#include "isapt/sensing_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isapt {

void ArrayGeometry::validate() const
{
    if (n_t < 1 || !(spacing > 0.0) || !(wavelength > 0.0)) {
        throw std::invalid_argument("ArrayGeometry: need n_t >= 1, spacing > 0, wavelength > 0");
    }
}

void SensingScenario::validate() const
{
    if (!(r_min > 0.0 && r_min <= r_max)) {
        throw std::invalid_argument("SensingScenario: need 0 < r_min <= r_max");
    }
    if (!(sigma_rcs > 0.0 && bandwidth > 0.0 && noise_power > 0.0 && t_sen > 0.0 && t_coh > 0.0 &&
          r_hat_max > 0.0)) {
        throw std::invalid_argument("SensingScenario: parameters must be positive");
    }
    if (t_sen > t_coh) {
        throw std::invalid_argument("SensingScenario: sensing frame must not exceed coherence time");
    }
    if (!std::isfinite(alpha)) {
        throw std::invalid_argument("SensingScenario: alpha must be finite");
    }
}

CVector steering_vector(const ArrayGeometry& geometry, double alpha)
{
    geometry.validate();
    const double phase_step = 2.0 * kPi * geometry.spacing / geometry.wavelength * std::sin(alpha);
    CVector u(geometry.n_t);
    for (int n = 0; n < geometry.n_t; ++n) {
        u[n] = std::polar(1.0, -phase_step * n);
    }
    return u;
}

double tau_max(const SensingScenario& scenario) { return 2.0 * scenario.r_min / kSpeedOfLight; }

double slot_duration(double tau, const SensingScenario& scenario)
{
    return 2.0 * scenario.r_max / kSpeedOfLight + tau;
}

RadarConstants radar_constants(const SensingScenario& scenario, const ArrayGeometry& geometry,
                               const CVector& u)
{
    const double four_pi = 4.0 * kPi;
    const double r2 = scenario.r_max * scenario.r_max;
    RadarConstants k;
    k.z1 = geometry.wavelength * geometry.wavelength * scenario.sigma_rcs * u.squaredNorm() /
           (four_pi * four_pi * four_pi * r2 * r2);
    k.z2 = scenario.noise_power / (4.0 * scenario.t_sen);
    k.z = kSpeedOfLight * std::sqrt(k.z2) / (2.0 * scenario.bandwidth * std::sqrt(k.z1));
    return k;
}

double range_rmse(double tau, double amplitude, const CVector& beam, const RadarConstants& constants,
                  const SensingScenario& scenario, const CVector& u)
{
    if (!(tau > 0.0)) {
        throw std::invalid_argument("range_rmse: tau must be positive");
    }
    const double gain = amplitude * amplitude * std::norm(u.dot(beam));
    if (!(gain > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    const double slot = slot_duration(tau, scenario);
    return constants.z * slot / std::sqrt(tau * gain);
}

TauBounds tau_bounds(const SensingScenario& scenario, const CVector& u, const RadarConstants& constants,
                     double p_p)
{
    if (!(p_p > 0.0)) {
        throw std::invalid_argument("tau_bounds: peak power must be positive");
    }
    TauBounds b;
    b.tau_max = tau_max(scenario);
    b.z3 = p_p * u.squaredNorm() * scenario.r_hat_max * scenario.r_hat_max / (constants.z * constants.z);
    b.z4 = 4.0 * scenario.r_max / kSpeedOfLight;
    b.discriminant = b.z3 * b.z3 - 2.0 * b.z3 * b.z4;
    if (b.discriminant < 0.0) {
        return b;
    }
    // The smaller root of tau^2 + (z4 - z3) tau + z4^2/4 = 0. Written via the product of the
    // roots to avoid cancellation when z3 >> z4.
    const double larger = 0.5 * (b.z3 - b.z4 + std::sqrt(b.discriminant));
    b.tau_min = 0.25 * b.z4 * b.z4 / larger;
    b.feasible = b.tau_min <= b.tau_max;
    return b;
}

std::optional<double> tau_min(const SensingScenario& scenario, const CVector& u,
                              const RadarConstants& constants, double p_p)
{
    const TauBounds b = tau_bounds(scenario, u, constants, p_p);
    if (!b.feasible) {
        return std::nullopt;
    }
    return b.tau_min;
}

std::vector<double> feasible_tau_grid(const SensingScenario& scenario, const CVector& u,
                                      const RadarConstants& constants, double p_p, int n_tau)
{
    if (n_tau < 1) {
        throw std::invalid_argument("feasible_tau_grid: n_tau must be at least 1");
    }
    const TauBounds b = tau_bounds(scenario, u, constants, p_p);
    if (!b.feasible) {
        throw std::domain_error("feasible_tau_grid: no feasible pulse duration");
    }
    std::vector<double> grid(static_cast<std::size_t>(n_tau));
    if (n_tau == 1) {
        grid[0] = b.tau_min;
        return grid;
    }
    const double step = (b.tau_max - b.tau_min) / (n_tau - 1);
    for (int k = 0; k < n_tau; ++k) {
        grid[static_cast<std::size_t>(k)] = b.tau_min + step * k;
    }
    grid.back() = b.tau_max;
    return grid;
}

}  // namespace isapt
