#pragma once

#include <optional>
#include <vector>

#include "isapt/types.hpp"

namespace isapt {

/// Uniform linear array.
struct ArrayGeometry {
    int n_t = 10;
    double spacing = 0.0625;    ///< element spacing [m]
    double wavelength = 0.125;  ///< [m]

    void validate() const;
};

/// Pulse-radar geometry, timing and noise for ranging a single target.
struct SensingScenario {
    double r_min = 18.0;         ///< [m]
    double r_max = 20.0;         ///< [m]
    double alpha = -kPi / 3.0;   ///< target direction [rad]
    double sigma_rcs = 1.0;      ///< [m^2]
    double bandwidth = 10e6;     ///< [Hz]
    double noise_power = 1e-11;  ///< [W]
    double t_sen = 1e-3;         ///< sensing frame [s]
    double t_coh = 1e-3;         ///< channel coherence time [s]
    double r_hat_max = 0.02;     ///< tolerated range RMSE [m]

    void validate() const;
};

/// Constants of the radar equation and the delay-accuracy formula.
struct RadarConstants {
    double z1 = 0.0;  ///< echo gain, includes ||u||^2
    double z2 = 0.0;  ///< sigma_n^2 / (4 T_sen) [W/s]
    double z = 0.0;   ///< c sqrt(z2) / (2 B sqrt(z1))
};

/// u_n = exp(-j 2 pi (spacing / lambda) sin(alpha) n), n = 0..N_t-1.
CVector steering_vector(const ArrayGeometry& geometry, double alpha);

/// Longest pulse that still lets the echo from r_min be received: 2 r_min / c.
double tau_max(const SensingScenario& scenario);

/// Slot length T(tau) = 2 r_max / c + tau.
double slot_duration(double tau, const SensingScenario& scenario);

RadarConstants radar_constants(const SensingScenario& scenario, const ArrayGeometry& geometry,
                               const CVector& u);

/**
 * Range RMSE z sqrt(T^2 / (tau A^2 |u^H w|^2)) guaranteed at r_max.
 * Returns +infinity when the beam has no gain toward the target.
 */
double range_rmse(double tau, double amplitude, const CVector& beam, const RadarConstants& constants,
                  const SensingScenario& scenario, const CVector& u);

/// Closed-form lower end of the feasible pulse-duration interval.
struct TauBounds {
    bool feasible = false;
    double tau_min = 0.0;
    double tau_max = 0.0;
    double z3 = 0.0;
    double z4 = 0.0;
    double discriminant = 0.0;  ///< z3^2 - 2 z3 z4
};

/**
 * Shortest pulse for which full peak power steered at the target meets the accuracy target:
 *   tau_min = (z3 - z4 - sqrt(z3^2 - 2 z3 z4)) / 2,
 *   z3 = p_p ||u||^2 r_hat_max^2 / z^2, z4 = 4 r_max / c.
 * Infeasible when the discriminant is negative or tau_min exceeds tau_max.
 */
TauBounds tau_bounds(const SensingScenario& scenario, const CVector& u, const RadarConstants& constants,
                     double p_p);

/// Same as tau_bounds().tau_min, or nullopt when no pulse duration is feasible.
std::optional<double> tau_min(const SensingScenario& scenario, const CVector& u,
                              const RadarConstants& constants, double p_p);

/**
 * n_tau equally spaced pulse durations on [tau_min, tau_max] with both endpoints included.
 * n_tau = 1 yields {tau_min}.
 * \throws std::domain_error if the interval is empty.
 */
std::vector<double> feasible_tau_grid(const SensingScenario& scenario, const CVector& u,
                                      const RadarConstants& constants, double p_p, int n_tau);

}  // namespace isapt
