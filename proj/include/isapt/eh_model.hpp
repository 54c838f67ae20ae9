#pragma once

#include <span>
#include <vector>

#include "isapt/types.hpp"

namespace isapt {

/// Rectenna circuit constants of the diode-based harvesting model.
struct EhCircuit {
    double a = 1.29;        ///< dimensionless
    double c = 1.55e3;      ///< [1/sqrt(W)]
    double i_s = 5e-6;      ///< reverse saturation current [A]
    double r_l = 10e3;      ///< load resistance [Ohm]
    double p_max = 25e-6;   ///< breakdown input-power limit [W]

    void validate() const;
};

/// One circuit and one weight per receiver; weights sum to one.
struct EhReceiverSet {
    std::vector<EhCircuit> circuits;
    std::vector<double> weights;

    static EhReceiverSet uniform(std::size_t count, const EhCircuit& circuit = {});

    std::size_t size() const { return weights.size(); }
    void validate() const;
};

/// A^2 |h^H w|^2 for a unit-norm beam w.
double received_power(double amplitude, const CVector& beam, const CVector& channel);

/**
 * Harvested DC power for RF input power p_in in [0, p_max]:
 *   [W0(a e^a I0(C sqrt(2 p_in))) / a - 1]^2 I_s^2 R_L.
 * Evaluated in the log domain; exactly zero at p_in = 0.
 */
double harvested_power(double p_in, const EhCircuit& circuit);

/// Analytic derivative of harvested_power with respect to p_in, for p_in > 0.
double harvested_power_derivative(double p_in, const EhCircuit& circuit);

/// min{phi(p), phi(p_max)}; only for plotting, the optimizers never leave [0, p_max].
double harvested_power_clipped(double p_in, const EhCircuit& circuit);

/// (tau / slot) * sum_m beta_m phi(p_m).
double weighted_avg_harvested(double tau, double slot, const EhReceiverSet& receivers,
                              std::span<const double> p_in);

}  // namespace isapt
