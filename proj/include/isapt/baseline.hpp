#pragma once

/**
 * \file baseline.hpp
 * \brief Heuristic comparator: a mix of the energy beamformer and the beamsteering vector.
 *
 * The beam is w(rho) = normalize(rho u/||u|| + (1 - rho) w_EB), with w_EB phase-rotated so
 * that u^H w_EB is real and non-negative. The full transmit power is used, and rho is the
 * smallest value meeting the range-accuracy target.
 */

#include <string>
#include <vector>

#include "isapt/sca_optimizer.hpp"

namespace isapt {

/// Dominant unit eigenvector of sum_m beta_m h_m h_m^H, largest entry made real positive.
/// \throws std::invalid_argument for an empty set or an all-zero channel matrix.
CVector energy_beamformer(const std::vector<CVector>& channels, const std::vector<double>& weights);

enum class BaselineStatus { optimal, infeasible };

const char* to_string(BaselineStatus status);

struct BaselineSolution {
    double tau = 0.0;
    double amplitude = 0.0;
    CVector beam;
    double mixing_rho = 0.0;
    double objective = 0.0;  ///< average weighted harvested power [W]
    BaselineStatus status = BaselineStatus::infeasible;
    std::string message;
};

/// Mixed beam for a given rho, before any amplitude choice.
CVector baseline_beam(double rho, const CVector& u, const CVector& w_eb);

BaselineSolution solve_baseline_fixed_tau(double tau, const IsaptInstance& instance);

struct BaselineDesign {
    BaselineSolution best;
    std::vector<BaselineSolution> curve;
};

/// \throws InfeasibleError if no grid point admits a feasible mix.
BaselineDesign grid_search_baseline(const IsaptInstance& instance);
BaselineDesign grid_search_baseline(const IsaptInstance& instance, const std::vector<double>& taus);

}  // namespace isapt
