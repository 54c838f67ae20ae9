#pragma once

/**
 * \file sca_optimizer.hpp
 * \brief Joint pulse-duration, amplitude and beamformer design.
 *
 * For each pulse duration on an equally spaced grid over the feasible interval, the lifted
 * problem over V = A^2 w w^H is solved by successive convex approximation: the harvested
 * power is linearized at the current iterate and the resulting linear SDP
 *
 *   maximize   sum_m c_m Tr{H_m V}
 *   subject to Tr{U V} >= eps1(tau), Tr{V} <= eps2(tau), Tr{H_m V} <= P_max, V >= 0
 *
 * is solved exactly. The SDP solution is rank one, so (A, w) follow from its dominant
 * eigenpair. The best grid point is returned.
 */

#include <optional>
#include <string>
#include <vector>

#include "isapt/channel_model.hpp"
#include "isapt/eh_model.hpp"
#include "isapt/sdp.hpp"
#include "isapt/sensing_model.hpp"
#include "isapt/types.hpp"

namespace isapt {

struct PowerBudget {
    double p_avg = 0.5;  ///< average transmit power [W]
    double p_p = 0.5;    ///< peak transmit power [W]
};

struct ScaSettings {
    /// Absolute stopping threshold on the change of the objective [W] (1e-7 uW).
    double epsilon_abs = 1e-13;
    /// Relative stopping threshold on the change of the objective.
    double epsilon_rel = 1e-6;
    int max_iterations = 100;
    /// SDP solutions with lambda2/lambda1 above this are flagged.
    double rank_tolerance = 1e-6;
    /// Linearization points with zero received power are moved to this floor [W].
    double power_floor = 1e-15;
    /// Solve the inner SDP on span{u, h_1..h_M} instead of the full array space.
    bool compress_subspace = true;
    sdp::SdpOptions sdp;
};

struct IsaptInstance {
    ArrayGeometry geometry;
    SensingScenario scenario;
    EhReceiverSet receivers;
    ChannelSet channels;
    CVector u;
    PowerBudget budget;
    int n_tau = 50;
    ScaSettings sca;

    void validate() const;
    RadarConstants constants() const;
};

struct EpsilonBounds {
    double eps1 = 0.0;  ///< required echo gain Tr{U V} [W]
    double eps2 = 0.0;  ///< transmit power cap Tr{V} [W]
};

/// eps1 = z^2 T^2 / (tau r_hat_max^2), eps2 = min{T / tau * P_avg, P_p}.
EpsilonBounds epsilon_bounds(double tau, const IsaptInstance& instance);

enum class InitPolicy { as_is, scaled_for_peak_input };

struct InitialMatrix {
    CMatrix v;
    double scale = 1.0;
    InitPolicy policy = InitPolicy::as_is;
};

/// (P_p / ||u||^2) u u^H, scaled down uniformly if it drives any receiver above P_max.
InitialMatrix initial_matrix(const IsaptInstance& instance);

/// (tau / T) sum_m beta_m phi(Tr{H_m V}).
double lifted_objective(const CMatrix& v, double tau, const IsaptInstance& instance);

/**
 * First-order expansion of lifted_objective around v_anchor, evaluated at v.
 * \throws std::domain_error if the anchor drives a receiver above P_max.
 */
double linearized_objective(const CMatrix& v, const CMatrix& v_anchor, double tau, const IsaptInstance& instance);

/// Slacks of the original constraints, relative to their bounds (>= 0 means satisfied).
struct ConstraintSlacks {
    double range_accuracy = 0.0;  ///< (r_hat_max - rmse) / r_hat_max
    double average_power = 0.0;   ///< (P_avg - tau/T A^2) / P_avg
    double peak_power = 0.0;      ///< (P_p - A^2) / P_p
    std::vector<double> peak_input;  ///< (P_max - P_m) / P_max per receiver
    double pulse_duration = 0.0;  ///< min{tau, tau_max - tau} / tau_max

    double worst() const;
};

ConstraintSlacks audit_constraints(double tau, double amplitude, const CVector& beam, const IsaptInstance& instance);

enum class ScaStatus { optimal, rank_warning, infeasible, numerical_failure };

const char* to_string(ScaStatus status);

struct FixedTauResult {
    double tau = 0.0;
    double amplitude = 0.0;
    CVector beam;
    CMatrix v_final;
    double objective = 0.0;         ///< harvested power re-evaluated from (A, w) [W]
    double lifted_objective = 0.0;  ///< the same from V_final
    int iterations = 0;             ///< SDP solves
    double rank_ratio = 0.0;        ///< worst lambda2/lambda1 over all SDP solutions
    double max_kkt_residual = 0.0;  ///< worst KKT residual over all SDP solutions
    std::vector<double> history;    ///< objective of the initial point, then of each iterate
    InitPolicy init_policy = InitPolicy::as_is;
    ScaStatus status = ScaStatus::numerical_failure;
    std::string message;

    /// Smallest increment of history; 0 for fewer than two entries.
    double worst_ascent() const;

    bool succeeded() const { return status == ScaStatus::optimal || status == ScaStatus::rank_warning; }
};

/// The inner convex problem for a given linearization point, before any compression.
sdp::HermitianLinearSdp build_inner_problem(double tau, const CMatrix& v_anchor, const IsaptInstance& instance);

FixedTauResult solve_fixed_tau(double tau, const IsaptInstance& instance);

/// SCA started from a given lifted point instead of the beamsteering matrix.
/// Returns status infeasible if start violates the lifted constraints.
FixedTauResult solve_fixed_tau(double tau, const IsaptInstance& instance, const CMatrix& start);

struct CurvePoint {
    double tau = 0.0;
    double objective = 0.0;
    ScaStatus status = ScaStatus::numerical_failure;
    int iterations = 0;
    double rank_ratio = 0.0;
    double max_kkt_residual = 0.0;
    double worst_ascent = 0.0;  ///< smallest h^i - h^(i-1); negative means a descent step
};

struct DesignSolution {
    double tau_star = 0.0;
    double amplitude_star = 0.0;
    CVector beam_star;
    double objective = 0.0;
    std::vector<CurvePoint> curve;
    ConstraintSlacks slacks;
    double range_rmse = 0.0;
    std::vector<double> received_power;
    std::vector<double> harvested_power;
    FixedTauResult at_star;
};

/// Runs solve_fixed_tau on every point of the pulse-duration grid and keeps the best.
/// Ties go to the shorter pulse.
/// \throws InfeasibleError if the grid is empty, NumericalError if every point failed.
DesignSolution grid_search(const IsaptInstance& instance);

/// Same as grid_search over an explicit list of pulse durations.
DesignSolution grid_search(const IsaptInstance& instance, const std::vector<double>& taus);

/// Grid of the instance: feasible_tau_grid with the instance's peak power and n_tau.
std::vector<double> instance_tau_grid(const IsaptInstance& instance);

}  // namespace isapt
