#pragma once

/**
 * \file sdp.hpp
 * \brief Dense complex Hermitian semidefinite programs with trace inequalities.
 *
 *   maximize   Re Tr{C V}
 *   subject to Tr{A_l V} >= b_l   (lower constraints)
 *              Tr{A_u V} <= b_u   (upper constraints)
 *              V Hermitian, V >= 0
 *
 * The complex problem is mapped to a real symmetric one of twice the dimension with
 *   V  ->  X = [Re V, -Im V; Im V, Re V],
 * under which Tr{A V} = <A~, X> / 2 for Hermitian A, Tr{X} = 2 Tr{V}, every eigenvalue of V
 * appears twice in X, and rank(X) = 2 rank(V). Matrices of this block form are closed under
 * products and inverses, so interior-point iterates started from a block-form point stay in
 * block form and map back to a Hermitian V without loss.
 *
 * The real problem is solved with a primal-dual path-following method (Nesterov-Todd
 * scaling, Mehrotra predictor-corrector, infeasible start). Before solving, every constraint
 * row is scaled to unit Frobenius norm and the objective to unit norm, so tolerances are
 * scale free. Primal infeasibility is reported with a Farkas certificate y >= 0,
 * sum_u y_u A_u - sum_l y_l A_l >= 0, sum_u y_u b_u - sum_l y_l b_l < 0.
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isapt/types.hpp"

namespace isapt::sdp {

struct TraceConstraint {
    CMatrix matrix;
    double bound = 0.0;
};

struct HermitianLinearSdp {
    int dim = 0;
    CMatrix objective;
    std::vector<TraceConstraint> lower;  ///< Tr{A V} >= b
    std::vector<TraceConstraint> upper;  ///< Tr{A V} <= b

    /// \throws std::invalid_argument on dimension mismatch or non-Hermitian data.
    void validate() const;

    /// Re Tr{C V}.
    double objective_value(const CMatrix& v) const;
};

enum class SdpStatus { optimal, infeasible, numerical_failure };

const char* to_string(SdpStatus status);

/// Residuals of the optimality conditions, measured on the normalized problem.
struct KktResiduals {
    double primal = 0.0;           ///< largest constraint violation
    double dual = 0.0;             ///< largest negative part of the multipliers and of eig(Y)
    double complementarity = 0.0;  ///< |Tr{Y V}| + sum |multiplier * slack|
    double gap = 0.0;              ///< |pobj - dobj| / (1 + |pobj| + |dobj|)
};

struct SdpSolution {
    SdpStatus status = SdpStatus::numerical_failure;
    CMatrix v;
    std::vector<double> lower_duals;  ///< one per lower constraint, >= 0
    std::vector<double> upper_duals;  ///< one per upper constraint, >= 0
    /// Y = sum_u y_u A_u - sum_l y_l A_l - C; PSD and Tr{Y V} = 0 at an optimum.
    CMatrix psd_dual;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    KktResiduals kkt;
    int iterations = 0;
    std::string message;
};

struct SdpOptions {
    double tolerance = 1e-11;        ///< feasibility and gap target on the normalized problem
    double acceptable = 1e-8;        ///< accepted if progress stalls below this
    double infeasibility_tolerance = 1e-8;
    int max_iterations = 200;
};

/**
 * Solves the problem. A warm start, when given, sets the initial primal point to a blend of
 * the (embedded, normalized) warm start and a multiple of the identity.
 */
SdpSolution solve(const HermitianLinearSdp& problem, const SdpOptions& options = {},
                  const std::optional<CMatrix>& warm_start = std::nullopt);

/**
 * Moves a feasible point inside its face to lower rank. With V = B B^H, directions
 * B X B^H that leave the objective and every active constraint unchanged are followed until
 * an eigenvalue reaches zero, and this is repeated until no such direction exists. Directions
 * that also hold inactive constraints are tried first; if none reaches lower rank, the step
 * stops at the first inactive bound instead. An optimal V stays optimal. Interior-point methods return
 * the relative interior of a non-singleton optimal face, which can be of high rank even when
 * a rank-one optimum exists.
 * \param active_tol relative slack below which a constraint counts as active.
 */
CMatrix reduce_rank(const HermitianLinearSdp& problem, const CMatrix& v, double active_tol = 1e-7);

/**
 * An optimal point of rank one, if it can be found. Starts from reduce_rank; when that stalls
 * above `rank_tol`, alternates minimizing Tr{(I - q q^H) V} over points whose objective is
 * within `objective_slack` (relative) of the optimum, with q the dominant eigenvector of the
 * last point. Returns the lowest-rank point seen.
 */
CMatrix rank_one_optimum(const HermitianLinearSdp& problem, const CMatrix& v, const SdpOptions& options = {},
                         double rank_tol = 1e-9, double objective_slack = 1e-7, int rounds = 12);

/// lambda_2 / lambda_1 of a Hermitian PSD matrix; 0 for the zero matrix and for dim 1.
double rank_one_ratio(const CMatrix& v);

/// Dominant eigenpair of a Hermitian matrix.
struct Eigenpair {
    double value = 0.0;
    CVector vector;
};
Eigenpair dominant_eigenpair(const CMatrix& v);

/// Plain-text dump of a problem: header "isapt-sdp 1 <dim>", then blocks
/// "objective", "lower <b>", "upper <b>", each followed by dim rows of "re im" pairs, then "end".
void write_problem(std::ostream& out, const HermitianLinearSdp& problem);
HermitianLinearSdp read_problem(std::istream& in);

}  // namespace isapt::sdp
