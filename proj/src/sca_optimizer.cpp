#include "isapt/sca_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "isapt/errors.hpp"

namespace isapt {

namespace {

/// Received power Tr{H_m V} pulled back into [0, p_max] when it exceeds the bound only by
/// solver tolerance.
double admissible_power(double p, const EhCircuit& circuit)
{
    constexpr double kSlack = 1e-8;
    if (p < 0.0 && p > -kSlack * circuit.p_max) {
        return 0.0;
    }
    if (p > circuit.p_max && p <= circuit.p_max * (1.0 + kSlack)) {
        return circuit.p_max;
    }
    return p;
}

double channel_power(const CVector& h, const CMatrix& v) { return (h.adjoint() * v * h)(0, 0).real(); }

struct Subspace {
    CMatrix basis;  // N_t x r, orthonormal columns
    CVector u;
    std::vector<CVector> h;
};

Subspace make_subspace(const IsaptInstance& inst, bool compress)
{
    Subspace s;
    const int n = inst.geometry.n_t;
    if (!compress) {
        s.basis = CMatrix::Identity(n, n);
        s.u = inst.u;
        s.h = inst.channels.vectors;
        return s;
    }
    const auto cols = static_cast<Eigen::Index>(inst.channels.vectors.size() + 1);
    CMatrix span(n, cols);
    span.col(0) = inst.u;
    for (Eigen::Index m = 1; m < cols; ++m) {
        span.col(m) = inst.channels.vectors[static_cast<std::size_t>(m - 1)];
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(span);
    qr.setThreshold(1e-12);
    const Eigen::Index rank = std::max<Eigen::Index>(1, qr.rank());
    s.basis = CMatrix(qr.householderQ()) * CMatrix::Identity(n, rank);
    s.u = s.basis.adjoint() * inst.u;
    for (const auto& h : inst.channels.vectors) {
        s.h.push_back(s.basis.adjoint() * h);
    }
    return s;
}

sdp::HermitianLinearSdp inner_problem(const std::vector<CVector>& h, const CVector& u, const std::vector<double>& coeff,
                                      const EpsilonBounds& eps, const IsaptInstance& inst)
{
    const auto dim = u.size();
    sdp::HermitianLinearSdp p;
    p.dim = static_cast<int>(dim);
    p.objective = CMatrix::Zero(dim, dim);
    for (std::size_t m = 0; m < h.size(); ++m) {
        p.objective += coeff[m] * outer(h[m]);
    }
    p.objective = 0.5 * (p.objective + p.objective.adjoint()).eval();
    p.lower.push_back({outer(u), eps.eps1});
    p.upper.push_back({CMatrix::Identity(dim, dim), eps.eps2});
    for (std::size_t m = 0; m < h.size(); ++m) {
        p.upper.push_back({outer(h[m]), inst.receivers.circuits[m].p_max});
    }
    return p;
}

/// Linearization weights c_m = (tau/T) beta_m phi'(Tr{H_m V_anchor}).
std::vector<double> linearization_weights(const CMatrix& anchor, double tau, const IsaptInstance& inst)
{
    const double duty = tau / slot_duration(tau, inst.scenario);
    std::vector<double> c(inst.channels.vectors.size());
    for (std::size_t m = 0; m < c.size(); ++m) {
        const auto& circuit = inst.receivers.circuits[m];
        double p = admissible_power(channel_power(inst.channels.vectors[m], anchor), circuit);
        p = std::max(p, inst.sca.power_floor);
        c[m] = duty * inst.receivers.weights[m] * harvested_power_derivative(p, circuit);
    }
    return c;
}

/// Largest entry made real and positive.
CVector canonical_phase(const CVector& w)
{
    Eigen::Index k = 0;
    w.cwiseAbs().maxCoeff(&k);
    return w * std::polar(1.0, -std::arg(w[k]));
}

struct Extraction {
    bool feasible = false;
    double amplitude = 0.0;
    CVector beam;
    double objective = -std::numeric_limits<double>::infinity();
};

/// Largest amplitude for a unit beam under the trace and input caps, and its objective if the
/// echo target also holds.
Extraction score_beam(const CVector& w_raw, double tau, const EpsilonBounds& eps, const IsaptInstance& inst)
{
    Extraction e;
    e.beam = canonical_phase(w_raw.normalized());
    double a2 = eps.eps2;
    std::vector<double> g(inst.channels.vectors.size());
    for (std::size_t m = 0; m < g.size(); ++m) {
        g[m] = std::norm(inst.channels.vectors[m].dot(e.beam));
        if (g[m] > 0.0) {
            a2 = std::min(a2, inst.receivers.circuits[m].p_max / g[m]);
        }
    }
    e.amplitude = std::sqrt(a2);
    e.feasible = a2 * std::norm(inst.u.dot(e.beam)) >= eps.eps1;
    if (e.feasible) {
        for (std::size_t m = 0; m < g.size(); ++m) {
            g[m] = std::min(a2 * g[m], inst.receivers.circuits[m].p_max);
        }
        e.objective = weighted_avg_harvested(tau, slot_duration(tau, inst.scenario), inst.receivers, g);
    }
    return e;
}

/// (A, w) from the dominant eigenpair of a rank-one V. Otherwise beams B xi with V = B B^H and
/// Gaussian xi are tried as well, each with the largest admissible amplitude, and the best one
/// that meets every constraint is kept.
Extraction extract_design(const CMatrix& v, double ratio, double tau, const EpsilonBounds& eps,
                          const IsaptInstance& inst)
{
    const sdp::Eigenpair ep = sdp::dominant_eigenpair(v);
    Extraction dominant;
    dominant.amplitude = std::sqrt(std::max(ep.value, 0.0));
    dominant.beam = canonical_phase(ep.vector.normalized());
    if (ratio <= inst.sca.rank_tolerance) {
        dominant.feasible = true;
        return dominant;
    }
    Extraction best = score_beam(ep.vector, tau, eps, inst);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v);
    const RVector& ev = es.eigenvalues();
    CMatrix b(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        b.col(i) = es.eigenvectors().col(i) * std::sqrt(std::max(ev(i), 0.0));
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    for (int k = 0; k < 500; ++k) {
        CVector xi(v.cols());
        for (Eigen::Index i = 0; i < xi.size(); ++i) {
            xi(i) = Complex(normal(rng), normal(rng));
        }
        const CVector w = b * xi;
        if (w.norm() == 0.0) {
            continue;
        }
        const Extraction e = score_beam(w, tau, eps, inst);
        if (e.feasible && (!best.feasible || e.objective > best.objective)) {
            best = e;
        }
    }
    return best.feasible ? best : dominant;
}

}  // namespace

void IsaptInstance::validate() const
{
    geometry.validate();
    scenario.validate();
    receivers.validate();
    if (channels.vectors.size() != receivers.size()) {
        throw std::invalid_argument("IsaptInstance: one channel vector per receiver required");
    }
    for (const auto& h : channels.vectors) {
        if (h.size() != geometry.n_t) {
            throw std::invalid_argument("IsaptInstance: channel length differs from antenna count");
        }
    }
    if (u.size() != geometry.n_t) {
        throw std::invalid_argument("IsaptInstance: steering vector length differs from antenna count");
    }
    if (!(budget.p_avg > 0.0 && budget.p_p > 0.0)) {
        throw std::invalid_argument("IsaptInstance: power budgets must be positive");
    }
    if (n_tau < 1) {
        throw std::invalid_argument("IsaptInstance: n_tau must be at least 1");
    }
    if (!(sca.epsilon_abs > 0.0) || !(sca.epsilon_rel >= 0.0) || sca.max_iterations < 1) {
        throw std::invalid_argument("IsaptInstance: invalid SCA settings");
    }
}

RadarConstants IsaptInstance::constants() const { return radar_constants(scenario, geometry, u); }

EpsilonBounds epsilon_bounds(double tau, const IsaptInstance& instance)
{
    if (!(tau > 0.0)) {
        throw std::invalid_argument("epsilon_bounds: tau must be positive");
    }
    const RadarConstants k = instance.constants();
    const double slot = slot_duration(tau, instance.scenario);
    const double r = instance.scenario.r_hat_max;
    EpsilonBounds e;
    e.eps1 = k.z * k.z * slot * slot / (tau * r * r);
    e.eps2 = std::min(slot / tau * instance.budget.p_avg, instance.budget.p_p);
    return e;
}

InitialMatrix initial_matrix(const IsaptInstance& instance)
{
    InitialMatrix init;
    init.v = (instance.budget.p_p / instance.u.squaredNorm()) * outer(instance.u);
    for (std::size_t m = 0; m < instance.channels.vectors.size(); ++m) {
        const double p = channel_power(instance.channels.vectors[m], init.v);
        const double cap = instance.receivers.circuits[m].p_max;
        if (p > cap) {
            init.scale = std::min(init.scale, cap / p);
        }
    }
    if (init.scale < 1.0) {
        init.v *= init.scale;
        init.policy = InitPolicy::scaled_for_peak_input;
    }
    return init;
}

double lifted_objective(const CMatrix& v, double tau, const IsaptInstance& instance)
{
    std::vector<double> p(instance.channels.vectors.size());
    for (std::size_t m = 0; m < p.size(); ++m) {
        p[m] = admissible_power(channel_power(instance.channels.vectors[m], v), instance.receivers.circuits[m]);
    }
    return weighted_avg_harvested(tau, slot_duration(tau, instance.scenario), instance.receivers, p);
}

double linearized_objective(const CMatrix& v, const CMatrix& v_anchor, double tau, const IsaptInstance& instance)
{
    const std::vector<double> c = linearization_weights(v_anchor, tau, instance);
    double value = lifted_objective(v_anchor, tau, instance);
    for (std::size_t m = 0; m < c.size(); ++m) {
        const CVector& h = instance.channels.vectors[m];
        value += c[m] * (channel_power(h, v) - channel_power(h, v_anchor));
    }
    return value;
}

double ConstraintSlacks::worst() const
{
    double w = std::min({range_accuracy, average_power, peak_power, pulse_duration});
    for (double s : peak_input) {
        w = std::min(w, s);
    }
    return w;
}

ConstraintSlacks audit_constraints(double tau, double amplitude, const CVector& beam, const IsaptInstance& instance)
{
    const SensingScenario& sc = instance.scenario;
    const double a2 = amplitude * amplitude * beam.squaredNorm();
    const double slot = slot_duration(tau, sc);
    ConstraintSlacks s;
    const double rmse = range_rmse(tau, amplitude, beam, instance.constants(), sc, instance.u);
    s.range_accuracy = (sc.r_hat_max - rmse) / sc.r_hat_max;
    s.average_power = (instance.budget.p_avg - tau / slot * a2) / instance.budget.p_avg;
    s.peak_power = (instance.budget.p_p - a2) / instance.budget.p_p;
    for (std::size_t m = 0; m < instance.channels.vectors.size(); ++m) {
        const double p = amplitude * amplitude * std::norm(instance.channels.vectors[m].dot(beam));
        const double cap = instance.receivers.circuits[m].p_max;
        s.peak_input.push_back((cap - p) / cap);
    }
    const double tmax = tau_max(sc);
    s.pulse_duration = std::min(tau, tmax - tau) / tmax;
    return s;
}

double FixedTauResult::worst_ascent() const
{
    double w = 0.0;
    for (std::size_t i = 1; i < history.size(); ++i) {
        w = std::min(w, history[i] - history[i - 1]);
    }
    return w;
}

const char* to_string(ScaStatus status)
{
    switch (status) {
    case ScaStatus::optimal:
        return "optimal";
    case ScaStatus::rank_warning:
        return "rank-warning";
    case ScaStatus::infeasible:
        return "infeasible";
    case ScaStatus::numerical_failure:
        return "numerical-failure";
    }
    return "unknown";
}

sdp::HermitianLinearSdp build_inner_problem(double tau, const CMatrix& v_anchor, const IsaptInstance& instance)
{
    return inner_problem(instance.channels.vectors, instance.u, linearization_weights(v_anchor, tau, instance),
                         epsilon_bounds(tau, instance), instance);
}

namespace {

FixedTauResult run_sca(double tau, const IsaptInstance& instance, const CMatrix& start, InitPolicy policy);

}  // namespace

FixedTauResult solve_fixed_tau(double tau, const IsaptInstance& instance)
{
    const EpsilonBounds eps = epsilon_bounds(tau, instance);
    InitialMatrix init = initial_matrix(instance);
    const double trace0 = init.v.trace().real();
    if (trace0 > eps.eps2) {
        init.v *= eps.eps2 / trace0;
    }
    if (trace_product(outer(instance.u), init.v) < eps.eps1 * (1.0 - 1e-12)) {
        FixedTauResult r;
        r.tau = tau;
        r.init_policy = init.policy;
        r.status = ScaStatus::infeasible;
        r.message = "initial point misses the range-accuracy constraint after power scaling";
        return r;
    }
    return run_sca(tau, instance, init.v, init.policy);
}

FixedTauResult solve_fixed_tau(double tau, const IsaptInstance& instance, const CMatrix& start)
{
    const auto n = instance.geometry.n_t;
    if (start.rows() != n || start.cols() != n) {
        throw std::invalid_argument("solve_fixed_tau: start matrix has wrong dimension");
    }
    const EpsilonBounds eps = epsilon_bounds(tau, instance);
    constexpr double kTol = 1e-9;
    bool ok = trace_product(outer(instance.u), start) >= eps.eps1 * (1.0 - kTol) &&
              start.trace().real() <= eps.eps2 * (1.0 + kTol);
    for (std::size_t m = 0; ok && m < instance.channels.vectors.size(); ++m) {
        ok = channel_power(instance.channels.vectors[m], start) <= instance.receivers.circuits[m].p_max * (1.0 + kTol);
    }
    if (!ok) {
        FixedTauResult r;
        r.tau = tau;
        r.status = ScaStatus::infeasible;
        r.message = "start matrix violates the lifted constraints";
        return r;
    }
    return run_sca(tau, instance, start, InitPolicy::as_is);
}

namespace {

FixedTauResult run_sca(double tau, const IsaptInstance& instance, const CMatrix& start, InitPolicy policy)
{
    FixedTauResult r;
    r.tau = tau;
    r.init_policy = policy;
    const EpsilonBounds eps = epsilon_bounds(tau, instance);
    const double u_norm2 = instance.u.squaredNorm();

    CMatrix v = start;
    r.history.push_back(lifted_objective(v, tau, instance));

    // At eps1 = eps2 ||u||^2 the feasible set collapses to the single point
    // (eps2/||u||^2) u u^H, which has no interior; it is the answer.
    const bool singleton = eps.eps1 >= eps.eps2 * u_norm2 * (1.0 - 1e-10);
    if (!singleton) {
        const Subspace sub = make_subspace(instance, instance.sca.compress_subspace);
        r.status = ScaStatus::optimal;
        for (int it = 0; it < instance.sca.max_iterations; ++it) {
            const std::vector<double> c = linearization_weights(v, tau, instance);
            const sdp::HermitianLinearSdp problem = inner_problem(sub.h, sub.u, c, eps, instance);
            const sdp::SdpSolution sol = sdp::solve(problem, instance.sca.sdp);
            ++r.iterations;
            if (sol.status != sdp::SdpStatus::optimal) {
                r.status = sol.status == sdp::SdpStatus::infeasible ? ScaStatus::infeasible
                                                                    : ScaStatus::numerical_failure;
                r.message = std::string("inner SDP ") + sdp::to_string(sol.status) + ": " + sol.message;
                break;
            }
            r.max_kkt_residual = std::max({r.max_kkt_residual, sol.kkt.primal, sol.kkt.dual,
                                           sol.kkt.complementarity, sol.kkt.gap});
            const CMatrix reduced = sdp::rank_one_optimum(problem, sol.v, instance.sca.sdp);
            r.rank_ratio = std::max(r.rank_ratio, sdp::rank_one_ratio(reduced));
            v = sub.basis * reduced * sub.basis.adjoint();
            v = 0.5 * (v + v.adjoint()).eval();
            const double h = lifted_objective(v, tau, instance);
            const double prev = r.history.back();
            r.history.push_back(h);
            const double change = std::abs(h - prev);
            if (change <= instance.sca.epsilon_abs || change <= instance.sca.epsilon_rel * std::abs(h)) {
                break;
            }
        }
        if (r.status == ScaStatus::optimal && r.rank_ratio > instance.sca.rank_tolerance) {
            r.status = ScaStatus::rank_warning;
            r.message = "SDP solution not rank one within tolerance";
        }
        if (!r.succeeded() && r.iterations <= 1) {
            return r;
        }
        if (!r.succeeded()) {
            // Keep the last good iterate; the point still counts as failed.
            r.message += " (after " + std::to_string(r.iterations - 1) + " good iterations)";
        }
    } else {
        r.status = ScaStatus::optimal;
        r.message = "feasible set is a single point";
    }

    r.v_final = v;
    r.lifted_objective = r.history.back();
    const Extraction ex = extract_design(v, sdp::rank_one_ratio(v), tau, eps, instance);
    r.amplitude = ex.amplitude;
    r.beam = ex.beam;
    if (!ex.feasible) {
        r.status = ScaStatus::numerical_failure;
        r.message = "no beam drawn from the rank-deficient SDP solution meets the constraints";
    }
    std::vector<double> p(instance.channels.vectors.size());
    for (std::size_t m = 0; m < p.size(); ++m) {
        p[m] = admissible_power(r.amplitude * r.amplitude * std::norm(instance.channels.vectors[m].dot(r.beam)),
                                instance.receivers.circuits[m]);
    }
    r.objective = weighted_avg_harvested(tau, slot_duration(tau, instance.scenario), instance.receivers, p);
    return r;
}

}  // namespace

std::vector<double> instance_tau_grid(const IsaptInstance& instance)
{
    const RadarConstants k = instance.constants();
    const TauBounds b = tau_bounds(instance.scenario, instance.u, k, instance.budget.p_p);
    if (!b.feasible) {
        throw InfeasibleError("no pulse duration meets the range-accuracy target with the given peak power");
    }
    return feasible_tau_grid(instance.scenario, instance.u, k, instance.budget.p_p, instance.n_tau);
}

DesignSolution grid_search(const IsaptInstance& instance) { return grid_search(instance, instance_tau_grid(instance)); }

DesignSolution grid_search(const IsaptInstance& instance, const std::vector<double>& taus)
{
    instance.validate();
    if (taus.empty()) {
        throw InfeasibleError("grid_search: empty pulse-duration grid");
    }
    DesignSolution d;
    std::optional<std::size_t> best;
    std::vector<FixedTauResult> results;
    results.reserve(taus.size());
    for (double tau : taus) {
        results.push_back(solve_fixed_tau(tau, instance));
        const FixedTauResult& fr = results.back();
        d.curve.push_back({tau, fr.succeeded() ? fr.objective : std::numeric_limits<double>::quiet_NaN(), fr.status,
                           fr.iterations, fr.rank_ratio, fr.max_kkt_residual, fr.worst_ascent()});
        if (fr.succeeded() && (!best || fr.objective > results[*best].objective)) {
            best = results.size() - 1;
        }
    }
    if (!best) {
        bool any_infeasible = false;
        for (const auto& fr : results) {
            any_infeasible |= fr.status == ScaStatus::infeasible;
        }
        if (any_infeasible) {
            throw InfeasibleError("grid_search: no grid point admits a feasible design");
        }
        throw NumericalError("grid_search: inner solver failed on every grid point");
    }
    d.at_star = std::move(results[*best]);
    d.tau_star = d.at_star.tau;
    d.amplitude_star = d.at_star.amplitude;
    d.beam_star = d.at_star.beam;
    d.objective = d.at_star.objective;
    d.slacks = audit_constraints(d.tau_star, d.amplitude_star, d.beam_star, instance);
    d.range_rmse = range_rmse(d.tau_star, d.amplitude_star, d.beam_star, instance.constants(), instance.scenario,
                              instance.u);
    for (std::size_t m = 0; m < instance.channels.vectors.size(); ++m) {
        const double p = d.amplitude_star * d.amplitude_star * std::norm(instance.channels.vectors[m].dot(d.beam_star));
        d.received_power.push_back(p);
        d.harvested_power.push_back(
            harvested_power(admissible_power(p, instance.receivers.circuits[m]), instance.receivers.circuits[m]));
    }
    return d;
}

}  // namespace isapt
