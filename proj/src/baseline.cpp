#include "isapt/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isapt/errors.hpp"

namespace isapt {

namespace {

constexpr int kSweepPoints = 64;
constexpr double kBisectionTol = 1e-10;

/// Amplitude and resulting echo gain A^2 |u^H w|^2 for a beam at full power, pulled back for
/// the peak-input limits.
struct Operating {
    double amplitude = 0.0;
    double echo_gain = 0.0;
};

Operating operating_point(const CVector& beam, double eps2, const IsaptInstance& inst)
{
    double a2 = eps2;
    for (std::size_t m = 0; m < inst.channels.vectors.size(); ++m) {
        const double p = a2 * std::norm(inst.channels.vectors[m].dot(beam));
        const double cap = inst.receivers.circuits[m].p_max;
        if (p > cap) {
            a2 *= cap / p;
        }
    }
    return {std::sqrt(a2), a2 * std::norm(inst.u.dot(beam))};
}

}  // namespace

CVector energy_beamformer(const std::vector<CVector>& channels, const std::vector<double>& weights)
{
    if (channels.empty() || channels.size() != weights.size()) {
        throw std::invalid_argument("energy_beamformer: need one weight per channel and at least one channel");
    }
    const auto n = channels.front().size();
    CMatrix s = CMatrix::Zero(n, n);
    for (std::size_t m = 0; m < channels.size(); ++m) {
        s += weights[m] * outer(channels[m]);
    }
    if (s.cwiseAbs().maxCoeff() == 0.0) {
        throw std::invalid_argument("energy_beamformer: channel matrix is zero");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (s + s.adjoint()));
    CVector w = es.eigenvectors().col(n - 1).normalized();
    Eigen::Index k = 0;
    w.cwiseAbs().maxCoeff(&k);
    return w * std::polar(1.0, -std::arg(w[k]));
}

const char* to_string(BaselineStatus status)
{
    return status == BaselineStatus::optimal ? "optimal" : "infeasible";
}

CVector baseline_beam(double rho, const CVector& u, const CVector& w_eb)
{
    const Complex c = u.dot(w_eb);
    const CVector aligned = std::abs(c) > 0.0 ? CVector(w_eb * std::polar(1.0, -std::arg(c))) : w_eb;
    CVector w = rho * u.normalized() + (1.0 - rho) * aligned;
    const double norm = w.norm();
    if (norm == 0.0) {
        return u.normalized();
    }
    return w / norm;
}

BaselineSolution solve_baseline_fixed_tau(double tau, const IsaptInstance& instance)
{
    BaselineSolution s;
    s.tau = tau;
    const EpsilonBounds eps = epsilon_bounds(tau, instance);
    const CVector w_eb = energy_beamformer(instance.channels.vectors, instance.receivers.weights);
    auto gain = [&](double rho) { return operating_point(baseline_beam(rho, instance.u, w_eb), eps.eps2, instance); };
    auto meets = [&](double rho) { return gain(rho).echo_gain >= eps.eps1; };

    // Verification sweep; bisection runs on the first bracket where the target is reached.
    double lo = 0.0;
    double hi = -1.0;
    bool monotone = true;
    double prev = -1.0;
    for (int k = 0; k <= kSweepPoints; ++k) {
        const double rho = static_cast<double>(k) / kSweepPoints;
        const double g = gain(rho).echo_gain;
        monotone = monotone && g >= prev * (1.0 - 1e-12);
        prev = g;
        if (g >= eps.eps1) {
            hi = rho;
            lo = k > 0 ? static_cast<double>(k - 1) / kSweepPoints : 0.0;
            break;
        }
    }
    if (hi < 0.0) {
        s.status = BaselineStatus::infeasible;
        s.message = "no mixing weight meets the range-accuracy target";
        return s;
    }
    double rho = hi;
    if (hi > 0.0) {
        while (hi - lo > kBisectionTol) {
            const double mid = 0.5 * (lo + hi);
            (meets(mid) ? hi : lo) = mid;
        }
        rho = hi;
    }
    s.mixing_rho = rho;
    s.beam = baseline_beam(rho, instance.u, w_eb);
    const Operating op = operating_point(s.beam, eps.eps2, instance);
    s.amplitude = op.amplitude;
    std::vector<double> p;
    for (std::size_t m = 0; m < instance.channels.vectors.size(); ++m) {
        p.push_back(std::min(s.amplitude * s.amplitude * std::norm(instance.channels.vectors[m].dot(s.beam)),
                             instance.receivers.circuits[m].p_max));
    }
    s.objective = weighted_avg_harvested(tau, slot_duration(tau, instance.scenario), instance.receivers, p);
    s.status = BaselineStatus::optimal;
    if (!monotone) {
        s.message = "echo gain not monotone in the mixing weight; first crossing used";
    }
    return s;
}

BaselineDesign grid_search_baseline(const IsaptInstance& instance)
{
    return grid_search_baseline(instance, instance_tau_grid(instance));
}

BaselineDesign grid_search_baseline(const IsaptInstance& instance, const std::vector<double>& taus)
{
    instance.validate();
    if (taus.empty()) {
        throw InfeasibleError("grid_search_baseline: empty pulse-duration grid");
    }
    BaselineDesign d;
    int best = -1;
    for (double tau : taus) {
        d.curve.push_back(solve_baseline_fixed_tau(tau, instance));
        const BaselineSolution& b = d.curve.back();
        if (b.status == BaselineStatus::optimal && (best < 0 || b.objective > d.curve[static_cast<std::size_t>(best)].objective)) {
            best = static_cast<int>(d.curve.size()) - 1;
        }
    }
    if (best < 0) {
        throw InfeasibleError("grid_search_baseline: no grid point admits a feasible mix");
    }
    d.best = d.curve[static_cast<std::size_t>(best)];
    return d;
}

}  // namespace isapt
