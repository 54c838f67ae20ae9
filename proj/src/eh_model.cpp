#include "isapt/eh_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "isapt/special_functions.hpp"

namespace isapt {

void EhCircuit::validate() const
{
    if (!(a > 0.0 && c > 0.0 && i_s > 0.0 && r_l > 0.0 && p_max > 0.0)) {
        throw std::invalid_argument("EhCircuit: all parameters must be positive");
    }
}

EhReceiverSet EhReceiverSet::uniform(std::size_t count, const EhCircuit& circuit)
{
    if (count == 0) {
        throw std::invalid_argument("EhReceiverSet: need at least one receiver");
    }
    EhReceiverSet set;
    set.circuits.assign(count, circuit);
    set.weights.assign(count, 1.0 / static_cast<double>(count));
    return set;
}

void EhReceiverSet::validate() const
{
    if (weights.empty() || circuits.size() != weights.size()) {
        throw std::invalid_argument("EhReceiverSet: need M >= 1 circuits and weights of equal length");
    }
    double sum = 0.0;
    for (double b : weights) {
        if (!(b >= 0.0 && b <= 1.0)) {
            throw std::invalid_argument("EhReceiverSet: weights must lie in [0, 1]");
        }
        sum += b;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("EhReceiverSet: weights must sum to one");
    }
    for (const auto& c : circuits) {
        c.validate();
    }
}

double received_power(double amplitude, const CVector& beam, const CVector& channel)
{
    if (beam.size() != channel.size()) {
        throw std::invalid_argument("received_power: beam and channel dimensions differ");
    }
    if (std::abs(beam.norm() - 1.0) > 1e-9) {
        throw std::invalid_argument("received_power: beam must have unit norm");
    }
    return amplitude * amplitude * std::norm(channel.dot(beam));
}

namespace {

void check_input_power(double p_in, const EhCircuit& circuit, const char* what)
{
    if (!std::isfinite(p_in) || p_in < 0.0 || p_in > circuit.p_max) {
        throw std::domain_error(std::string(what) + ": input power outside [0, p_max]");
    }
}

}  // namespace

double harvested_power(double p_in, const EhCircuit& circuit)
{
    check_input_power(p_in, circuit, "harvested_power");
    const double x = circuit.c * std::sqrt(2.0 * p_in);
    // W0(a e^a I0(x)) - a, computed without cancellation.
    const double excess = special::lambert_w0_offset(circuit.a, special::log_bessel_i0(x));
    const double ratio = excess / circuit.a;
    return ratio * ratio * circuit.i_s * circuit.i_s * circuit.r_l;
}

double harvested_power_derivative(double p_in, const EhCircuit& circuit)
{
    if (!(p_in > 0.0)) {
        throw std::domain_error("harvested_power_derivative: input power must be positive");
    }
    check_input_power(p_in, circuit, "harvested_power_derivative");
    const double x = circuit.c * std::sqrt(2.0 * p_in);
    const double excess = special::lambert_w0_offset(circuit.a, special::log_bessel_i0(x));
    const double w = circuit.a + excess;
    // d ln I0(x) / dp = (I1/I0)(x) * C / sqrt(2p) = C^2 * I1(x) / (x I0(x))
    const double dlog_gain = circuit.c * circuit.c * special::bessel_i1_over_x_i0(x);
    // dW0(y)/dy * dy/dp = W / (1 + W) * d ln y / dp
    const double dw = w / (1.0 + w) * dlog_gain;
    return 2.0 * excess / (circuit.a * circuit.a) * dw * circuit.i_s * circuit.i_s * circuit.r_l;
}

double harvested_power_clipped(double p_in, const EhCircuit& circuit)
{
    return harvested_power(std::clamp(p_in, 0.0, circuit.p_max), circuit);
}

double weighted_avg_harvested(double tau, double slot, const EhReceiverSet& receivers,
                              std::span<const double> p_in)
{
    if (!(tau > 0.0 && tau < slot)) {
        throw std::invalid_argument("weighted_avg_harvested: need 0 < tau < slot");
    }
    if (p_in.size() != receivers.size() || receivers.circuits.size() != receivers.size()) {
        throw std::invalid_argument("weighted_avg_harvested: one input power per receiver required");
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < p_in.size(); ++m) {
        sum += receivers.weights[m] * harvested_power(p_in[m], receivers.circuits[m]);
    }
    return tau / slot * sum;
}

}  // namespace isapt
