#include "isapt/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace isapt::special {

namespace {

constexpr double kSeriesSwitch = 40.0;
constexpr double kLn2Pi = 1.8378770664093454836;

void require_finite(double v, const char* what)
{
    if (!std::isfinite(v)) {
        throw std::domain_error(std::string(what) + ": non-finite argument");
    }
}

void require_nonnegative(double x, const char* what)
{
    require_finite(x, what);
    if (x < 0.0) {
        throw std::domain_error(std::string(what) + ": negative argument");
    }
}

// sum_k (x^2/4)^k / (k!)^2 and sum_k (x/2) (x^2/4)^k / (k! (k+1)!)
struct SeriesPair {
    double i0;
    double i1_over_x;  // I1(x) / x
};

SeriesPair bessel_series(double x)
{
    const double q = 0.25 * x * x;
    double t0 = 1.0;
    double t1 = 0.5;
    double s0 = t0;
    double s1 = t1;
    for (int k = 1; k < 200; ++k) {
        t0 *= q / (static_cast<double>(k) * k);
        t1 *= q / (static_cast<double>(k) * (k + 1));
        s0 += t0;
        s1 += t1;
        if (t0 < 1e-17 * s0 && t1 < 1e-17 * s1) {
            break;
        }
    }
    return {s0, s1};
}

// Scaled large-argument series sum_k (-1)^k a_k(nu) / x^k with
// a_k(nu) = prod_{j=1..k} (4 nu^2 - (2j-1)^2) / (k! 8^k). Stops at the smallest term.
double asymptotic_sum(double x, int nu)
{
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) {
            break;
        }
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

}  // namespace

LogDomainValue LogDomainValue::from_value(double y)
{
    if (!(y > 0.0) || !std::isfinite(y)) {
        throw std::domain_error("LogDomainValue: value must be positive and finite");
    }
    return {std::log(y)};
}

double lambert_w0_of_exp(LogDomainValue log_y)
{
    const double l = log_y.log_value;
    require_finite(l, "lambert_w0_of_exp");

    if (l > 1.0) {
        // f(w) = w + ln w - l, f' = 1 + 1/w, f'' = -1/w^2
        const double ll = std::log(l);
        double w = l - ll + ll / l;
        for (int it = 0; it < 50; ++it) {
            const double f = w + std::log(w) - l;
            const double d1 = 1.0 + 1.0 / w;
            const double d2 = -1.0 / (w * w);
            const double step = f / (d1 - 0.5 * f * d2 / d1);
            double next = w - step;
            if (next <= 0.0) {
                next = 0.5 * w;
            }
            const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * next;
            w = next;
            if (done) {
                break;
            }
        }
        return w;
    }

    const double y = std::exp(l);
    if (y < 1e-300) {
        return y;
    }
    double w = std::log1p(y);
    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double g = w * ew - y;
        const double gp = ew * (w + 1.0);
        const double step = g / (gp - (w + 2.0) * g / (2.0 * w + 2.0));
        const double next = w - step;
        const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(next);
        w = next;
        if (done) {
            break;
        }
    }
    return w;
}

double lambert_w0_offset(double base, double log_gain)
{
    require_finite(base, "lambert_w0_offset");
    require_nonnegative(log_gain, "lambert_w0_offset");
    if (!(base > 0.0)) {
        throw std::domain_error("lambert_w0_offset: base must be positive");
    }
    if (log_gain == 0.0) {
        return 0.0;
    }
    // f(d) = d + log1p(d/base) - g, f' = 1 + 1/(base+d), f'' = -1/(base+d)^2. f is concave
    // and increasing, so Newton from the left never overshoots; Halley just speeds it up.
    double d = log_gain * base / (1.0 + base);
    if (log_gain > 1.0) {
        d = std::max(d, lambert_w0_of_exp({base + std::log(base) + log_gain}) - base);
    }
    for (int it = 0; it < 60; ++it) {
        const double s = base + d;
        const double f = d + std::log1p(d / base) - log_gain;
        const double d1 = 1.0 + 1.0 / s;
        const double d2 = -1.0 / (s * s);
        double next = d - f / (d1 - 0.5 * f * d2 / d1);
        if (next < 0.0) {
            next = 0.5 * d;
        }
        const bool done = std::abs(next - d) <= 4.0 * std::numeric_limits<double>::epsilon() * next;
        d = next;
        if (done) {
            break;
        }
    }
    return d;
}

double log_bessel_i0(double x)
{
    require_nonnegative(x, "log_bessel_i0");
    if (x < kSeriesSwitch) {
        return std::log(bessel_series(x).i0);
    }
    return x - 0.5 * (kLn2Pi + std::log(x)) + std::log(asymptotic_sum(x, 0));
}

double bessel_i1_over_i0(double x)
{
    require_nonnegative(x, "bessel_i1_over_i0");
    if (x < kSeriesSwitch) {
        const SeriesPair s = bessel_series(x);
        return x * s.i1_over_x / s.i0;
    }
    return asymptotic_sum(x, 1) / asymptotic_sum(x, 0);
}

double bessel_i1_over_x_i0(double x)
{
    require_nonnegative(x, "bessel_i1_over_x_i0");
    if (x < kSeriesSwitch) {
        const SeriesPair s = bessel_series(x);
        return s.i1_over_x / s.i0;
    }
    return bessel_i1_over_i0(x) / x;
}

}  // namespace isapt::special
