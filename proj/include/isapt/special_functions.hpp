#pragma once

/**
 * \file special_functions.hpp
 * \brief Scalar kernels for the rectenna model: principal Lambert-W evaluated from a
 * logarithmic argument, and the modified Bessel functions I0 and I1 in forms that do not
 * overflow for large arguments.
 *
 * The harvesting model needs W0(a e^a I0(x)) where the argument easily exceeds the double
 * range, so every entry point here works with ln(y) instead of y.
 */

namespace isapt::special {

/// A positive quantity y stored as ln(y).
struct LogDomainValue {
    double log_value = 0.0;

    static LogDomainValue from_value(double y);
};

/**
 * \brief Principal branch W0(y) for y = exp(log_y.log_value).
 *
 * For log_y > 1 Halley's method is applied to w + ln(w) = log_y, so y is never formed.
 * Otherwise Halley's method on w e^w = y is used directly.
 *
 * \throws std::domain_error for non-finite input.
 */
double lambert_w0_of_exp(LogDomainValue log_y);

/**
 * \brief Returns W0(base * e^base * e^log_gain) - base for base > 0 and log_gain >= 0.
 *
 * Solves d + log1p(d / base) = log_gain for d directly, which keeps full relative accuracy
 * when log_gain is tiny (W0 is then only slightly above base).
 */
double lambert_w0_offset(double base, double log_gain);

/**
 * \brief ln I0(x) for x >= 0.
 *
 * Power series below x = 40, large-argument expansion with the exponential factored out
 * above. No overflow for any finite x.
 */
double log_bessel_i0(double x);

/// I1(x) / I0(x) for x >= 0, in [0, 1).
double bessel_i1_over_i0(double x);

/// I1(x) / (x I0(x)) for x >= 0; the limit 1/2 is returned at x = 0.
double bessel_i1_over_x_i0(double x);

}  // namespace isapt::special
