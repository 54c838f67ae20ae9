#pragma once

// Extended-precision reference values for the unit tests.

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "isapt/eh_model.hpp"

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

inline Real bessel_i0(const Real& x) { return boost::math::cyl_bessel_i(0, x); }
inline Real bessel_i1(const Real& x) { return boost::math::cyl_bessel_i(1, x); }

/// W0(y) by Newton iteration on w e^w = y in 50-digit arithmetic.
inline Real lambert_w0(const Real& y)
{
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    Real w = y < 3 ? Real(y / (1 + y)) : Real(log(y) - log(log(y)));
    for (int i = 0; i < 200; ++i) {
        const Real ew = exp(w);
        const Real step = (w * ew - y) / (ew * (w + 1));
        w -= step;
        if (abs(step) < Real(1e-45) * (1 + abs(w))) {
            break;
        }
    }
    return w;
}

/// W0 for y = exp(log_y) via w + ln w = log_y, valid for large log_y.
inline Real lambert_w0_log(const Real& log_y)
{
    using boost::multiprecision::log;
    if (log_y < 2) {
        return lambert_w0(boost::multiprecision::exp(log_y));
    }
    Real w = log_y - log(log_y);
    for (int i = 0; i < 200; ++i) {
        const Real step = (w + log(w) - log_y) / (1 + 1 / w);
        w -= step;
        if (abs(step) < Real(1e-45) * (1 + abs(w))) {
            break;
        }
    }
    return w;
}

inline Real harvested(const Real& p, const isapt::EhCircuit& c)
{
    using boost::multiprecision::exp;
    using boost::multiprecision::sqrt;
    const Real a = c.a;
    const Real x = Real(c.c) * sqrt(2 * p);
    const Real w = lambert_w0(a * exp(a) * bessel_i0(x));
    const Real t = w / a - 1;
    return t * t * Real(c.i_s) * Real(c.i_s) * Real(c.r_l);
}

}  // namespace oracle
