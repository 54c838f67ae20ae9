#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "isapt/special_functions.hpp"
#include "oracle.hpp"

using namespace isapt::special;
using oracle::Real;

TEST_CASE("log I0 matches the extended-precision series")
{
    for (double x : {0.0, 1e-8, 1e-3, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0, 39.99, 40.0, 40.01, 100.0, 500.0, 700.0}) {
        const double ref = static_cast<double>(boost::multiprecision::log(oracle::bessel_i0(Real(x))));
        CAPTURE(x);
        CHECK(log_bessel_i0(x) == doctest::Approx(ref).epsilon(2e-15).scale(1.0));
    }
}

TEST_CASE("log I0 stays finite far beyond the double range of I0")
{
    for (double x : {1e3, 1e5}) {
        const double v = log_bessel_i0(x);
        const double ref = static_cast<double>(boost::multiprecision::log(oracle::bessel_i0(Real(x))));
        CHECK(std::isfinite(v));
        CHECK(v == doctest::Approx(ref).epsilon(1e-15));
    }
}

TEST_CASE("Bessel ratios")
{
    CHECK(bessel_i1_over_x_i0(0.0) == 0.5);
    CHECK(bessel_i1_over_i0(0.0) == 0.0);
    for (double x : {1e-6, 0.1, 1.0, 5.0, 15.0, 39.99, 40.0, 40.01, 300.0}) {
        const Real i0 = oracle::bessel_i0(Real(x));
        const Real i1 = oracle::bessel_i1(Real(x));
        CAPTURE(x);
        CHECK(bessel_i1_over_i0(x) == doctest::Approx(static_cast<double>(i1 / i0)).epsilon(1e-14));
        CHECK(bessel_i1_over_x_i0(x) == doctest::Approx(static_cast<double>(i1 / (Real(x) * i0))).epsilon(1e-14));
    }
}

TEST_CASE("Lambert W0 from a logarithmic argument")
{
    for (double ly : {-30.0, -2.0, -1e-3, 0.0, 0.5, 1.0, 1.0001, 2.0, 10.0, 100.0, 700.0, 1e4, 1e8}) {
        const double ref = static_cast<double>(oracle::lambert_w0_log(Real(ly)));
        CAPTURE(ly);
        CHECK(lambert_w0_of_exp({ly}) == doctest::Approx(ref).epsilon(1e-14));
    }
    CHECK(lambert_w0_of_exp(LogDomainValue::from_value(std::exp(1.0))) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Lambert W0 offset keeps relative accuracy for tiny gains")
{
    const double a = 1.29;
    for (double g : {1e-14, 1e-10, 1e-6, 1e-2, 1.0, 50.0}) {
        const Real base(a);
        const Real w = oracle::lambert_w0(base * boost::multiprecision::exp(base + Real(g)));
        const double ref = static_cast<double>(w - base);
        CAPTURE(g);
        CHECK(lambert_w0_offset(a, g) == doctest::Approx(ref).epsilon(1e-13));
    }
    CHECK(lambert_w0_offset(a, 0.0) == 0.0);
}

TEST_CASE("invalid arguments are rejected")
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(log_bessel_i0(-1.0), std::domain_error);
    CHECK_THROWS_AS(log_bessel_i0(nan), std::domain_error);
    CHECK_THROWS_AS(lambert_w0_of_exp({nan}), std::domain_error);
    CHECK_THROWS_AS(lambert_w0_offset(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(lambert_w0_offset(1.0, -1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_i1_over_i0(-0.5), std::domain_error);
    CHECK_THROWS_AS(LogDomainValue::from_value(0.0), std::domain_error);
}
