#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isapt/eh_model.hpp"
#include "oracle.hpp"

using namespace isapt;

TEST_CASE("zero input harvests nothing")
{
    CHECK(std::abs(harvested_power(0.0, EhCircuit{})) <= 1e-15);
}

TEST_CASE("harvested power at the breakdown limit matches the extended-precision oracle")
{
    const EhCircuit c;
    const double ref = static_cast<double>(oracle::harvested(oracle::Real(c.p_max), c));
    CHECK(harvested_power(c.p_max, c) == doctest::Approx(ref).epsilon(1e-8));
    CHECK(harvested_power(c.p_max, c) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(ref == doctest::Approx(7.35e-6).epsilon(1e-2));
}

TEST_CASE("harvested power over the operating range matches the oracle")
{
    const EhCircuit c;
    for (double p : {1e-12, 1e-9, 1e-7, 1e-6, 5e-6, 1e-5, 2e-5}) {
        const double ref = static_cast<double>(oracle::harvested(oracle::Real(p), c));
        CAPTURE(p);
        CHECK(harvested_power(p, c) == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("derivative matches central differences")
{
    const EhCircuit c;
    for (double lp = std::log(1e-9); lp <= std::log(2.5e-5) + 1e-12; lp += (std::log(2.5e-5) - std::log(1e-9)) / 60) {
        const double p = std::min(std::exp(lp), c.p_max);
        const double h = std::min(p * 1e-4, c.p_max - p);
        const double fd = h > 0.0 ? (harvested_power(p + h, c) - harvested_power(p - h, c)) / (2 * h)
                                  : (harvested_power(p, c) - harvested_power(p - 1e-10, c)) / 1e-10;
        CAPTURE(p);
        if (h > 0.0) {
            CHECK(harvested_power_derivative(p, c) == doctest::Approx(fd).epsilon(1e-5));
        } else {
            CHECK(harvested_power_derivative(p, c) == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("derivative matches the oracle derivative")
{
    const EhCircuit c;
    using oracle::Real;
    for (double p : {1e-8, 1e-6, 1e-5, 2.5e-5}) {
        const Real h = Real(p) * Real(1e-20);
        const Real d = (oracle::harvested(Real(p) + h, c) - oracle::harvested(Real(p) - h, c)) / (2 * h);
        CAPTURE(p);
        CHECK(harvested_power_derivative(p, c) == doctest::Approx(static_cast<double>(d)).epsilon(1e-11));
    }
}

TEST_CASE("harvested power is increasing and convex on the operating range")
{
    // Convexity makes the first-order expansion a global under-estimator.
    const EhCircuit c;
    const int n = 400;
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) {
        v[i] = harvested_power(c.p_max * i / n, c);
    }
    for (int i = 1; i < n; ++i) {
        CHECK(v[i] > v[i - 1]);
        CHECK(v[i + 1] - 2 * v[i] + v[i - 1] >= -1e-20);
    }
    for (double p0 : {1e-8, 1e-6, 5e-6, 2e-5}) {
        for (int i = 0; i <= 50; ++i) {
            const double p = c.p_max * i / 50;
            const double tangent = harvested_power(p0, c) + harvested_power_derivative(p0, c) * (p - p0);
            CHECK(tangent <= harvested_power(p, c) + 1e-18);
        }
    }
}

TEST_CASE("derivative vanishes as the input power goes to zero")
{
    const EhCircuit c;
    CHECK(harvested_power_derivative(1e-15, c) < 1e-6 * harvested_power_derivative(1e-6, c));
}

TEST_CASE("domain violations")
{
    const EhCircuit c;
    CHECK_THROWS_AS(harvested_power(-1e-9, c), std::domain_error);
    CHECK_THROWS_AS(harvested_power(c.p_max * 1.01, c), std::domain_error);
    CHECK_THROWS_AS(harvested_power_derivative(0.0, c), std::domain_error);
    CHECK_THROWS_AS(harvested_power_derivative(-1.0, c), std::domain_error);
    CHECK(harvested_power_clipped(1.0, c) == harvested_power(c.p_max, c));
    EhCircuit bad;
    bad.r_l = -1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("received power and weighted average")
{
    CVector h(2);
    h << Complex(1.0, 0.0), Complex(0.0, 1.0);
    CVector w(2);
    w << Complex(1.0, 0.0), Complex(0.0, 1.0);
    w /= std::sqrt(2.0);
    CHECK(received_power(2.0, w, h) == doctest::Approx(4.0 * 2.0));
    CVector not_unit = w * 2.0;
    CHECK_THROWS(received_power(1.0, not_unit, h));

    const EhReceiverSet rs = EhReceiverSet::uniform(2);
    const std::vector<double> p = {1e-5, 2e-5};
    const double expected = 0.25 * 0.5 * (harvested_power(1e-5, EhCircuit{}) + harvested_power(2e-5, EhCircuit{}));
    CHECK(weighted_avg_harvested(1.0, 4.0, rs, p) == doctest::Approx(expected).epsilon(1e-14));

    EhReceiverSet bad = rs;
    bad.weights = {0.5, 0.6};
    CHECK_THROWS(bad.validate());
}
