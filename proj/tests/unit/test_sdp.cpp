#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "isapt/sdp.hpp"

using namespace isapt;
using namespace isapt::sdp;

namespace {

struct Reference {
    HermitianLinearSdp problem;
    double value = 0.0;
};

std::vector<Reference> load_reference()
{
    std::ifstream in(ISAPT_TEST_DATA_DIR "/sdp_reference.txt");
    REQUIRE(in.good());
    std::vector<Reference> out;
    while (in >> std::ws && in.peek() != EOF) {
        Reference r;
        r.problem = read_problem(in);
        std::string tag;
        in >> tag >> r.value;
        REQUIRE(tag == "value");
        out.push_back(std::move(r));
    }
    return out;
}

double max_kkt(const KktResiduals& k)
{
    return std::max({k.primal, k.dual, k.complementarity, k.gap});
}

CMatrix random_hermitian(std::mt19937_64& rng, int d)
{
    std::normal_distribution<double> n;
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            g(i, j) = {n(rng), n(rng)};
        }
    }
    return (g + g.adjoint()) / 2.0;
}

bool feasible(const HermitianLinearSdp& p, const CMatrix& v, double tol)
{
    for (const auto& c : p.lower) {
        if ((c.matrix * v).trace().real() < c.bound - tol) {
            return false;
        }
    }
    for (const auto& c : p.upper) {
        if ((c.matrix * v).trace().real() > c.bound + tol) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("reference problems")
{
    const auto refs = load_reference();
    REQUIRE(refs.size() == 200);
    int dims[4] = {0, 0, 0, 0};
    double worst_err = 0.0;
    double worst_kkt = 0.0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& r = refs[i];
        ++dims[r.problem.dim];
        const SdpSolution s = solve(r.problem);
        CAPTURE(i);
        REQUIRE(s.status == SdpStatus::optimal);
        const double err = std::abs(s.primal_objective - r.value) / (1.0 + std::abs(r.value));
        worst_err = std::max(worst_err, err);
        worst_kkt = std::max(worst_kkt, max_kkt(s.kkt));
        CHECK(err <= 1e-6);
        CHECK(max_kkt(s.kkt) <= 1e-8);
        CHECK(s.primal_objective == doctest::Approx(r.problem.objective_value(s.v)).epsilon(1e-12));
        // Returned V is PSD and feasible.
        Eigen::SelfAdjointEigenSolver<CMatrix> es(s.v);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
        CHECK(feasible(r.problem, s.v, 1e-8));
    }
    CHECK(dims[1] >= 60);
    CHECK(dims[2] >= 60);
    CHECK(dims[3] >= 60);
    MESSAGE("worst relative error " << worst_err << ", worst KKT residual " << worst_kkt);
}

TEST_CASE("no sampled rank-one point beats the optimum")
{
    const auto refs = load_reference();
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (std::size_t i = 0; i < refs.size(); i += 4) {
        const auto& p = refs[i].problem;
        const SdpSolution s = solve(p);
        REQUIRE(s.status == SdpStatus::optimal);
        double best = -1e300;
        for (int k = 0; k < 2000; ++k) {
            CVector x(p.dim);
            for (int j = 0; j < p.dim; ++j) {
                x[j] = {n(rng), n(rng)};
            }
            const CMatrix xx = x * x.adjoint();
            for (double t : {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0}) {
                const CMatrix v = t * xx / xx.trace().real();
                if (feasible(p, v, 0.0)) {
                    best = std::max(best, p.objective_value(v));
                }
            }
        }
        CAPTURE(i);
        CHECK(best <= s.primal_objective + 1e-9 * (1.0 + std::abs(s.primal_objective)));
    }
}

TEST_CASE("trivial problems")
{
    HermitianLinearSdp p;
    p.dim = 1;
    p.objective = CMatrix::Constant(1, 1, 2.0);
    p.upper.push_back({CMatrix::Identity(1, 1), 3.0});
    SdpSolution s = solve(p);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(s.primal_objective == doctest::Approx(6.0).epsilon(1e-9));
    CHECK(s.upper_duals[0] == doctest::Approx(2.0).epsilon(1e-7));

    HermitianLinearSdp q;
    q.dim = 2;
    q.objective = CMatrix::Zero(2, 2);
    q.objective(0, 0) = 1.0;
    q.upper.push_back({CMatrix::Identity(2, 2), 1.0});
    s = solve(q);
    REQUIRE(s.status == SdpStatus::optimal);
    CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::abs(s.v(0, 0) - 1.0) < 1e-7);
    CHECK(rank_one_ratio(s.v) < 1e-7);
}

TEST_CASE("infeasible when the echo requirement exceeds the power budget")
{
    std::mt19937_64 rng(9);
    for (int d : {1, 2, 3}) {
        CVector u(d);
        for (int j = 0; j < d; ++j) {
            u[j] = std::polar(1.0, 0.7 * j);
        }
        HermitianLinearSdp p;
        p.dim = d;
        p.objective = random_hermitian(rng, d);
        const double eps2 = 0.5;
        p.lower.push_back({u * u.adjoint(), 1.01 * eps2 * u.squaredNorm()});
        p.upper.push_back({CMatrix::Identity(d, d), eps2});
        const SdpSolution s = solve(p);
        CAPTURE(d);
        CHECK(s.status == SdpStatus::infeasible);

        p.lower[0].bound = 0.99 * eps2 * u.squaredNorm();
        CHECK(solve(p).status == SdpStatus::optimal);
    }
}

TEST_CASE("dual certificate")
{
    const auto refs = load_reference();
    for (std::size_t i = 0; i < refs.size(); i += 10) {
        const auto& p = refs[i].problem;
        const SdpSolution s = solve(p);
        REQUIRE(s.status == SdpStatus::optimal);
        REQUIRE(s.lower_duals.size() == p.lower.size());
        REQUIRE(s.upper_duals.size() == p.upper.size());
        CMatrix y = -p.objective;
        for (std::size_t k = 0; k < p.upper.size(); ++k) {
            CHECK(s.upper_duals[k] >= 0.0);
            y += s.upper_duals[k] * p.upper[k].matrix;
        }
        for (std::size_t k = 0; k < p.lower.size(); ++k) {
            CHECK(s.lower_duals[k] >= 0.0);
            y -= s.lower_duals[k] * p.lower[k].matrix;
        }
        const double scale = 1.0 + y.norm();
        CHECK((y - s.psd_dual).norm() <= 1e-7 * scale);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(s.psd_dual);
        CHECK(es.eigenvalues().minCoeff() >= -1e-7 * scale);
        CHECK(std::abs((s.psd_dual * s.v).trace()) <= 1e-6 * scale * (1.0 + s.v.norm()));
    }
}

TEST_CASE("warm start reaches the same optimum")
{
    const auto refs = load_reference();
    for (std::size_t i = 0; i < refs.size(); i += 17) {
        const auto& p = refs[i].problem;
        const SdpSolution cold = solve(p);
        const SdpSolution warm = solve(p, {}, cold.v);
        REQUIRE(warm.status == SdpStatus::optimal);
        CHECK(warm.primal_objective == doctest::Approx(cold.primal_objective).epsilon(1e-7));
    }
}

TEST_CASE("text round trip")
{
    const auto refs = load_reference();
    for (std::size_t i = 0; i < refs.size(); i += 13) {
        std::stringstream ss;
        write_problem(ss, refs[i].problem);
        const HermitianLinearSdp back = read_problem(ss);
        CHECK(back.dim == refs[i].problem.dim);
        CHECK(back.objective == refs[i].problem.objective);
        REQUIRE(back.lower.size() == refs[i].problem.lower.size());
        REQUIRE(back.upper.size() == refs[i].problem.upper.size());
        for (std::size_t k = 0; k < back.upper.size(); ++k) {
            CHECK(back.upper[k].matrix == refs[i].problem.upper[k].matrix);
            CHECK(back.upper[k].bound == refs[i].problem.upper[k].bound);
        }
    }
    std::istringstream bad("isapt-sdp 2 1\n");
    CHECK_THROWS(read_problem(bad));
}

TEST_CASE("rank and eigen helpers")
{
    CVector x(3);
    x << std::complex<double>(1, 2), std::complex<double>(0, -1), std::complex<double>(3, 0);
    CHECK(rank_one_ratio(x * x.adjoint()) < 1e-15);
    CHECK(rank_one_ratio(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));
    CHECK(rank_one_ratio(CMatrix::Zero(3, 3)) == 0.0);
    CHECK(rank_one_ratio(CMatrix::Constant(1, 1, 2.0)) == 0.0);
    const Eigenpair e = dominant_eigenpair(x * x.adjoint());
    CHECK(e.value == doctest::Approx(x.squaredNorm()));
    CHECK(std::abs(std::abs(e.vector.dot(x.normalized())) - 1.0) < 1e-12);
}

int numerical_rank(const CMatrix& v)
{
    const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(v, Eigen::EigenvaluesOnly).eigenvalues();
    return static_cast<int>((ev.array() > 1e-9 * ev.maxCoeff()).count());
}

TEST_CASE("rank reduction keeps value and feasibility")
{
    for (const Reference& r : load_reference()) {
        const SdpSolution sol = solve(r.problem);
        REQUIRE(sol.status == SdpStatus::optimal);
        const CMatrix v = reduce_rank(r.problem, sol.v);
        const double scale = 1.0 + std::abs(r.value);
        CHECK(std::abs(r.problem.objective_value(v) - r.problem.objective_value(sol.v)) <= 1e-9 * scale);
        CHECK(feasible(r.problem, v, 1e-8 * scale));
        CHECK(numerical_rank(v) <= numerical_rank(sol.v));
        CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(v, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("flat optimal face is reduced to rank one")
{
    // Every unit-trace point meeting the side constraint is optimal; an interior-point method
    // returns one of full rank.
    std::mt19937_64 rng(7);
    for (int d : {2, 3, 4}) {
        HermitianLinearSdp p;
        p.dim = d;
        p.objective = CMatrix::Identity(d, d);
        p.upper.push_back({CMatrix::Identity(d, d), 1.0});
        const CMatrix g = random_hermitian(rng, d);
        const CMatrix psd = g * g;
        p.lower.push_back({psd, 0.5 * psd.trace().real() / d});
        const SdpSolution sol = solve(p);
        REQUIRE(sol.status == SdpStatus::optimal);
        CHECK(rank_one_ratio(sol.v) > 1e-3);
        for (const CMatrix& v : {reduce_rank(p, sol.v), rank_one_optimum(p, sol.v)}) {
            CAPTURE(d);
            CHECK(rank_one_ratio(v) <= 1e-9);
            CHECK(v.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(feasible(p, v, 1e-9));
        }
    }
}

TEST_CASE("validation")
{
    HermitianLinearSdp p;
    p.dim = 2;
    p.objective = CMatrix::Zero(2, 2);
    p.objective(0, 1) = 1.0;  // not Hermitian
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.objective = CMatrix::Zero(3, 3);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.objective = CMatrix::Zero(2, 2);
    p.upper.push_back({CMatrix::Identity(3, 3), 1.0});
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
