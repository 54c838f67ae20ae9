#include "isapt/sdp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace isapt::sdp {

namespace {

RMatrix embed(const CMatrix& a)
{
    const Eigen::Index d = a.rows();
    RMatrix x(2 * d, 2 * d);
    x.topLeftCorner(d, d) = a.real();
    x.topRightCorner(d, d) = -a.imag();
    x.bottomLeftCorner(d, d) = a.imag();
    x.bottomRightCorner(d, d) = a.real();
    return x;
}

CMatrix deembed(const RMatrix& x)
{
    const Eigen::Index d = x.rows() / 2;
    const RMatrix re = 0.5 * (x.topLeftCorner(d, d) + x.bottomRightCorner(d, d));
    const RMatrix im = 0.5 * (x.bottomLeftCorner(d, d) - x.topRightCorner(d, d));
    CMatrix v(d, d);
    v.real() = re;
    v.imag() = im;
    return 0.5 * (v + v.adjoint());
}

double inner(const RMatrix& a, const RMatrix& b) { return a.cwiseProduct(b).sum(); }

double min_eigenvalue(const RMatrix& a)
{
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool is_hermitian(const CMatrix& a)
{
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

/// The normalized real problem: maximize <c, X> s.t. <rows_i, X> <= g_i, X >= 0.
struct RealProblem {
    int n = 0;
    RMatrix c;
    std::vector<RMatrix> rows;
    RVector g;
    std::vector<double> row_scale;  // Frobenius norm of the embedded row before scaling
    std::vector<double> sign;       // +1 upper, -1 lower
    double objective_scale = 1.0;
    double x_scale = 1.0;
};

RealProblem normalize(const HermitianLinearSdp& p)
{
    RealProblem r;
    r.n = 2 * p.dim;
    const auto m = p.lower.size() + p.upper.size();
    r.rows.reserve(m);
    r.g.resize(static_cast<Eigen::Index>(m));
    auto push = [&](const TraceConstraint& tc, double sign) {
        RMatrix row = (0.5 * sign) * embed(tc.matrix);
        double bound = sign * tc.bound;
        double norm = row.norm();
        if (norm == 0.0) {
            norm = 1.0;
        }
        r.row_scale.push_back(norm);
        r.sign.push_back(sign);
        r.g(static_cast<Eigen::Index>(r.rows.size())) = bound / norm;
        r.rows.push_back(row / norm);
    };
    for (const auto& tc : p.lower) {
        push(tc, -1.0);
    }
    for (const auto& tc : p.upper) {
        push(tc, 1.0);
    }
    r.c = 0.5 * embed(p.objective);
    r.objective_scale = r.c.norm() > 0.0 ? r.c.norm() : 1.0;
    r.c /= r.objective_scale;
    const double gmax = m > 0 ? r.g.cwiseAbs().maxCoeff() : 0.0;
    r.x_scale = gmax > 0.0 ? gmax : 1.0;
    r.g /= r.x_scale;
    return r;
}

struct Iterate {
    RMatrix x;
    RMatrix z;
    RVector s;
    RVector y;
};

struct Direction {
    RMatrix dx;
    RMatrix dz;
    RVector ds;
    RVector dy;
};

struct Scaling {
    RMatrix p;      // W = p p^T
    RMatrix p_inv;
    RMatrix w;
    RVector lambda; // scaled point, diagonal
    std::vector<RMatrix> wgw;
    Eigen::LDLT<RMatrix> schur;
};

RMatrix adjoint_map(const RealProblem& r, const RVector& y)
{
    RMatrix out = RMatrix::Zero(r.n, r.n);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        out.noalias() += y(static_cast<Eigen::Index>(i)) * r.rows[i];
    }
    return out;
}

RVector forward_map(const RealProblem& r, const RMatrix& x)
{
    RVector out(static_cast<Eigen::Index>(r.rows.size()));
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = inner(r.rows[i], x);
    }
    return out;
}

bool build_scaling(const RealProblem& r, const Iterate& it, Scaling& sc)
{
    Eigen::LLT<RMatrix> llt_x(it.x);
    Eigen::LLT<RMatrix> llt_z(it.z);
    if (llt_x.info() != Eigen::Success || llt_z.info() != Eigen::Success) {
        return false;
    }
    const RMatrix lx = llt_x.matrixL();
    const RMatrix lz = llt_z.matrixL();
    Eigen::JacobiSVD<RMatrix> svd(lz.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sc.lambda = svd.singularValues();
    if (!(sc.lambda.minCoeff() > 0.0)) {
        return false;
    }
    const RVector inv_sqrt = sc.lambda.cwiseSqrt().cwiseInverse();
    sc.p = lx * svd.matrixV() * inv_sqrt.asDiagonal();
    sc.p_inv = inv_sqrt.asDiagonal() * svd.matrixU().transpose() * lz.transpose();
    sc.w = sc.p * sc.p.transpose();
    const auto m = static_cast<Eigen::Index>(r.rows.size());
    sc.wgw.resize(r.rows.size());
    RMatrix schur(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        sc.wgw[static_cast<std::size_t>(j)] = sc.w * r.rows[static_cast<std::size_t>(j)] * sc.w;
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            const double v = inner(r.rows[static_cast<std::size_t>(i)], sc.wgw[static_cast<std::size_t>(j)]);
            schur(i, j) = v;
            schur(j, i) = v;
        }
        schur(i, i) += it.s(i) / it.y(i);
    }
    sc.schur.compute(schur);
    return sc.schur.info() == Eigen::Success;
}

/// Solves the Newton system for a given complementarity right-hand side.
Direction solve_direction(const RealProblem& r, const Iterate& it, const Scaling& sc, const RVector& rp,
                          const RMatrix& rd, const RMatrix& rc, const RVector& rlp)
{
    const auto m = static_cast<Eigen::Index>(r.rows.size());
    const RMatrix base = rc - sc.w * rd * sc.w;
    RVector rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        rhs(i) = inner(r.rows[static_cast<std::size_t>(i)], base) + rlp(i) / it.y(i) - rp(i);
    }
    Direction d;
    d.dy = sc.schur.solve(rhs);
    d.dz = adjoint_map(r, d.dy) + rd;
    d.dx = base;
    for (Eigen::Index j = 0; j < m; ++j) {
        d.dx.noalias() -= d.dy(j) * sc.wgw[static_cast<std::size_t>(j)];
    }
    d.dx = 0.5 * (d.dx + d.dx.transpose()).eval();
    d.dz = 0.5 * (d.dz + d.dz.transpose()).eval();
    d.ds = (rlp - it.s.cwiseProduct(d.dy)).cwiseQuotient(it.y);
    return d;
}

/// Refines a direction against the linearized equations
///   A(dx) + ds = rp, dz - A*(dy) = rd, dx + W dz W = rc, y ds + s dy = rlp,
/// which lose accuracy as the scaling becomes ill-conditioned near the optimum.
Direction refined_direction(const RealProblem& r, const Iterate& it, const Scaling& sc, const RVector& rp,
                            const RMatrix& rd, const RMatrix& rc, const RVector& rlp)
{
    Direction d = solve_direction(r, it, sc, rp, rd, rc, rlp);
    for (int pass = 0; pass < 2; ++pass) {
        const RVector ep = rp - forward_map(r, d.dx) - d.ds;
        const RMatrix ed = rd - d.dz + adjoint_map(r, d.dy);
        const RMatrix ec = rc - d.dx - sc.w * d.dz * sc.w;
        const RVector el = rlp - it.y.cwiseProduct(d.ds) - it.s.cwiseProduct(d.dy);
        const Direction c = solve_direction(r, it, sc, ep, ed, 0.5 * (ec + ec.transpose()), el);
        d.dx += c.dx;
        d.dz += c.dz;
        d.ds += c.ds;
        d.dy += c.dy;
    }
    return d;
}

double max_step_psd(const RMatrix& scaled_dir, const RVector& lambda)
{
    const RVector inv_sqrt = lambda.cwiseSqrt().cwiseInverse();
    const RMatrix t = inv_sqrt.asDiagonal() * scaled_dir * inv_sqrt.asDiagonal();
    const double lmin = min_eigenvalue(0.5 * (t + t.transpose()));
    return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_lp(const RVector& v, const RVector& dv)
{
    double step = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) {
            step = std::min(step, -v(i) / dv(i));
        }
    }
    return step;
}

struct Steps {
    double primal;
    double dual;
};

Steps max_steps(const Iterate& it, const Scaling& sc, const Direction& d)
{
    const RMatrix dx_scaled = sc.p_inv * d.dx * sc.p_inv.transpose();
    const RMatrix dz_scaled = sc.p.transpose() * d.dz * sc.p;
    return {std::min(max_step_psd(dx_scaled, sc.lambda), max_step_lp(it.s, d.ds)),
            std::min(max_step_psd(dz_scaled, sc.lambda), max_step_lp(it.y, d.dy))};
}

struct Residuals {
    RVector rp;
    RMatrix rd;
    double pobj;
    double dobj;
    double complementarity;
    double rel_primal;
    double rel_dual;
    double rel_gap;
};

Residuals residuals(const RealProblem& r, const Iterate& it)
{
    Residuals res;
    res.rp = r.g - forward_map(r, it.x) - it.s;
    res.rd = adjoint_map(r, it.y) - r.c - it.z;
    res.pobj = inner(r.c, it.x);
    res.dobj = r.g.dot(it.y);
    res.complementarity = inner(it.x, it.z) + it.s.dot(it.y);
    res.rel_primal = res.rp.norm() / (1.0 + r.g.norm());
    res.rel_dual = res.rd.norm() / (1.0 + r.c.norm());
    res.rel_gap = std::max(std::abs(res.complementarity), std::abs(res.pobj - res.dobj)) /
                  (1.0 + std::abs(res.pobj) + std::abs(res.dobj));
    return res;
}

/// y >= 0 with adjoint(y) >= -tol I and g^T y = -1 proves there is no feasible X of
/// normalized trace below 1/tol.
bool has_farkas_certificate(const RealProblem& r, const Iterate& it, double tol, RVector& certificate)
{
    const double gy = r.g.dot(it.y);
    if (!(gy < 0.0)) {
        return false;
    }
    certificate = it.y / (-gy);
    const RMatrix s = adjoint_map(r, certificate);
    return min_eigenvalue(s) >= -tol;
}

KktResiduals final_kkt(const RealProblem& r, const RMatrix& x, const RVector& y)
{
    KktResiduals k;
    const RVector gx = forward_map(r, x);
    const RVector slack = r.g - gx;
    k.primal = std::max(0.0, -slack.minCoeff());
    k.primal = std::max(k.primal, -min_eigenvalue(x));
    const RMatrix z = adjoint_map(r, y) - r.c;
    k.dual = std::max({0.0, -min_eigenvalue(z), -y.minCoeff()});
    const double pobj = inner(r.c, x);
    const double dobj = r.g.dot(y);
    double comp = std::abs(inner(z, x));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        comp += std::abs(y(i) * slack(i));
    }
    k.complementarity = comp / (1.0 + std::abs(pobj));
    k.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    return k;
}

void finish(const HermitianLinearSdp& problem, const RealProblem& r, const Iterate& it, SdpSolution& out)
{
    out.v = r.x_scale * deembed(it.x);
    const std::size_t nl = problem.lower.size();
    out.lower_duals.assign(nl, 0.0);
    out.upper_duals.assign(problem.upper.size(), 0.0);
    out.psd_dual = -problem.objective;
    out.dual_objective = 0.0;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const double mult = it.y(static_cast<Eigen::Index>(i)) * r.objective_scale / r.row_scale[i];
        if (i < nl) {
            out.lower_duals[i] = mult;
            out.psd_dual -= mult * problem.lower[i].matrix;
            out.dual_objective -= mult * problem.lower[i].bound;
        } else {
            out.upper_duals[i - nl] = mult;
            out.psd_dual += mult * problem.upper[i - nl].matrix;
            out.dual_objective += mult * problem.upper[i - nl].bound;
        }
    }
    out.psd_dual = 0.5 * (out.psd_dual + out.psd_dual.adjoint()).eval();
    out.primal_objective = problem.objective_value(out.v);
    out.kkt = final_kkt(r, it.x, it.y);
}

}  // namespace

void HermitianLinearSdp::validate() const
{
    if (dim < 1) {
        throw std::invalid_argument("HermitianLinearSdp: dimension must be positive");
    }
    auto check = [this](const CMatrix& a, const char* what) {
        if (a.rows() != dim || a.cols() != dim) {
            throw std::invalid_argument(std::string("HermitianLinearSdp: ") + what + " has wrong dimension");
        }
        if (!is_hermitian(a)) {
            throw std::invalid_argument(std::string("HermitianLinearSdp: ") + what + " is not Hermitian");
        }
    };
    check(objective, "objective");
    for (const auto& c : lower) {
        check(c.matrix, "lower constraint");
        if (!std::isfinite(c.bound)) {
            throw std::invalid_argument("HermitianLinearSdp: non-finite bound");
        }
    }
    for (const auto& c : upper) {
        check(c.matrix, "upper constraint");
        if (!std::isfinite(c.bound)) {
            throw std::invalid_argument("HermitianLinearSdp: non-finite bound");
        }
    }
    if (upper.empty()) {
        throw std::invalid_argument("HermitianLinearSdp: at least one upper trace bound is required");
    }
}

double HermitianLinearSdp::objective_value(const CMatrix& v) const { return trace_product(objective, v); }

const char* to_string(SdpStatus status)
{
    switch (status) {
    case SdpStatus::optimal:
        return "optimal";
    case SdpStatus::infeasible:
        return "infeasible";
    case SdpStatus::numerical_failure:
        return "numerical-failure";
    }
    return "unknown";
}

SdpSolution solve(const HermitianLinearSdp& problem, const SdpOptions& options,
                  const std::optional<CMatrix>& warm_start)
{
    problem.validate();
    const RealProblem r = normalize(problem);
    const int n = r.n;
    const auto m = static_cast<Eigen::Index>(r.rows.size());
    const double nu = static_cast<double>(n + m);

    double xi = std::max(10.0, std::sqrt(static_cast<double>(n)));
    for (Eigen::Index i = 0; i < m; ++i) {
        xi = std::max(xi, n * (1.0 + std::abs(r.g(i))) / 2.0);
    }
    const double eta = std::max(10.0, std::sqrt(static_cast<double>(n)));

    Iterate it;
    it.x = xi * RMatrix::Identity(n, n);
    if (warm_start) {
        if (warm_start->rows() != problem.dim || warm_start->cols() != problem.dim) {
            throw std::invalid_argument("sdp::solve: warm start has wrong dimension");
        }
        const RMatrix w = embed(*warm_start) / r.x_scale;
        it.x = 0.5 * (w + w.transpose()) + std::max(1.0, w.trace() / n) * RMatrix::Identity(n, n);
    }
    it.z = eta * RMatrix::Identity(n, n);
    it.s = RVector::Constant(m, xi);
    it.y = RVector::Constant(m, eta);

    SdpSolution out;
    Scaling sc;
    int stalls = 0;
    double best_merit = std::numeric_limits<double>::infinity();
    // Near the end the Newton systems lose accuracy and later iterates can be worse.
    Iterate best = it;
    double best_seen = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        out.iterations = iter;
        const Residuals res = residuals(r, it);
        const double merit = std::max({res.rel_primal, res.rel_dual, res.rel_gap});
        if (!std::isfinite(merit)) {
            out.status = SdpStatus::numerical_failure;
            out.message = "non-finite iterate";
            break;
        }
        if (merit < best_seen) {
            best_seen = merit;
            best = it;
        }
        if (merit <= options.tolerance) {
            out.status = SdpStatus::optimal;
            break;
        }
        RVector cert;
        if (has_farkas_certificate(r, it, options.infeasibility_tolerance, cert)) {
            out.status = SdpStatus::infeasible;
            out.message = "primal infeasibility certificate found";
            break;
        }
        if (merit < 0.999 * best_merit) {
            best_merit = merit;
            stalls = 0;
        } else if (++stalls >= 8) {
            out.status = best_seen <= options.acceptable ? SdpStatus::optimal : SdpStatus::numerical_failure;
            out.message = "progress stalled";
            break;
        }
        if (iter == options.max_iterations) {
            out.status = best_seen <= options.acceptable ? SdpStatus::optimal : SdpStatus::numerical_failure;
            out.message = "iteration limit reached";
            break;
        }
        if (!build_scaling(r, it, sc)) {
            out.status = best_seen <= options.acceptable ? SdpStatus::optimal : SdpStatus::numerical_failure;
            out.message = "scaling matrix lost definiteness";
            break;
        }
        const double mu = res.complementarity / nu;

        // Predictor (affine scaling) direction.
        const RMatrix rc_aff = -it.x;
        const RVector rlp_aff = -it.s.cwiseProduct(it.y);
        const Direction aff = refined_direction(r, it, sc, res.rp, res.rd, rc_aff, rlp_aff);
        const Steps aff_max = max_steps(it, sc, aff);
        const double ap = std::min(1.0, aff_max.primal);
        const double ad = std::min(1.0, aff_max.dual);
        const double mu_aff = (inner(it.x + ap * aff.dx, it.z + ad * aff.dz) +
                               (it.s + ap * aff.ds).dot(it.y + ad * aff.dy)) /
                              nu;
        const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

        // Corrector with second-order term, in the NT-scaled space.
        const RMatrix dx_s = sc.p_inv * aff.dx * sc.p_inv.transpose();
        const RMatrix dz_s = sc.p.transpose() * aff.dz * sc.p;
        RMatrix rhs = -0.5 * (dx_s * dz_s + dz_s * dx_s);
        for (int i = 0; i < n; ++i) {
            rhs(i, i) += sigma * mu - sc.lambda(i) * sc.lambda(i);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                rhs(i, j) *= 2.0 / (sc.lambda(i) + sc.lambda(j));
            }
        }
        const RMatrix rc = sc.p * rhs * sc.p.transpose();
        const RVector rlp = RVector::Constant(m, sigma * mu) - it.s.cwiseProduct(it.y) - aff.ds.cwiseProduct(aff.dy);
        const Direction dir = refined_direction(r, it, sc, res.rp, res.rd, rc, rlp);
        const Steps smax = max_steps(it, sc, dir);
        const double gamma = 0.9 + 0.09 * std::min(ap, ad);
        const double step_p = std::min(1.0, gamma * smax.primal);
        const double step_d = std::min(1.0, gamma * smax.dual);

        it.x += step_p * dir.dx;
        it.s += step_p * dir.ds;
        it.z += step_d * dir.dz;
        it.y += step_d * dir.dy;
        it.x = 0.5 * (it.x + it.x.transpose()).eval();
        it.z = 0.5 * (it.z + it.z.transpose()).eval();
    }
    finish(problem, r, out.status == SdpStatus::infeasible ? it : best, out);
    return out;
}

CMatrix reduce_rank(const HermitianLinearSdp& problem, const CMatrix& v, double active_tol)
{
    problem.validate();
    if (v.rows() != problem.dim || v.cols() != problem.dim) {
        throw std::invalid_argument("reduce_rank: point has wrong dimension");
    }
    // Eigenvalues this far below the top are solver noise and are dropped.
    constexpr double kNoise = 1e-10;
    auto factor = [](const CMatrix& m, double floor) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()));
        const RVector& ev = es.eigenvalues();
        const double top = ev.maxCoeff();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) > floor * top) {
                keep.push_back(i);
            }
        }
        CMatrix f(m.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            f.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(keep[k]) * std::sqrt(ev(keep[k]));
        }
        return f;
    };
    if (!(v.trace().real() > 0.0)) {
        return v;
    }

    struct Row {
        const CMatrix* a;
        double bound;
        int sense;  // 0 keep fixed, -1 lower, +1 upper
    };
    std::vector<Row> rows{{&problem.objective, 0.0, 0}};
    for (const auto& c : problem.lower) {
        rows.push_back({&c.matrix, c.bound, -1});
    }
    for (const auto& c : problem.upper) {
        rows.push_back({&c.matrix, c.bound, 1});
    }

    CMatrix b = factor(v, kNoise);
    const int guard = 4 * (problem.dim + static_cast<int>(rows.size()));
    for (int step = 0; step < guard && b.cols() > 1; ++step) {
        const Eigen::Index r = b.cols();
        const Eigen::Index params = r * r;
        std::vector<CMatrix> g;
        std::vector<double> value;
        std::vector<bool> active;
        for (const auto& row : rows) {
            g.push_back(b.adjoint() * (*row.a) * b);
            value.push_back(g.back().trace().real());
            active.push_back(row.sense == 0 ||
                             std::abs(value.back() - row.bound) <= active_tol * (std::abs(row.bound) + std::abs(value.back())));
        }
        // Real coordinates of a Hermitian r x r matrix: diagonal, then Re/Im of the upper triangle.
        std::vector<RVector> coeffs;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            RVector coeff(params);
            Eigen::Index c = 0;
            for (Eigen::Index i = 0; i < r; ++i) {
                coeff(c++) = g[j](i, i).real();
            }
            for (Eigen::Index i = 0; i < r; ++i) {
                for (Eigen::Index l = i + 1; l < r; ++l) {
                    coeff(c++) = 2.0 * g[j](i, l).real();
                    coeff(c++) = 2.0 * g[j](i, l).imag();
                }
            }
            coeffs.push_back(coeff / std::max(coeff.norm(), 1e-300));
        }
        // A direction that keeps the rows in `held` fixed, if there is one.
        auto null_direction = [&](const std::vector<bool>& held) -> std::optional<CMatrix> {
            RMatrix k(0, params);
            for (std::size_t j = 0; j < rows.size(); ++j) {
                if (held[j]) {
                    k.conservativeResize(k.rows() + 1, Eigen::NoChange);
                    k.row(k.rows() - 1) = coeffs[j].transpose();
                }
            }
            Eigen::JacobiSVD<RMatrix> svd(k, Eigen::ComputeFullV);
            const RVector& sv = svd.singularValues();
            if (k.rows() >= params && sv(params - 1) > 1e-12 * sv(0)) {
                return std::nullopt;
            }
            const RVector x = svd.matrixV().col(params - 1);
            CMatrix dir = CMatrix::Zero(r, r);
            Eigen::Index c = 0;
            for (Eigen::Index i = 0; i < r; ++i) {
                dir(i, i) = x(c++);
            }
            for (Eigen::Index i = 0; i < r; ++i) {
                for (Eigen::Index l = i + 1; l < r; ++l) {
                    dir(i, l) = Complex(x(c), x(c + 1));
                    dir(l, i) = Complex(x(c), -x(c + 1));
                    c += 2;
                }
            }
            return dir;
        };
        // Step along +-dir: distance to a zero eigenvalue and to the first inactive bound.
        auto reach = [&](const CMatrix& dir, double sign, double& t_limit) {
            Eigen::SelfAdjointEigenSolver<CMatrix> ed(dir, Eigen::EigenvaluesOnly);
            const double lmin = sign > 0 ? ed.eigenvalues()(0) : -ed.eigenvalues()(r - 1);
            t_limit = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < rows.size(); ++j) {
                if (active[j]) {
                    continue;
                }
                const double d = sign * (g[j] * dir).trace().real();
                if (rows[j].sense < 0 && d < 0.0) {
                    t_limit = std::min(t_limit, (value[j] - rows[j].bound) / -d);
                } else if (rows[j].sense > 0 && d > 0.0) {
                    t_limit = std::min(t_limit, (rows[j].bound - value[j]) / d);
                }
            }
            return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
        };

        // Hold as many inactive rows as possible; a step that reaches lower rank before any
        // inactive bound is taken first.
        std::vector<std::size_t> inactive;
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (!active[j]) {
                inactive.push_back(j);
            }
        }
        const std::size_t n_masks = std::size_t{1} << std::min<std::size_t>(inactive.size(), 10);
        std::vector<std::size_t> masks(n_masks);
        std::iota(masks.begin(), masks.end(), std::size_t{0});
        std::stable_sort(masks.begin(), masks.end(),
                         [](std::size_t a, std::size_t b) { return std::popcount(a) > std::popcount(b); });
        CMatrix dir;
        double t = 0.0;
        std::optional<CMatrix> fallback;
        for (std::size_t mask : masks) {
            std::vector<bool> held = active;
            for (std::size_t i = 0; i < inactive.size() && i < 10; ++i) {
                if (mask & (std::size_t{1} << i)) {
                    held[inactive[i]] = true;
                }
            }
            const std::optional<CMatrix> cand = null_direction(held);
            if (!cand) {
                continue;
            }
            if (!fallback) {
                fallback = cand;
            }
            double lim_plus = 0.0;
            double lim_minus = 0.0;
            const double sing_plus = reach(*cand, 1.0, lim_plus);
            const double sing_minus = reach(*cand, -1.0, lim_minus);
            if (sing_plus <= lim_plus || sing_minus <= lim_minus) {
                const bool plus = sing_plus <= lim_plus && (sing_minus > lim_minus || sing_plus <= sing_minus);
                t = plus ? sing_plus : sing_minus;
                dir = plus ? *cand : CMatrix(-*cand);
                break;
            }
        }
        if (!(t > 0.0)) {
            if (!fallback) {
                break;
            }
            // No rank drop is reachable; grow the active set instead.
            double lim_plus = 0.0;
            double lim_minus = 0.0;
            const double plus = std::min(reach(*fallback, 1.0, lim_plus), lim_plus);
            const double minus = std::min(reach(*fallback, -1.0, lim_minus), lim_minus);
            const bool use_plus = std::isfinite(plus) && (!std::isfinite(minus) || plus >= minus);
            t = use_plus ? plus : minus;
            if (!std::isfinite(t) || !(t > 0.0)) {
                break;
            }
            dir = use_plus ? *fallback : CMatrix(-*fallback);
        }
        const CMatrix m = CMatrix::Identity(r, r) + t * dir;
        b = b * factor(m, 1e-12);
    }
    const CMatrix out = b * b.adjoint();
    return 0.5 * (out + out.adjoint());
}

CMatrix rank_one_optimum(const HermitianLinearSdp& problem, const CMatrix& v, const SdpOptions& options,
                         double rank_tol, double objective_slack, int rounds)
{
    CMatrix best = reduce_rank(problem, v);
    double best_ratio = rank_one_ratio(best);
    if (best_ratio <= rank_tol) {
        return best;
    }
    const double opt = problem.objective_value(v);
    HermitianLinearSdp face = problem;
    face.lower.push_back({problem.objective, 0.0});
    CMatrix cur = best;
    for (int round = 0; round < rounds; ++round) {
        const Eigenpair ep = dominant_eigenpair(cur);
        const CVector q = ep.vector.normalized();
        face.objective = q * q.adjoint() - CMatrix::Identity(problem.dim, problem.dim);
        // The face has almost no interior, so a failed solve is retried cold and then looser.
        SdpSolution sol;
        for (int attempt = 0; attempt < 3; ++attempt) {
            face.lower.back().bound = opt - (attempt < 2 ? 1.0 : 10.0) * objective_slack * std::abs(opt);
            sol = attempt == 0 ? solve(face, options, cur) : solve(face, options);
            if (sol.status == SdpStatus::optimal) {
                break;
            }
        }
        if (sol.status != SdpStatus::optimal) {
            break;
        }
        cur = reduce_rank(face, sol.v);
        const double ratio = rank_one_ratio(cur);
        if (ratio < best_ratio) {
            best = cur;
            best_ratio = ratio;
        }
        if (best_ratio <= rank_tol) {
            break;
        }
    }
    return best;
}

double rank_one_ratio(const CMatrix& v)
{
    if (v.rows() < 2) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v, Eigen::EigenvaluesOnly);
    const RVector& ev = es.eigenvalues();
    const double l1 = ev(ev.size() - 1);
    if (!(l1 > 0.0)) {
        return 0.0;
    }
    return std::max(0.0, ev(ev.size() - 2)) / l1;
}

Eigenpair dominant_eigenpair(const CMatrix& v)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(v);
    const Eigen::Index last = v.rows() - 1;
    return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

namespace {

void write_matrix(std::ostream& out, const CMatrix& a)
{
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out << (j ? " " : "") << a(i, j).real() << ' ' << a(i, j).imag();
        }
        out << '\n';
    }
}

CMatrix read_matrix(std::istream& in, int dim)
{
    CMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            double re = 0.0;
            double im = 0.0;
            if (!(in >> re >> im)) {
                throw std::runtime_error("read_problem: truncated matrix");
            }
            a(i, j) = Complex(re, im);
        }
    }
    return a;
}

}  // namespace

void write_problem(std::ostream& out, const HermitianLinearSdp& problem)
{
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(17);
    out << "isapt-sdp 1 " << problem.dim << '\n';
    out << "objective\n";
    write_matrix(out, problem.objective);
    for (const auto& c : problem.lower) {
        out << "lower " << c.bound << '\n';
        write_matrix(out, c.matrix);
    }
    for (const auto& c : problem.upper) {
        out << "upper " << c.bound << '\n';
        write_matrix(out, c.matrix);
    }
    out << "end\n";
    out.flags(flags);
    out.precision(prec);
}

HermitianLinearSdp read_problem(std::istream& in)
{
    std::string magic;
    int version = 0;
    HermitianLinearSdp p;
    if (!(in >> magic >> version >> p.dim) || magic != "isapt-sdp" || version != 1 || p.dim < 1) {
        throw std::runtime_error("read_problem: bad header");
    }
    std::string tag;
    bool have_objective = false;
    while (in >> tag) {
        if (tag == "end") {
            if (!have_objective) {
                throw std::runtime_error("read_problem: missing objective");
            }
            return p;
        }
        if (tag == "objective") {
            p.objective = read_matrix(in, p.dim);
            have_objective = true;
        } else if (tag == "lower" || tag == "upper") {
            TraceConstraint c;
            if (!(in >> c.bound)) {
                throw std::runtime_error("read_problem: missing bound");
            }
            c.matrix = read_matrix(in, p.dim);
            (tag == "lower" ? p.lower : p.upper).push_back(std::move(c));
        } else {
            throw std::runtime_error("read_problem: unknown block '" + tag + "'");
        }
    }
    throw std::runtime_error("read_problem: missing 'end'");
}

}  // namespace isapt::sdp
