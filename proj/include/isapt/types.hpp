#pragma once

#include <complex>

#include <Eigen/Dense>

namespace isapt {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299'792'458.0;

inline constexpr double kPi = 3.14159265358979323846;

/// P[W] = 10^((P[dBm] - 30) / 10)
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Rank-one Hermitian outer product x x^H.
inline CMatrix outer(const CVector& x) { return x * x.adjoint(); }

/// Real part of Tr{A B} for Hermitian A, B, without forming the product.
inline double trace_product(const CMatrix& a, const CMatrix& b)
{
    // Tr{A B} = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B.
    return (a.array() * b.conjugate().array()).sum().real();
}

}  // namespace isapt
