#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>

namespace adiabatic {

using cx_double = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cx_double I_unit{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

/// max_ij |M_ij - conj(M_ji)|
inline double hermiticity_defect(const Matrix& m)
{
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline double anti_hermiticity_defect(const Matrix& m)
{
    return (m + m.adjoint()).cwiseAbs().maxCoeff();
}

inline Matrix symmetrize(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

inline bool all_finite(const Matrix& m)
{
    return m.allFinite();
}

inline double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace adiabatic
