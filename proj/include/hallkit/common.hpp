#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hallkit {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Coeff = Eigen::Vector2i;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

// Bad input: malformed model, unknown color, broken invariant.  CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Refusal on numerical grounds: gapless, degenerate ground state, size guard.  CLI exit code 3.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NumericPolicy {
    double geometry_tol = 1e-12;
    double hermitian_tol = 1e-12;
    double gap_threshold = 1e-6;
    double fermi_level_tol = 1e-9;
    double critical_band = 0.05;      // full width, mass units
    double drop_tol = 1e-14;
    double degeneracy_tol = 1e-8;
    double eigen_residual_tol = 1e-10;
    double solver_tol = 1e-10;
    double fit_residual_tol = 1e-3;
    int max_modes = 24;
    long full_dim_max = 4096;
    long ground_dim_max = 1L << 20;
    long gibbs_dim_max = 1L << 16;
    int wick_monomials_max = 5;
    int wick_bilinears_max = 8;
};

inline const NumericPolicy& default_policy()
{
    static const NumericPolicy p{};
    return p;
}

}  // namespace hallkit
