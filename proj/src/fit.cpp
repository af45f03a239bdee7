#include "hallkit/fit.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace hallkit {

namespace {

double polyfit_at_zero(const std::vector<double>& x, const std::vector<double>& y, int degree)
{
    const long n = static_cast<long>(x.size());
    RMatrix V(n, degree + 1);
    RVector b(n);
    for (long i = 0; i < n; ++i) {
        for (int p = 0; p <= degree; ++p) V(i, p) = std::pow(x[i], p);
        b(i) = y[i];
    }
    return V.colPivHouseholderQr().solve(b)(0);
}

struct GaussLegendre {
    RVector nodes;
    RVector weights;
};

GaussLegendre golub_welsch(int n)
{
    RVector d = RVector::Zero(n), e(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) e(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    GaussLegendre gl;
    gl.nodes = es.eigenvalues();
    gl.weights = 2.0 * es.eigenvectors().row(0).array().square().transpose();
    return gl;
}

}  // namespace

SigmaEstimate extrapolate_to_zero(const std::vector<double>& omegas, const std::vector<double>& slopes,
                                  const NumericPolicy& policy)
{
    if (omegas.size() < 3 || omegas.size() != slopes.size())
        throw ValidationError("small-omega fit needs at least three frequencies");
    SigmaEstimate out;
    out.omegas = omegas;
    out.slopes = slopes;
    out.value = polyfit_at_zero(omegas, slopes, 2);
    out.error = std::abs(out.value - polyfit_at_zero(omegas, slopes, 1));
    out.flagged = out.error > policy.fit_residual_tol;
    return out;
}

std::vector<double> bosonic_frequencies(double beta, int n)
{
    std::vector<double> w;
    for (int m = 1; m <= n; ++m) w.push_back(2.0 * kPi * m / beta);
    return w;
}

std::vector<double> gauss_legendre_nodes(int n)
{
    const RVector x = golub_welsch(n).nodes;
    return {x.data(), x.data() + x.size()};
}

std::vector<double> gauss_legendre_weights(int n)
{
    const RVector w = golub_welsch(n).weights;
    return {w.data(), w.data() + w.size()};
}

}  // namespace hallkit
