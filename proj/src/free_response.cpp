#include <cmath>
#include <vector>

#include "hallkit/lattice.hpp"
#include "hallkit/parallel.hpp"
#include "hallkit/propagator.hpp"

namespace hallkit {

namespace {

// F^(q) = sum_d e^{-iq.d} F(d; p) for psi+_{x,s} F_{s s'}(x - y) psi-_{y,s'} times e^{-ip.x}
CMatrix vertex(const HoppingModel& m, int alpha, const Vec2& p, const Vec2& q)
{
    const int nc = m.spec.num_colors();
    CMatrix F = CMatrix::Zero(nc, nc);
    if (alpha == kDensity) {
        for (int s = 0; s < nc; ++s) F(s, s) = std::exp(-kI * p.dot(m.spec.displacements[s]));
        return F;
    }
    if (alpha >= 3) {
        if (alpha - 3 >= nc) throw ValidationError("observable refers to an unknown color");
        F(alpha - 3, alpha - 3) = 1.0;
        return F;
    }
    if (alpha != 1 && alpha != 2) throw ValidationError("observable index must be 0, 1, 2 or a color");
    const int i = alpha - 1;
    for (const Hopping& h : m.hoppings) {
        const Vec2 d = m.spec.to_cartesian(h.d);
        const Vec2 D = m.spec.displacements[h.to] - m.spec.displacements[h.from] - d;
        if (D.isZero()) continue;
        const Complex term = 0.5 * kI * h.amplitude * D(i) *
                             (std::exp(-kI * p.dot(m.spec.displacements[h.from])) * eta(p.dot(D), false) +
                              std::exp(-kI * p.dot(m.spec.displacements[h.to] - d)) * eta(-p.dot(D), false));
        F(h.from, h.to) += std::exp(-kI * q.dot(d)) * term;
    }
    return F;
}

}  // namespace

Complex free_continuum_correlator(const HoppingModel& model, int alpha1, int alpha2, double omega, const Vec2& p,
                                  int grid, const NumericPolicy& policy)
{
    if (grid < 2) throw ValidationError("quadrature grid must be at least 2");
    if (omega == 0.0 && p.isZero()) throw ValidationError("omega = 0 at p = 0 needs the truncated static limit");
    const auto [G1, G2] = reciprocal_basis(model.spec);
    const long n = static_cast<long>(grid) * grid;
    std::vector<Complex> part(n);
    parallel_for(n, [&](long idx) {
        const Vec2 k = (double(idx / grid) / grid) * G1 + (double(idx % grid) / grid) * G2;
        const Vec2 kp = k + p;
        // psi-_x = (1/L) sum_k e^{ik.x} c_k makes the one-body block sum_d e^{-ik.d} H(d)
        Eigen::SelfAdjointEigenSolver<CMatrix> e0(bloch_hamiltonian(model, -k)), e1(bloch_hamiltonian(model, -kp));
        const RVector ea = e0.eigenvalues().array() - model.mu, eb = e1.eigenvalues().array() - model.mu;
        if ((ea.array().abs() < policy.gap_threshold).any() || (eb.array().abs() < policy.gap_threshold).any())
            throw GuardError("Fermi level on a band");
        const CMatrix At = e0.eigenvectors().adjoint() * vertex(model, alpha1, p, kp) * e1.eigenvectors();
        const CMatrix Bt = e1.eigenvectors().adjoint() * vertex(model, alpha2, -p, k) * e0.eigenvectors();
        Complex s = 0.0;
        for (long a = 0; a < ea.size(); ++a)
            for (long b = 0; b < eb.size(); ++b) {
                const double fa = ea(a) < 0.0 ? 1.0 : 0.0, fb = eb(b) < 0.0 ? 1.0 : 0.0;
                if (fa == fb) continue;
                s += At(a, b) * Bt(b, a) * (fa - fb) / Complex(eb(b) - ea(a), omega);
            }
        part[idx] = s;
    });
    Complex sum = 0.0;
    for (const Complex& c : part) sum += c;
    return sum / double(n);
}

double corollary_one_residual(const HoppingModel& model, int j, int color, double omega, int grid, double h,
                              const NumericPolicy& policy)
{
    if (j != 1 && j != 2) throw ValidationError("direction must be 1 or 2");
    const int sigma = 3 + color;
    const Complex lhs = free_continuum_correlator(model, j, sigma, omega, Vec2::Zero(), grid, policy);
    Vec2 e = Vec2::Zero();
    e(j - 1) = h;
    const Complex dK = (free_continuum_correlator(model, kDensity, sigma, omega, e, grid, policy) -
                        free_continuum_correlator(model, kDensity, sigma, omega, -e, grid, policy)) /
                       (2.0 * h);
    return std::abs(lhs + kI * omega * dK);
}

}  // namespace hallkit
