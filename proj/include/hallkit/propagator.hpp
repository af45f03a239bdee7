#pragma once

#include <vector>

#include "hallkit/fit.hpp"
#include "hallkit/torus.hpp"

namespace hallkit {

// Smooth even bump: 1 on |t| <= 1, 0 on |t| >= 2, C-infinity and monotone in between.
struct CutoffFunction {
    double operator()(double t) const;
};
double chi0(double t);

enum class TimeBranch { minus, plus };

// g(t, x) = <T psi-_{(t,x)} psi+_{(0,0)}>_0 as an |I| x |I| matrix, from the momentum sum on the
// L x L torus.  t = 0 is the 0- branch unless at_zero says otherwise.
CMatrix propagator(const HoppingModel& model, double beta, int L, double t, const Coeff& x,
                   TimeBranch at_zero = TimeBranch::minus);

// (-i k0 + H(k) - mu)^{-1}
CMatrix matsubara_propagator(const HoppingModel& model, double k0, const Vec2& k);

// Free propagator on all torus modes, G(tau)_ab = <T psi-_a(tau) psi+_b>, built from ts.h - mu.
class TorusPropagator {
public:
    TorusPropagator(const TorusSystem& ts, double beta);

    double beta() const { return beta_; }
    CMatrix operator()(double tau, TimeBranch at_zero = TimeBranch::minus) const;
    const RVector& levels() const { return levels_; }  // eigenvalues of h - mu
    const CMatrix& modes() const { return vectors_; }
    RVector occupations() const;

private:
    double beta_;
    RVector levels_;
    CMatrix vectors_;
};

// Fermi factor 1/(1+e^{beta e}) and e^{-s e}/(1+e^{-beta e}), both without overflow.
double fermi(double beta, double e);
double propagator_kernel(double s, double beta, double e);

// Scales of the Matsubara cutoff: f_0 = chi0(k0/delta), f_h = chi0(2^-h k0/delta) - chi0(2^-h+1 k0/delta),
// with delta the spectral gap at mu.  Sums run over k0 in (2pi/beta)(Z + 1/2) with |k0| < 2^(M+1) delta.
class ScaleDecomposition {
public:
    ScaleDecomposition(const HoppingModel& model, double beta, int L, int M,
                       const NumericPolicy& policy = default_policy());

    double delta() const { return delta_; }
    int scales() const { return M_; }
    double beta() const { return beta_; }
    int L() const { return L_; }
    const std::vector<double>& frequencies() const { return k0_; }

    double f(int h, double k0) const;
    // single-scale g^(h)(t, x) and the regularized g^{beta,L,M}(t, x) = sum_h g^(h)
    CMatrix single_scale(int h, double t, const Coeff& x) const;
    CMatrix regularized(double t, const Coeff& x) const;

    struct GramPair {
        CVector A;
        CVector B;
    };
    // Vectors over (k0, k, color) with <A_{(t,x),s1}, B_{(t',y),s2}> = g^(h)_{s1 s2}(t - t', x - y).
    GramPair gram_factors(int h, double t, const Coeff& x, int sigma) const;

private:
    CMatrix weighted_sum(const std::vector<double>& weight, double t, const Coeff& x) const;

    HoppingModel model_;
    double beta_;
    int L_;
    int M_;
    double delta_;
    std::vector<double> k0_;
    std::vector<MomentumPoint> grid_;
    std::vector<RVector> energies_;  // H(k) - mu
    std::vector<CMatrix> vectors_;
};

// psi+ kernel psi- at imaginary time t on torus modes.
struct WickBilinear {
    double t = 0.0;
    CMatrix kernel;
};
// Product of bilinears at one time, in the written order (a density n_a n_b is two bilinears).
using WickMonomial = std::vector<WickBilinear>;

// Free expectation <T prod_i m_i>_0 summed over all pairings.
Complex full_wick(const std::vector<WickMonomial>& monomials, const TorusPropagator& G,
                  const NumericPolicy& policy = default_policy());
// Cumulant <T m_1; ...; m_n>_0: only pairings whose graph connects every monomial.
Complex truncated_wick(const std::vector<WickMonomial>& monomials, const TorusPropagator& G,
                       const NumericPolicy& policy = default_policy());
// Cumulant from the moment-cumulant formula over set partitions, using full_wick on each block.
Complex cumulant_from_moments(const std::vector<WickMonomial>& monomials, const TorusPropagator& G,
                              const NumericPolicy& policy = default_policy());

// (1/L^2) int_0^beta dt e^{-i omega t} <T A(t); B(0)>_0 for quadratic A, B, in closed form.
Complex free_matsubara_correlator(const TorusSystem& ts, double beta, const CMatrix& A, const CMatrix& B,
                                  double omega);

// First-order coefficient of the current-current correlator,
// K1(omega) = (1/L^2) int dt e^{-i omega t} int ds <T J_i(t); J_j(0); V(s)>_0, so K = K0 - U K1 + O(U^2).
struct FirstOrderOptions {
    double panel = 1.0;
    int nodes = 16;
    int max_L = 4;
    double max_beta = 20.0;
};
Complex first_order_kernel(const HoppingModel& model, int L, double beta, int i, int j, double omega,
                           const FirstOrderOptions& options = {});
std::vector<Complex> first_order_kernel(const HoppingModel& model, int L, double beta, int i, int j,
                                        const std::vector<double>& omegas, const FirstOrderOptions& options = {});

// sigma^(1)_12 from the same small-omega fit used for sigma-bar; the first n_omega positive Matsubara frequencies.
SigmaEstimate perturbative_sigma_first_order(const HoppingModel& model, double beta, int L, int n_omega = 4,
                                             const FirstOrderOptions& options = {},
                                             const NumericPolicy& policy = default_policy());

// Infinite-volume, zero-temperature, U = 0 correlator K^_{a1,a2}((omega, p)) with continuous p,
// from an N x N Brillouin-zone quadrature.  Observable labels as on the torus; currents use the
// unreduced bond displacement.
Complex free_continuum_correlator(const HoppingModel& model, int alpha1, int alpha2, double omega, const Vec2& p,
                                  int grid, const NumericPolicy& policy = default_policy());

// |K^_{j,sigma}((omega,0)) + i omega dK^_{0,sigma}/dp_j((omega,0))|, central difference of step h in p_j.
double corollary_one_residual(const HoppingModel& model, int j, int color, double omega, int grid, double h = 1e-4,
                              const NumericPolicy& policy = default_policy());

}  // namespace hallkit
