#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hallkit/fit.hpp"
#include "hallkit/fock.hpp"

namespace hallkit {

// J~_{alpha,p}: alpha = 0 density, 1 or 2 current, color_observable(c) colored density.
struct Observable {
    int alpha = 1;
    Coeff p{0, 0};
};

enum class Provenance { lehmann, time_integral_oracle };

struct CorrelatorResult {
    Complex value{0.0, 0.0};
    double omega = 0.0;
    Coeff p{0, 0};
    bool per_site = true;  // carries the 1/(beta L^2) normalization
    Provenance provenance = Provenance::lehmann;
};

// Gibbs state of H - mu N on the L x L torus from full spectra, with operator cache.
class FiniteTemperatureResponse {
public:
    FiniteTemperatureResponse(const HoppingModel& model, int L, double beta,
                              const NumericPolicy& policy = default_policy());

    const TorusSystem& torus() const { return ts_; }
    double beta() const { return beta_; }
    const ManyBodyOperator& hamiltonian() const { return H_; }
    const GibbsEnsemble& ensemble() const { return *ensemble_; }
    const NumericPolicy& policy() const { return policy_; }

    // J~_{alpha,p} on all sectors, built once.
    const ManyBodyOperator& observable(int alpha, const Coeff& p) const;

    // (1/L^2) int_0^beta dt e^{-i omega t} <T A(t); B(0)>; omega bosonic Matsubara.
    Complex correlator(const ManyBodyOperator& A, const ManyBodyOperator& B, double omega) const;
    // Same integral by quadrature of Tr(e^{-(beta-t)K} A e^{-tK} B)/Z with matrix exponentials.
    Complex correlator_oracle(const ManyBodyOperator& A, const ManyBodyOperator& B, double omega,
                              int nodes_per_unit = 24) const;

    // K^_{a1,a2}(omega, p) with J~_{a1,p} and J~_{a2,-p}
    CorrelatorResult matsubara_correlator(int alpha1, int alpha2, const Coeff& p, double omega,
                                          bool oracle = false) const;

    Complex expectation(const ManyBodyOperator& op) const { return ensemble_->expectation(op); }

private:
    TorusSystem ts_;
    double beta_;
    NumericPolicy policy_;
    ManyBodyOperator H_;
    std::unique_ptr<GibbsEnsemble> ensemble_;
    mutable std::map<std::pair<int, std::pair<int, int>>, ManyBodyOperator> cache_;
    mutable std::mutex cache_mutex_;
};

// Ward identity residual i omega K_{0,a2} + sum_i p_i K_{i,a2} - (1/L^2)<[J~_{0,p}, J~_{a2,-p}]>.
Complex ward_residual(const FiniteTemperatureResponse& r, const Coeff& p, int alpha2, double omega,
                      bool oracle = false);
// <[J~_{0,p}, J~_{a2,-p}]>/L^2
Complex schwinger_term(const FiniteTemperatureResponse& r, const Coeff& p, int alpha2);

struct WardReport {
    double max_residual = 0.0;
    Coeff worst_p{0, 0};
    int worst_alpha = 0;
    double worst_omega = 0.0;
    int evaluations = 0;
};
// Every grid p, alpha2 in {0, 1, 2, colors}, omega = 2 pi n / beta for n = 0..n_freq-1.
WardReport ward_check(const FiniteTemperatureResponse& r, int n_freq, bool oracle = false);

struct SigmaMatrix {
    Eigen::Matrix2d value = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d error = Eigen::Matrix2d::Zero();
    bool flagged = false;
    std::string note;
};

// -(1/A)[K_ij(w) - K_ij(0)]/w over the first n_omega positive Matsubara frequencies, extrapolated to 0.
SigmaMatrix sigma_imaginary(const FiniteTemperatureResponse& r, int n_omega = 4, bool oracle = false);

// |K_ij(0,0) + <D_ij>/L^2| maximized over i, j
double sum_rule_deviation(const FiniteTemperatureResponse& r);

enum class ZeroTMode { automatic, full, resolvent };

// Unique gapped ground state of H - mu N; Lehmann sums in the ground sector either from a full
// spectrum or through resolvent solves.
class ZeroTemperatureResponse {
public:
    ZeroTemperatureResponse(const HoppingModel& model, int L, ZeroTMode mode = ZeroTMode::automatic,
                            const NumericPolicy& policy = default_policy(), std::vector<int> sectors = {});

    const TorusSystem& torus() const { return ts_; }
    const GroundState& ground() const { return gs_; }
    ZeroTMode mode() const { return mode_; }
    double excitation_gap() const { return gap_; }  // lowest excitation within the ground sector
    const ManyBodyOperator& current(int i) const { return J_[i - 1]; }

    // K^_ij(omega, 0) at real omega >= 0
    Complex correlator(int i, int j, double omega) const;
    // I_ij(omega) = int_{-inf}^0 e^{omega t} <[J_i(t), J_j]> dt, J(t) = e^{iHt} J e^{-iHt}, in closed form
    Complex real_time_integral(int i, int j, double omega) const;
    // Same integral by Gauss-Legendre panels over propagated states, e^{iHt} from a dense matrix
    // exponential; needs omega > 0 and a ground sector within policy.full_dim_max.
    Complex real_time_quadrature(int i, int j, double omega, double panel = 1.0, int nodes = 16) const;
    Complex diamagnetic(int i, int j) const;  // <0|D_ij|0>

    Eigen::Matrix2d sigma_imaginary() const;  // -(1/A) dK/domega at 0
    Eigen::Matrix2d sigma_real() const;       // (1/(A L^2)) i I'(0)
    double sum_rule_deviation() const;        // max |K_ij(0) + <D_ij>/L^2|
    double wick_rotation_deviation(const std::vector<double>& omegas) const;

private:
    CVector resolvent(const CVector& rhs, double omega) const;  // Q (H - E0 + i omega)^{-1} Q rhs
    CVector solve_shifted(const CVector& rhs) const;            // Q (H - E0)^{-1} Q rhs

    TorusSystem ts_;
    NumericPolicy policy_;
    ZeroTMode mode_;
    ManyBodyOperator H_;
    GroundState gs_;
    double gap_ = 0.0;
    ManyBodyOperator J_[2];
    CVector Jpsi_[2];
    // full mode
    RVector excitations_;  // E_n - E_0, n >= 1
    CMatrix elements_;     // <n|J_i|0>, columns i = 0, 1
    // resolvent mode
    CVector x_[2];
};

struct CGResult {
    CVector x;
    double relative_residual = 0.0;
    int iterations = 0;
};
// Conjugate gradients for a Hermitian positive definite operator, x0 = 0.
CGResult conjugate_gradient(const std::function<CVector(const CVector&)>& apply, const CVector& rhs, double tol,
                            int max_iterations = 5000);

// Zero-temperature sigma-bar_12 of a Slater determinant from single-particle levels on the torus.
double free_sigma_zero_t(const HoppingModel& model, int L, const NumericPolicy& policy = default_policy());

// Hartree particle-hole point: mu = U sum_b v_ab for a model with uniform coordination.
double hartree_chemical_potential(const HoppingModel& model, double U);

struct UniversalityRow {
    double U = 0.0;
    int L = 0;
    std::string mode;  // "0T" or "beta=..."
    double sigma12 = 0.0;
    double delta_sigma12 = 0.0;
    double gap = 0.0;
    std::string flags;
};
struct UniversalityOptions {
    bool hartree_mu = true;
    double beta = 0.0;  // 0 means zero temperature
    double u_window = 1.0;
};
std::vector<UniversalityRow> universality_scan(const HoppingModel& base, const std::vector<double>& U_list,
                                               const std::vector<int>& L_list, const UniversalityOptions& options = {},
                                               const NumericPolicy& policy = default_policy());

// 5-point central difference of sigma-bar_12 in U at fixed mu, finite beta, from full spectra.
SigmaEstimate sigma_derivative_in_U(const HoppingModel& model, int L, double beta, double h = 1e-3,
                                    int n_omega = 4, const NumericPolicy& policy = default_policy());

}  // namespace hallkit
