#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Sparse>

#include "hallkit/torus.hpp"

namespace hallkit {

using SparseC = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

// Occupation bitstrings with popcount N over n modes, ascending.
class FockBasis {
public:
    FockBasis(int n_modes, int N);

    int n_modes() const { return n_modes_; }
    int particles() const { return N_; }
    long dim() const { return static_cast<long>(states_.size()); }
    const std::vector<std::uint64_t>& states() const { return states_; }
    std::uint64_t state(long i) const { return states_[static_cast<size_t>(i)]; }
    long index(std::uint64_t s) const;  // -1 if absent

private:
    int n_modes_;
    int N_;
    std::vector<std::uint64_t> states_;
};

std::vector<int> all_sectors(int n_modes);

struct ManyBodyOperator {
    int n_modes = 0;
    std::map<int, SparseC> sectors;
    bool hermitian = false;

    const SparseC& sector(int N) const;
    bool has_sector(int N) const { return sectors.count(N) != 0; }
    CVector apply(int N, const CVector& v) const { return sector(N) * v; }
};

ManyBodyOperator quadratic_operator(const CMatrix& kernel, const std::vector<int>& sectors, bool hermitian,
                                    const NumericPolicy& policy = default_policy());
ManyBodyOperator density_density_operator(const RMatrix& v, const std::vector<int>& sectors,
                                          const NumericPolicy& policy = default_policy());
ManyBodyOperator number_operator(int n_modes, const std::vector<int>& sectors);

ManyBodyOperator operator+(const ManyBodyOperator& a, const ManyBodyOperator& b);
ManyBodyOperator operator*(Complex s, const ManyBodyOperator& a);
ManyBodyOperator commutator(const ManyBodyOperator& a, const ManyBodyOperator& b);
ManyBodyOperator adjoint(const ManyBodyOperator& a);
// max over sectors of the largest |entry| of a - b
double max_abs_difference(const ManyBodyOperator& a, const ManyBodyOperator& b);
double hermiticity_defect(const ManyBodyOperator& a);

// Guards: L^2 |I| <= policy.max_modes.  sectors empty means all.
void check_mode_guard(const TorusSystem& ts, const NumericPolicy& policy);

ManyBodyOperator build_hamiltonian(const TorusSystem& ts, const std::vector<int>& sectors = {},
                                   const NumericPolicy& policy = default_policy());
ManyBodyOperator build_hamiltonian(const HoppingModel& model, int L, const std::vector<int>& sectors = {},
                                   const NumericPolicy& policy = default_policy());
ManyBodyOperator bond_current(const TorusSystem& ts, const Coeff& x, int sigma, const Coeff& y, int sigma_p,
                              const std::vector<int>& sectors = {});
ManyBodyOperator total_current(const TorusSystem& ts, int i, const std::vector<int>& sectors = {});
ManyBodyOperator momentum_current(const TorusSystem& ts, int alpha, const Coeff& p,
                                  const std::vector<int>& sectors = {});
ManyBodyOperator diamagnetic_operator(const TorusSystem& ts, int i, int j, const std::vector<int>& sectors = {});

enum class EigenMode { full, ground };

struct Spectrum {
    int N = 0;
    RVector values;        // ascending; ground mode holds one value
    CMatrix vectors;       // columns
    double degeneracy_gap = 0.0;  // E1 - E0
    double residual = 0.0;        // ||H v - E v|| of the ground vector
};

// shift is added to the diagonal (used for -mu N).  Ground mode throws on a degenerate lowest level
// unless require_unique is false.
Spectrum eigensolve(const ManyBodyOperator& op, int N, EigenMode mode, double shift = 0.0,
                    const NumericPolicy& policy = default_policy(), bool require_unique = true);

// Gibbs state of H - mu N over the listed sectors (all by default), from full spectra.
class GibbsEnsemble {
public:
    GibbsEnsemble(const ManyBodyOperator& H, double mu, double beta, const NumericPolicy& policy = default_policy());

    double beta() const { return beta_; }
    const std::vector<int>& sectors() const { return sectors_; }
    const Spectrum& spectrum(int N) const { return spectra_.at(N); }
    const RVector& weights(int N) const { return weights_.at(N); }
    const RVector& energies(int N) const { return energies_.at(N); }  // E - mu N
    Complex expectation(const ManyBodyOperator& op) const;

private:
    double beta_;
    std::vector<int> sectors_;
    std::map<int, Spectrum> spectra_;
    std::map<int, RVector> energies_;
    std::map<int, RVector> weights_;
};

Complex gibbs_expectation(const ManyBodyOperator& op, const HoppingModel& model, int L, double beta,
                          const NumericPolicy& policy = default_policy());

struct GroundState {
    int N = 0;
    double energy = 0.0;   // E - mu N
    CVector vector;
    double degeneracy_gap = 0.0;
    double residual = 0.0;
    std::map<int, double> sector_minima;  // E - mu N per searched sector
};

// Lowest state of H - mu N among the given sectors.
GroundState find_ground_state(const ManyBodyOperator& H, double mu, const std::vector<int>& sectors,
                              const NumericPolicy& policy = default_policy());

// Sectors N0-1, N0, N0+1 around the non-interacting filling of levels below mu.
std::vector<int> candidate_sectors(const TorusSystem& ts);

// Lowest eigenpair of a Hermitian operator given by its action, orthogonal to deflate.
struct LanczosResult {
    double value = 0.0;
    CVector vector;
    double residual = 0.0;
    int iterations = 0;
};
LanczosResult lanczos_lowest(const std::function<CVector(const CVector&)>& apply, long dim,
                             const std::vector<CVector>& deflate, double tol, int max_krylov = 160,
                             int max_restarts = 60);

}  // namespace hallkit
