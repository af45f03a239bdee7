#include "hallkit/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <iostream>
#include <random>

#include <Eigen/Eigenvalues>

namespace hallkit {

namespace {

using Triplet = Eigen::Triplet<Complex>;

inline int parity_below(std::uint64_t s, int m)
{
    return std::popcount(s & ((std::uint64_t(1) << m) - 1)) & 1;
}

std::vector<int> resolve(const std::vector<int>& sectors, int n_modes)
{
    return sectors.empty() ? all_sectors(n_modes) : sectors;
}

SparseC from_triplets(long dim, const std::vector<Triplet>& t, double drop_tol)
{
    SparseC M(dim, dim);
    M.setFromTriplets(t.begin(), t.end());
    M.prune([drop_tol](const Eigen::Index&, const Eigen::Index&, const Complex& v) { return std::abs(v) > drop_tol; });
    M.makeCompressed();
    return M;
}

CVector random_start(long dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(dim);
    for (long i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    return v.normalized();
}

void project_out(CVector& w, const std::vector<CVector>& basis)
{
    for (const auto& b : basis) w -= b * b.dot(w);
}

}  // namespace

FockBasis::FockBasis(int n_modes, int N) : n_modes_(n_modes), N_(N)
{
    if (n_modes < 0 || n_modes > 62) throw GuardError("Fock space supports at most 62 modes");
    if (N < 0 || N > n_modes) throw ValidationError("particle number outside [0, modes]");
    if (N == 0) {
        states_.push_back(0);
        return;
    }
    const std::uint64_t limit = std::uint64_t(1) << n_modes;
    std::uint64_t s = (std::uint64_t(1) << N) - 1;
    while (s < limit) {
        states_.push_back(s);
        const std::uint64_t c = s & (~s + 1);
        const std::uint64_t r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
}

long FockBasis::index(std::uint64_t s) const
{
    auto it = std::lower_bound(states_.begin(), states_.end(), s);
    if (it == states_.end() || *it != s) return -1;
    return static_cast<long>(it - states_.begin());
}

std::vector<int> all_sectors(int n_modes)
{
    std::vector<int> out(static_cast<size_t>(n_modes) + 1);
    for (int N = 0; N <= n_modes; ++N) out[N] = N;
    return out;
}

const SparseC& ManyBodyOperator::sector(int N) const
{
    auto it = sectors.find(N);
    if (it == sectors.end()) throw ValidationError("operator was not built on sector N=" + std::to_string(N));
    return it->second;
}

ManyBodyOperator quadratic_operator(const CMatrix& kernel, const std::vector<int>& sectors, bool hermitian,
                                    const NumericPolicy& policy)
{
    const int n = static_cast<int>(kernel.rows());
    struct Entry {
        int a, b;
        Complex m;
    };
    std::vector<Entry> entries;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (kernel(a, b) != Complex(0.0)) entries.push_back({a, b, kernel(a, b)});

    ManyBodyOperator op;
    op.n_modes = n;
    op.hermitian = hermitian;
    for (int N : resolve(sectors, n)) {
        const FockBasis basis(n, N);
        std::vector<Triplet> t;
        t.reserve(static_cast<size_t>(basis.dim()) * std::min<size_t>(entries.size(), 64));
        for (long col = 0; col < basis.dim(); ++col) {
            const std::uint64_t s = basis.state(col);
            for (const auto& e : entries) {
                const std::uint64_t bb = std::uint64_t(1) << e.b, ab = std::uint64_t(1) << e.a;
                if (!(s & bb)) continue;
                if (e.a == e.b) {
                    t.emplace_back(col, col, e.m);
                    continue;
                }
                const std::uint64_t s1 = s ^ bb;
                if (s1 & ab) continue;
                const int sign = parity_below(s, e.b) ^ parity_below(s1, e.a);
                const std::uint64_t s2 = s1 | ab;
                t.emplace_back(basis.index(s2), col, sign ? -e.m : e.m);
            }
        }
        op.sectors.emplace(N, from_triplets(basis.dim(), t, policy.drop_tol));
    }
    return op;
}

ManyBodyOperator density_density_operator(const RMatrix& v, const std::vector<int>& sectors,
                                          const NumericPolicy& policy)
{
    const int n = static_cast<int>(v.rows());
    ManyBodyOperator op;
    op.n_modes = n;
    op.hermitian = true;
    for (int N : resolve(sectors, n)) {
        const FockBasis basis(n, N);
        std::vector<Triplet> t;
        t.reserve(static_cast<size_t>(basis.dim()));
        for (long i = 0; i < basis.dim(); ++i) {
            const std::uint64_t s = basis.state(i);
            double e = 0.0;
            for (int a = 0; a < n; ++a) {
                if (!(s >> a & 1)) continue;
                for (int b = 0; b < n; ++b)
                    if (s >> b & 1) e += v(a, b);
            }
            t.emplace_back(i, i, e);
        }
        op.sectors.emplace(N, from_triplets(basis.dim(), t, policy.drop_tol));
    }
    return op;
}

ManyBodyOperator number_operator(int n_modes, const std::vector<int>& sectors)
{
    ManyBodyOperator op;
    op.n_modes = n_modes;
    op.hermitian = true;
    for (int N : resolve(sectors, n_modes)) {
        const FockBasis basis(n_modes, N);
        SparseC M(basis.dim(), basis.dim());
        M.setIdentity();
        op.sectors.emplace(N, Complex(N) * M);
    }
    return op;
}

ManyBodyOperator operator+(const ManyBodyOperator& a, const ManyBodyOperator& b)
{
    ManyBodyOperator out;
    out.n_modes = a.n_modes;
    out.hermitian = a.hermitian && b.hermitian;
    for (const auto& [N, M] : a.sectors) {
        auto it = b.sectors.find(N);
        out.sectors.emplace(N, it == b.sectors.end() ? M : SparseC(M + it->second));
    }
    for (const auto& [N, M] : b.sectors)
        if (!a.sectors.count(N)) out.sectors.emplace(N, M);
    return out;
}

ManyBodyOperator operator*(Complex s, const ManyBodyOperator& a)
{
    ManyBodyOperator out;
    out.n_modes = a.n_modes;
    out.hermitian = a.hermitian && s.imag() == 0.0;
    for (const auto& [N, M] : a.sectors) out.sectors.emplace(N, SparseC(s * M));
    return out;
}

ManyBodyOperator commutator(const ManyBodyOperator& a, const ManyBodyOperator& b)
{
    ManyBodyOperator out;
    out.n_modes = a.n_modes;
    out.hermitian = false;
    for (const auto& [N, M] : a.sectors) {
        auto it = b.sectors.find(N);
        if (it == b.sectors.end()) continue;
        SparseC C = SparseC(M * it->second) - SparseC(it->second * M);
        C.makeCompressed();
        out.sectors.emplace(N, std::move(C));
    }
    return out;
}

ManyBodyOperator adjoint(const ManyBodyOperator& a)
{
    ManyBodyOperator out;
    out.n_modes = a.n_modes;
    out.hermitian = a.hermitian;
    for (const auto& [N, M] : a.sectors) out.sectors.emplace(N, SparseC(M.adjoint()));
    return out;
}

double max_abs_difference(const ManyBodyOperator& a, const ManyBodyOperator& b)
{
    double d = 0.0;
    for (const auto& [N, M] : a.sectors) {
        auto it = b.sectors.find(N);
        const SparseC D = it == b.sectors.end() ? M : SparseC(M - it->second);
        for (int k = 0; k < D.outerSize(); ++k)
            for (SparseC::InnerIterator x(D, k); x; ++x) d = std::max(d, std::abs(x.value()));
    }
    for (const auto& [N, M] : b.sectors)
        if (!a.sectors.count(N))
            for (int k = 0; k < M.outerSize(); ++k)
                for (SparseC::InnerIterator x(M, k); x; ++x) d = std::max(d, std::abs(x.value()));
    return d;
}

double hermiticity_defect(const ManyBodyOperator& a)
{
    return max_abs_difference(a, adjoint(a));
}

void check_mode_guard(const TorusSystem& ts, const NumericPolicy& policy)
{
    if (ts.num_modes > policy.max_modes)
        throw GuardError("mode count " + std::to_string(ts.num_modes) + " exceeds the desk-scale guard of " +
                         std::to_string(policy.max_modes));
}

ManyBodyOperator build_hamiltonian(const TorusSystem& ts, const std::vector<int>& sectors,
                                   const NumericPolicy& policy)
{
    check_mode_guard(ts, policy);
    ManyBodyOperator H = quadratic_operator(ts.h, sectors, true, policy);
    if (ts.model.U != 0.0 && !ts.v.isZero()) H = H + Complex(ts.model.U) * density_density_operator(ts.v, sectors, policy);
    H.hermitian = true;
    return H;
}

ManyBodyOperator build_hamiltonian(const HoppingModel& model, int L, const std::vector<int>& sectors,
                                   const NumericPolicy& policy)
{
    return build_hamiltonian(make_torus(model, L), sectors, policy);
}

ManyBodyOperator bond_current(const TorusSystem& ts, const Coeff& x, int sigma, const Coeff& y, int sigma_p,
                              const std::vector<int>& sectors)
{
    const int a = ts.mode(site_index(torus_wrap(x, ts.L), ts.L), sigma);
    const int b = ts.mode(site_index(torus_wrap(y, ts.L), ts.L), sigma_p);
    if (ts.h(a, b) == Complex(0.0)) std::clog << "warning: no hopping between the requested modes\n";
    return quadratic_operator(bond_current_kernel(ts, a, b), sectors, true);
}

ManyBodyOperator total_current(const TorusSystem& ts, int i, const std::vector<int>& sectors)
{
    return quadratic_operator(current_kernel(ts, i), sectors, true);
}

ManyBodyOperator momentum_current(const TorusSystem& ts, int alpha, const Coeff& p, const std::vector<int>& sectors)
{
    const bool herm = p.isZero();
    return quadratic_operator(momentum_kernel(ts, alpha, p), sectors, herm);
}

ManyBodyOperator diamagnetic_operator(const TorusSystem& ts, int i, int j, const std::vector<int>& sectors)
{
    return quadratic_operator(diamagnetic_kernel(ts, i, j), sectors, true);
}

LanczosResult lanczos_lowest(const std::function<CVector(const CVector&)>& apply, long dim,
                             const std::vector<CVector>& deflate, double tol, int max_krylov, int max_restarts)
{
    CVector start = random_start(dim, 0x5eed5eedULL + deflate.size());
    project_out(start, deflate);
    start.normalize();
    LanczosResult res;
    const int m_max = static_cast<int>(std::min<long>(max_krylov, dim - static_cast<long>(deflate.size())));
    for (int restart = 0; restart < max_restarts; ++restart) {
        std::vector<CVector> V;
        std::vector<double> alpha, beta;
        V.push_back(start);
        Eigen::VectorXd ritz_vec;
        double theta = 0.0;
        for (int j = 0; j < m_max; ++j) {
            CVector w = apply(V[j]);
            project_out(w, deflate);
            alpha.push_back(V[j].dot(w).real());
            for (int pass = 0; pass < 2; ++pass) project_out(w, V);
            project_out(w, deflate);
            const double b = w.norm();
            ++res.iterations;
            const bool last = (j + 1 == m_max) || b < 1e-13;
            if (last || (j + 1) % 8 == 0) {
                const int k = j + 1;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
                Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
                Eigen::VectorXd e = k > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), k - 1))
                                          : Eigen::VectorXd(0);
                es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
                theta = es.eigenvalues()(0);
                ritz_vec = es.eigenvectors().col(0);
                if (last || b * std::abs(ritz_vec(k - 1)) < 0.1 * tol) break;
            }
            beta.push_back(b);
            V.push_back(w / b);
        }
        CVector x = CVector::Zero(dim);
        for (int i = 0; i < ritz_vec.size(); ++i) x += ritz_vec(i) * V[i];
        project_out(x, deflate);
        x.normalize();
        CVector r = apply(x);
        project_out(r, deflate);
        theta = x.dot(r).real();
        r -= theta * x;
        res.value = theta;
        res.vector = x;
        res.residual = r.norm();
        if (res.residual <= tol) return res;
        start = x;
    }
    return res;
}

Spectrum eigensolve(const ManyBodyOperator& op, int N, EigenMode mode, double shift, const NumericPolicy& policy,
                    bool require_unique)
{
    const SparseC& M = op.sector(N);
    const long dim = M.rows();
    Spectrum out;
    out.N = N;
    const bool dense = mode == EigenMode::full || dim <= 512;
    if (dense) {
        if (dim > policy.full_dim_max && mode == EigenMode::full)
            throw GuardError("full diagonalization limited to dimension " + std::to_string(policy.full_dim_max));
        const CMatrix Md(M);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(Md);
        out.values = es.eigenvalues().array() + shift;
        out.vectors = es.eigenvectors();
        out.degeneracy_gap = dim > 1 ? out.values(1) - out.values(0) : std::numeric_limits<double>::infinity();
        out.residual = (M * out.vectors.col(0) - (out.values(0) - shift) * out.vectors.col(0)).norm();
        if (mode == EigenMode::ground) {
            if (require_unique && out.degeneracy_gap < policy.degeneracy_tol)
                throw GuardError("degenerate ground state");
            out.values = out.values.head(1).eval();
            out.vectors = out.vectors.leftCols(1).eval();
        }
        return out;
    }
    if (dim > policy.ground_dim_max) throw GuardError("sector dimension exceeds the iterative solver guard");
    auto apply = [&M](const CVector& v) -> CVector { return M * v; };
    const LanczosResult g = lanczos_lowest(apply, dim, {}, policy.eigen_residual_tol);
    if (g.residual > policy.eigen_residual_tol) throw GuardError("Lanczos did not converge");
    const LanczosResult e1 = lanczos_lowest(apply, dim, {g.vector}, 1e-6);
    out.values = RVector::Constant(1, g.value + shift);
    out.vectors = g.vector;
    out.degeneracy_gap = e1.value - g.value;
    out.residual = g.residual;
    if (require_unique && out.degeneracy_gap < policy.degeneracy_tol) throw GuardError("degenerate ground state");
    return out;
}

GibbsEnsemble::GibbsEnsemble(const ManyBodyOperator& H, double mu, double beta, const NumericPolicy& policy)
    : beta_(beta)
{
    long total = 0;
    for (const auto& [N, M] : H.sectors) total += M.rows();
    if (total > policy.gibbs_dim_max) throw GuardError("Gibbs state needs full spectra; Fock dimension too large");
    double emin = std::numeric_limits<double>::infinity();
    for (const auto& [N, M] : H.sectors) {
        sectors_.push_back(N);
        Spectrum s = eigensolve(H, N, EigenMode::full, -mu * N, policy);
        emin = std::min(emin, s.values(0));
        energies_[N] = s.values;
        spectra_.emplace(N, std::move(s));
    }
    double Z = 0.0;
    for (int N : sectors_) {
        weights_[N] = (-beta * (energies_[N].array() - emin)).exp();
        Z += weights_[N].sum();
    }
    for (int N : sectors_) weights_[N] /= Z;
}

Complex GibbsEnsemble::expectation(const ManyBodyOperator& op) const
{
    Complex acc = 0.0;
    for (int N : sectors_) {
        const CMatrix& V = spectra_.at(N).vectors;
        const CMatrix OV = op.sector(N) * V;
        const RVector& w = weights_.at(N);
        for (long n = 0; n < V.cols(); ++n) acc += w(n) * V.col(n).dot(OV.col(n));
    }
    return acc;
}

Complex gibbs_expectation(const ManyBodyOperator& op, const HoppingModel& model, int L, double beta,
                          const NumericPolicy& policy)
{
    const TorusSystem ts = make_torus(model, L);
    const GibbsEnsemble ens(build_hamiltonian(ts, {}, policy), model.mu, beta, policy);
    return ens.expectation(op);
}

GroundState find_ground_state(const ManyBodyOperator& H, double mu, const std::vector<int>& sectors,
                              const NumericPolicy& policy)
{
    GroundState gs;
    gs.energy = std::numeric_limits<double>::infinity();
    double within_gap = std::numeric_limits<double>::infinity();
    for (int N : sectors) {
        const Spectrum s = eigensolve(H, N, EigenMode::ground, -mu * N, policy, false);
        gs.sector_minima[N] = s.values(0);
        if (s.values(0) < gs.energy) {
            gs.energy = s.values(0);
            gs.N = N;
            gs.vector = s.vectors.col(0);
            gs.residual = s.residual;
            within_gap = s.degeneracy_gap;
        }
    }
    gs.degeneracy_gap = within_gap;
    for (const auto& [N, e] : gs.sector_minima)
        if (N != gs.N) gs.degeneracy_gap = std::min(gs.degeneracy_gap, e - gs.energy);
    if (gs.degeneracy_gap < policy.degeneracy_tol) throw GuardError("degenerate ground state");
    return gs;
}

std::vector<int> candidate_sectors(const TorusSystem& ts)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ts.h, Eigen::EigenvaluesOnly);
    int N0 = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < ts.model.mu) ++N0;
    std::vector<int> out;
    for (int N = N0 - 1; N <= N0 + 1; ++N)
        if (N >= 0 && N <= ts.num_modes) out.push_back(N);
    return out;
}

}  // namespace hallkit
