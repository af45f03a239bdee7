#include "hallkit/response.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "hallkit/fit.hpp"
#include "hallkit/parallel.hpp"

namespace hallkit {

namespace {

// Offsets r_sigma make J~_{alpha,p} depend on the representative of p, so -p is never wrapped.
Coeff negate(const Coeff& p, int) { return Coeff(-p); }

Vec2 cartesian_momentum(const TorusSystem& ts, const Coeff& p) { return momentum_point(ts.model.spec, p).cartesian; }

// (w_m - w_n)/(E_n - E_m - i omega) with the omega = 0 near-degenerate limit taken stably.
Complex lehmann_weight(double wn, double wm, double En, double Em, double omega, double beta)
{
    if (omega != 0.0) return (wm - wn) / Complex(En - Em, -omega);
    const double d = En - Em;
    const double x = beta * d;
    if (std::abs(x) < 1e-12) return wn * beta;
    if (std::abs(x) < 1.0) return wn * std::expm1(x) / d;
    return (wm - wn) / d;
}

}  // namespace

FiniteTemperatureResponse::FiniteTemperatureResponse(const HoppingModel& model, int L, double beta,
                                                     const NumericPolicy& policy)
    : ts_(make_torus(model, L)), beta_(beta), policy_(policy)
{
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    check_mode_guard(ts_, policy);
    H_ = build_hamiltonian(ts_, {}, policy);
    ensemble_ = std::make_unique<GibbsEnsemble>(H_, model.mu, beta, policy);
}

const ManyBodyOperator& FiniteTemperatureResponse::observable(int alpha, const Coeff& p) const
{
    const auto key = std::make_pair(alpha, std::make_pair(p.x(), p.y()));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, momentum_current(ts_, alpha, p)).first;
    return it->second;
}

Complex FiniteTemperatureResponse::correlator(const ManyBodyOperator& A, const ManyBodyOperator& B,
                                              double omega) const
{
    Complex sum = 0.0;
    for (int N : ensemble_->sectors()) {
        const Spectrum& s = ensemble_->spectrum(N);
        const RVector& E = ensemble_->energies(N);
        const RVector& w = ensemble_->weights(N);
        const CMatrix At = s.vectors.adjoint() * (A.sector(N) * s.vectors);
        const CMatrix Bt = s.vectors.adjoint() * (B.sector(N) * s.vectors);
        const long d = E.size();
        for (long n = 0; n < d; ++n)
            for (long m = 0; m < d; ++m) {
                const Complex ab = At(n, m) * Bt(m, n);
                if (ab == Complex(0.0)) continue;
                sum += lehmann_weight(w(n), w(m), E(n), E(m), omega, beta_) * ab;
            }
    }
    if (omega == 0.0) sum -= beta_ * expectation(A) * expectation(B);
    return sum / double(ts_.L * ts_.L);
}

Complex FiniteTemperatureResponse::correlator_oracle(const ManyBodyOperator& A, const ManyBodyOperator& B,
                                                     double omega, int nodes_per_unit) const
{
    // Tr(e^{-(beta-t)K} A e^{-tK} B) / Z, K = H - mu N - E_min
    double emin = std::numeric_limits<double>::infinity();
    for (int N : ensemble_->sectors()) emin = std::min(emin, ensemble_->energies(N).minCoeff());
    const int panels = std::max(1, static_cast<int>(std::ceil(beta_)));
    const auto x = gauss_legendre_nodes(nodes_per_unit);
    const auto wq = gauss_legendre_weights(nodes_per_unit);
    const double hp = beta_ / panels;
    Complex integral = 0.0;
    double Z = 0.0;
    for (int N : ensemble_->sectors()) {
        const CMatrix K = CMatrix(H_.sector(N)) -
                          (ts_.model.mu * N + emin) * CMatrix::Identity(H_.sector(N).rows(), H_.sector(N).cols());
        const CMatrix Ad(A.sector(N)), Bd(B.sector(N));
        Z += (-beta_ * K).exp().trace().real();
        for (int p = 0; p < panels; ++p)
            for (size_t q = 0; q < x.size(); ++q) {
                const double t = hp * (p + 0.5 * (x[q] + 1.0));
                const CMatrix et = (-t * K).exp(), erest = (-(beta_ - t) * K).exp();
                integral += 0.5 * hp * wq[q] * std::exp(-kI * omega * t) * (erest * Ad * et * Bd).trace();
            }
    }
    integral /= Z;
    if (omega == 0.0) integral -= beta_ * expectation(A) * expectation(B);
    return integral / double(ts_.L * ts_.L);
}

CorrelatorResult FiniteTemperatureResponse::matsubara_correlator(int alpha1, int alpha2, const Coeff& p,
                                                                 double omega, bool oracle) const
{
    const ManyBodyOperator& A = observable(alpha1, p);
    const ManyBodyOperator& B = observable(alpha2, negate(p, ts_.L));
    CorrelatorResult r;
    r.omega = omega;
    r.p = p;
    r.provenance = oracle ? Provenance::time_integral_oracle : Provenance::lehmann;
    r.value = oracle ? correlator_oracle(A, B, omega) : correlator(A, B, omega);
    return r;
}

Complex schwinger_term(const FiniteTemperatureResponse& r, const Coeff& p, int alpha2)
{
    const int L = r.torus().L;
    const ManyBodyOperator S = commutator(r.observable(kDensity, p), r.observable(alpha2, negate(p, L)));
    return r.expectation(S) / double(L * L);
}

Complex ward_residual(const FiniteTemperatureResponse& r, const Coeff& p, int alpha2, double omega, bool oracle)
{
    const Vec2 pc = cartesian_momentum(r.torus(), p);
    Complex lhs = kI * omega * r.matsubara_correlator(kDensity, alpha2, p, omega, oracle).value;
    for (int i = 1; i <= 2; ++i)
        if (pc(i - 1) != 0.0) lhs += pc(i - 1) * r.matsubara_correlator(i, alpha2, p, omega, oracle).value;
    return lhs - schwinger_term(r, p, alpha2);
}

WardReport ward_check(const FiniteTemperatureResponse& r, int n_freq, bool oracle)
{
    const TorusSystem& ts = r.torus();
    std::vector<int> alphas = {kDensity, 1, 2};
    for (int c = 0; c < ts.num_colors; ++c) alphas.push_back(color_observable(c));
    struct Job {
        Coeff p;
        int alpha;
        double omega;
    };
    std::vector<Job> jobs;
    for (const auto& k : momentum_grid(ts.model.spec))
        for (int a : alphas)
            for (int n = 0; n < n_freq; ++n) jobs.push_back({k.n, a, 2.0 * kPi * n / r.beta()});
    // warm the operator cache serially so workers only read it
    for (const auto& k : momentum_grid(ts.model.spec))
        for (int a : alphas) {
            r.observable(a, k.n);
            r.observable(a, negate(k.n, ts.L));
        }
    std::vector<double> res(jobs.size());
    parallel_for(static_cast<long>(jobs.size()), [&](long i) {
        res[i] = std::abs(ward_residual(r, jobs[i].p, jobs[i].alpha, jobs[i].omega, oracle));
    });
    WardReport rep;
    rep.evaluations = static_cast<int>(jobs.size());
    for (size_t i = 0; i < jobs.size(); ++i)
        if (res[i] >= rep.max_residual) {
            rep.max_residual = res[i];
            rep.worst_p = jobs[i].p;
            rep.worst_alpha = jobs[i].alpha;
            rep.worst_omega = jobs[i].omega;
        }
    return rep;
}

SigmaMatrix sigma_imaginary(const FiniteTemperatureResponse& r, int n_omega, bool oracle)
{
    const std::vector<double> omegas = bosonic_frequencies(r.beta(), n_omega);
    const double area = r.torus().model.spec.cell_area();
    SigmaMatrix out;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const auto& A = r.observable(i, Coeff(0, 0));
            const auto& B = r.observable(j, Coeff(0, 0));
            auto K = [&](double w) { return (oracle ? r.correlator_oracle(A, B, w) : r.correlator(A, B, w)).real(); };
            const double K0 = K(0.0);
            std::vector<double> slopes;
            for (double w : omegas) slopes.push_back(-(K(w) - K0) / (area * w));
            const SigmaEstimate e = extrapolate_to_zero(omegas, slopes, r.policy());
            out.value(i - 1, j - 1) = e.value;
            out.error(i - 1, j - 1) = e.error;
            if (e.flagged) {
                out.flagged = true;
                out.note = "non-smooth small-omega behavior";
            }
        }
    return out;
}

double sum_rule_deviation(const FiniteTemperatureResponse& r)
{
    const int L = r.torus().L;
    double dev = 0.0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const Complex K0 = r.correlator(r.observable(i, Coeff(0, 0)), r.observable(j, Coeff(0, 0)), 0.0);
            const Complex D = r.expectation(diamagnetic_operator(r.torus(), i, j));
            dev = std::max(dev, std::abs(K0 + D / double(L * L)));
        }
    return dev;
}

CGResult conjugate_gradient(const std::function<CVector(const CVector&)>& apply, const CVector& rhs, double tol,
                            int max_iterations)
{
    CGResult out;
    out.x = CVector::Zero(rhs.size());
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) return out;
    CVector r = rhs, p = rhs;
    double rr = r.squaredNorm();
    for (int it = 0; it < max_iterations; ++it) {
        const CVector Ap = apply(p);
        const double pAp = p.dot(Ap).real();
        if (!(pAp > 0.0)) throw GuardError("conjugate gradients met a non-positive direction");
        const double alpha = rr / pAp;
        out.x += alpha * p;
        r -= alpha * Ap;
        const double rr_new = r.squaredNorm();
        out.iterations = it + 1;
        if (std::sqrt(rr_new) <= tol * bnorm) break;
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    // true residual
    out.relative_residual = (rhs - apply(out.x)).norm() / bnorm;
    return out;
}

ZeroTemperatureResponse::ZeroTemperatureResponse(const HoppingModel& model, int L, ZeroTMode mode,
                                                 const NumericPolicy& policy, std::vector<int> sectors)
    : ts_(make_torus(model, L)), policy_(policy), mode_(mode)
{
    check_mode_guard(ts_, policy);
    if (sectors.empty()) sectors = candidate_sectors(ts_);
    H_ = build_hamiltonian(ts_, sectors, policy);
    gs_ = find_ground_state(H_, model.mu, sectors, policy);
    const int N = gs_.N;
    const long dim = H_.sector(N).rows();
    if (mode_ == ZeroTMode::automatic) mode_ = dim <= policy.full_dim_max ? ZeroTMode::full : ZeroTMode::resolvent;
    for (int i = 0; i < 2; ++i) {
        J_[i] = total_current(ts_, i + 1, {N});
        Jpsi_[i] = J_[i].apply(N, gs_.vector);
    }
    if (mode_ == ZeroTMode::full) {
        const Spectrum s = eigensolve(H_, N, EigenMode::full, -model.mu * N, policy);
        if (std::abs(s.values(0) - gs_.energy) > 1e-8 * std::max(1.0, std::abs(gs_.energy)))
            throw GuardError("ground-state energy mismatch between solvers");
        excitations_ = (s.values.tail(dim - 1).array() - s.values(0)).matrix();
        // the full-spectrum ground vector keeps the phases consistent with the excited columns
        const CVector g = s.vectors.col(0);
        Jpsi_[0] = J_[0].apply(N, g);
        Jpsi_[1] = J_[1].apply(N, g);
        gs_.vector = g;
        elements_.resize(dim - 1, 2);
        const CMatrix Vex = s.vectors.rightCols(dim - 1);
        elements_.col(0) = Vex.adjoint() * Jpsi_[0];
        elements_.col(1) = Vex.adjoint() * Jpsi_[1];
        gap_ = dim > 1 ? excitations_(0) : std::numeric_limits<double>::infinity();
    } else {
        gap_ = gs_.degeneracy_gap;
        for (int i = 0; i < 2; ++i) x_[i] = solve_shifted(Jpsi_[i]);
    }
}

CVector ZeroTemperatureResponse::solve_shifted(const CVector& rhs) const
{
    const int N = gs_.N;
    const SparseC& M = H_.sector(N);
    const CVector& v0 = gs_.vector;
    const double shift = ts_.model.mu * N + gs_.energy;  // H - mu N - E0
    auto Q = [&v0](CVector v) {
        v -= v0 * v0.dot(v);
        return v;
    };
    auto apply = [&](const CVector& v) -> CVector { return Q(CVector(M * v) - shift * v); };
    const CGResult r = conjugate_gradient(apply, Q(rhs), policy_.solver_tol * 0.1);
    if (r.relative_residual > policy_.solver_tol) throw GuardError("resolvent solve did not reach tolerance");
    return Q(r.x);
}

CVector ZeroTemperatureResponse::resolvent(const CVector& rhs, double omega) const
{
    if (omega == 0.0) return solve_shifted(rhs);
    const int N = gs_.N;
    const SparseC& M = H_.sector(N);
    const CVector& v0 = gs_.vector;
    const double shift = ts_.model.mu * N + gs_.energy;
    auto Q = [&v0](CVector v) {
        v -= v0 * v0.dot(v);
        return v;
    };
    auto Hs = [&](const CVector& v) -> CVector { return CVector(M * v) - shift * v; };
    auto apply = [&](const CVector& v) -> CVector { return Q(Hs(Hs(v)) + omega * omega * v); };
    const CGResult r = conjugate_gradient(apply, Q(rhs), policy_.solver_tol * 0.1);
    if (r.relative_residual > policy_.solver_tol) throw GuardError("resolvent solve did not reach tolerance");
    const CVector y = Q(r.x);
    return Q(Hs(y) - kI * omega * y);
}

Complex ZeroTemperatureResponse::correlator(int i, int j, double omega) const
{
    const double L2 = ts_.L * ts_.L;
    if (mode_ == ZeroTMode::full) {
        Complex sum = 0.0;
        for (long n = 0; n < excitations_.size(); ++n) {
            const Complex a = std::conj(elements_(n, i - 1)) * elements_(n, j - 1);
            const Complex b = std::conj(elements_(n, j - 1)) * elements_(n, i - 1);
            sum += a / Complex(excitations_(n), omega) + b / Complex(excitations_(n), -omega);
        }
        return sum / L2;
    }
    const Complex t1 = Jpsi_[i - 1].dot(resolvent(Jpsi_[j - 1], omega));
    const Complex t2 = Jpsi_[j - 1].dot(resolvent(Jpsi_[i - 1], -omega));
    return (t1 + t2) / L2;
}

Complex ZeroTemperatureResponse::real_time_integral(int i, int j, double omega) const
{
    if (mode_ == ZeroTMode::full) {
        Complex sum = 0.0;
        for (long n = 0; n < excitations_.size(); ++n) {
            const Complex a = std::conj(elements_(n, i - 1)) * elements_(n, j - 1);
            const Complex b = std::conj(elements_(n, j - 1)) * elements_(n, i - 1);
            sum += a / Complex(omega, -excitations_(n)) - b / Complex(omega, excitations_(n));
        }
        return sum;
    }
    // a/(omega - i D) = i a/(D + i omega), b/(omega + i D) = -i b/(D - i omega)
    const Complex ta = Jpsi_[i - 1].dot(resolvent(Jpsi_[j - 1], omega));
    const Complex tb = Jpsi_[j - 1].dot(resolvent(Jpsi_[i - 1], -omega));
    return kI * ta + kI * tb;
}

Complex ZeroTemperatureResponse::real_time_quadrature(int i, int j, double omega, double panel, int nodes) const
{
    if (!(omega > 0.0)) throw ValidationError("real-time quadrature needs omega > 0");
    const int N = gs_.N;
    const long dim = H_.sector(N).rows();
    if (dim > policy_.full_dim_max) throw GuardError("real-time quadrature needs a dense ground sector");
    const CVector& v0 = gs_.vector;
    const CVector ai = J_[i - 1].apply(N, v0), aj = J_[j - 1].apply(N, v0);
    // K = H - mu N - E0 annihilates the ground state
    const CMatrix K = CMatrix(H_.sector(N)) - (ts_.model.mu * N + gs_.energy) * CMatrix::Identity(dim, dim);

    // t = -s: <[J_i(t), J_j]> = <a_i, e^{iKs} a_j> - <a_j, e^{-iKs} a_i>
    const double bound = 2.0 * ai.norm() * aj.norm() + 1e-300;
    const double T = std::max(panel, std::log(bound / (omega * 1e-15)) / omega);
    const int panels = static_cast<int>(std::ceil(T / panel));
    const std::vector<double> x = gauss_legendre_nodes(nodes), w = gauss_legendre_weights(nodes);
    std::vector<CMatrix> step(nodes);
    for (int k = 0; k < nodes; ++k) step[k] = (kI * (0.5 * panel * (x[k] + 1.0)) * K).exp();
    const CMatrix shift = (kI * panel * K).exp();

    CVector u = aj, v = ai;  // e^{iKs0} a_j and e^{-iKs0} a_i at the panel start s0
    Complex acc = 0.0;
    for (int q = 0; q < panels; ++q) {
        const double s0 = q * panel;
        for (int k = 0; k < nodes; ++k) {
            const double s = s0 + 0.5 * panel * (x[k] + 1.0);
            const Complex f = ai.dot(step[k] * u) - aj.dot(step[k].adjoint() * v);
            acc += 0.5 * panel * w[k] * std::exp(-omega * s) * f;
        }
        u = shift * u;
        v = shift.adjoint() * v;
    }
    return acc;
}

Complex ZeroTemperatureResponse::diamagnetic(int i, int j) const
{
    const ManyBodyOperator D = diamagnetic_operator(ts_, i, j, {gs_.N});
    return gs_.vector.dot(D.apply(gs_.N, gs_.vector));
}

Eigen::Matrix2d ZeroTemperatureResponse::sigma_imaginary() const
{
    const double area = ts_.model.spec.cell_area();
    const double L2 = ts_.L * ts_.L;
    Eigen::Matrix2d s;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Complex dK;
            if (mode_ == ZeroTMode::full) {
                // dK/domega at 0 = (i/L^2) sum (b - a)/D^2
                Complex sum = 0.0;
                for (long n = 0; n < excitations_.size(); ++n) {
                    const Complex a = std::conj(elements_(n, i)) * elements_(n, j);
                    const Complex b = std::conj(elements_(n, j)) * elements_(n, i);
                    sum += (b - a) / (excitations_(n) * excitations_(n));
                }
                dK = kI * sum / L2;
            } else {
                const Complex z = x_[i].dot(x_[j]);
                dK = 2.0 * z.imag() / L2;
            }
            s(i, j) = -dK.real() / area;
        }
    return s;
}

Eigen::Matrix2d ZeroTemperatureResponse::sigma_real() const
{
    const double area = ts_.model.spec.cell_area();
    const double L2 = ts_.L * ts_.L;
    Eigen::Matrix2d s;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            // I'(0) = sum (a - b)/D^2
            Complex dI = 0.0;
            if (mode_ == ZeroTMode::full) {
                for (long n = 0; n < excitations_.size(); ++n) {
                    const Complex a = std::conj(elements_(n, i)) * elements_(n, j);
                    const Complex b = std::conj(elements_(n, j)) * elements_(n, i);
                    dI += (a - b) / (excitations_(n) * excitations_(n));
                }
            } else {
                dI = x_[i].dot(x_[j]) - x_[j].dot(x_[i]);
            }
            s(i, j) = (kI * dI).real() / (area * L2);
        }
    return s;
}

double ZeroTemperatureResponse::sum_rule_deviation() const
{
    const double L2 = ts_.L * ts_.L;
    double dev = 0.0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            const Complex lhs = kI * real_time_integral(i, j, 0.0);
            dev = std::max(dev, std::abs(correlator(i, j, 0.0) + diamagnetic(i, j) / L2));
            dev = std::max(dev, std::abs(lhs - diamagnetic(i, j)) / L2);
        }
    return dev;
}

double ZeroTemperatureResponse::wick_rotation_deviation(const std::vector<double>& omegas) const
{
    const double L2 = ts_.L * ts_.L;
    double dev = 0.0;
    for (double w : omegas)
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                dev = std::max(dev, std::abs(correlator(i, j, w) - (-kI) * real_time_integral(i, j, w) / L2));
    return dev;
}

double free_sigma_zero_t(const HoppingModel& model, int L, const NumericPolicy& policy)
{
    const TorusSystem ts = make_torus(model, L);
    const int n = ts.num_modes;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ts.h - model.mu * CMatrix::Identity(n, n));
    const RVector& e = es.eigenvalues();
    if ((e.array().abs() < policy.gap_threshold).any()) throw GuardError("Fermi level on a torus level");
    const CMatrix& V = es.eigenvectors();
    const CMatrix j1 = V.adjoint() * current_kernel(ts, 1) * V;
    const CMatrix j2 = V.adjoint() * current_kernel(ts, 2) * V;
    Complex z = 0.0;
    for (int a = 0; a < n; ++a) {
        if (e(a) >= 0.0) continue;
        for (int b = 0; b < n; ++b) {
            if (e(b) < 0.0) continue;
            const double d = e(b) - e(a);
            z += j1(a, b) * j2(b, a) / (d * d);
        }
    }
    return -2.0 * z.imag() / (model.spec.cell_area() * L * L);
}

double hartree_chemical_potential(const HoppingModel& model, double U)
{
    const int nc = model.spec.num_colors();
    std::vector<double> coord(nc, 0.0);
    for (const auto& in : model.interactions) coord[in.from] += in.strength;
    for (int c = 1; c < nc; ++c)
        if (std::abs(coord[c] - coord[0]) > 1e-12)
            throw ValidationError("Hartree chemical potential needs the same interaction sum on every color");
    return U * (nc > 0 ? coord[0] : 0.0);
}

std::vector<UniversalityRow> universality_scan(const HoppingModel& base, const std::vector<double>& U_list,
                                               const std::vector<int>& L_list, const UniversalityOptions& options,
                                               const NumericPolicy& policy)
{
    std::vector<UniversalityRow> rows;
    const std::string mode = options.beta > 0.0 ? "beta=" + std::to_string(options.beta) : "0T";
    for (int L : L_list) {
        auto evaluate = [&](double U, UniversalityRow& row) {
            HoppingModel m = base;
            m.U = U;
            m.mu = base.mu + (options.hartree_mu ? hartree_chemical_potential(base, U) : 0.0);
            if (options.beta > 0.0) {
                const FiniteTemperatureResponse r(m, L, options.beta, policy);
                const SigmaMatrix s = sigma_imaginary(r);
                row.sigma12 = s.value(0, 1);
                if (s.flagged) row.flags += "fit;";
                const TorusSystem ts = make_torus(m, L);
                const ManyBodyOperator H = build_hamiltonian(ts, candidate_sectors(ts), policy);
                NumericPolicy loose = policy;
                loose.degeneracy_tol = 0.0;
                row.gap = find_ground_state(H, m.mu, candidate_sectors(ts), loose).degeneracy_gap;
            } else {
                const ZeroTemperatureResponse r(m, L, ZeroTMode::automatic, policy);
                row.sigma12 = r.sigma_imaginary()(0, 1);
                row.gap = std::min(r.excitation_gap(), r.ground().degeneracy_gap);
            }
        };
        double reference = std::numeric_limits<double>::quiet_NaN();
        {
            UniversalityRow ref;
            try {
                evaluate(0.0, ref);
                reference = ref.sigma12;
            } catch (const GuardError&) {
            }
        }
        for (double U : U_list) {
            UniversalityRow row;
            row.U = U;
            row.L = L;
            row.mode = mode;
            if (std::abs(U) > options.u_window) row.flags += "outside_window;";
            try {
                evaluate(U, row);
                row.delta_sigma12 = U == 0.0 ? 0.0 : row.sigma12 - reference;
                if (row.gap < policy.gap_threshold) row.flags += "gap_closed;";
            } catch (const GuardError& e) {
                row.sigma12 = row.delta_sigma12 = std::numeric_limits<double>::quiet_NaN();
                row.flags += std::string("refused:") + e.what() + ";";
            }
            if (!row.flags.empty() && row.flags.back() == ';') row.flags.pop_back();
            rows.push_back(row);
        }
    }
    return rows;
}

SigmaEstimate sigma_derivative_in_U(const HoppingModel& model, int L, double beta, double h, int n_omega,
                                    const NumericPolicy& policy)
{
    const std::vector<double> omegas = bosonic_frequencies(beta, n_omega);
    const double steps[4] = {-2.0 * h, -h, h, 2.0 * h};
    const double coef[4] = {1.0, -8.0, 8.0, -1.0};
    std::vector<double> dK(omegas.size() + 1, 0.0);
    for (int s = 0; s < 4; ++s) {
        HoppingModel m = model;
        m.U = model.U + steps[s];
        const FiniteTemperatureResponse r(m, L, beta, policy);
        const auto& A = r.observable(1, Coeff(0, 0));
        const auto& B = r.observable(2, Coeff(0, 0));
        dK[0] += coef[s] * r.correlator(A, B, 0.0).real() / (12.0 * h);
        for (size_t n = 0; n < omegas.size(); ++n)
            dK[n + 1] += coef[s] * r.correlator(A, B, omegas[n]).real() / (12.0 * h);
    }
    const double area = model.spec.cell_area();
    std::vector<double> slopes;
    for (size_t n = 0; n < omegas.size(); ++n) slopes.push_back(-(dK[n + 1] - dK[0]) / (area * omegas[n]));
    return extrapolate_to_zero(omegas, slopes, policy);
}

}  // namespace hallkit
