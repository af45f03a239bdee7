#include "hallkit/propagator.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "hallkit/parallel.hpp"

namespace hallkit {

namespace {

double bump(double x)
{
    return x > 0.0 ? std::exp(-1.0 / x) : 0.0;
}

void check_time(double t, double beta)
{
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    if (std::abs(t) >= beta) throw ValidationError("imaginary time must satisfy |t| < beta");
}

double branch_value(double tau, double beta, double e, TimeBranch at_zero)
{
    const bool positive = tau > 0.0 || (tau == 0.0 && at_zero == TimeBranch::plus);
    return positive ? propagator_kernel(tau, beta, e) : -propagator_kernel(tau + beta, beta, e);
}

// Union-find over monomial labels.
struct Components {
    std::vector<int> parent;
    explicit Components(int n) : parent(static_cast<size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void join(int a, int b) { parent[find(a)] = find(b); }
};

struct FlatBilinear {
    double t;
    const CMatrix* kernel;
    int monomial;
};

std::vector<FlatBilinear> flatten(const std::vector<WickMonomial>& monomials, const NumericPolicy& policy)
{
    if (static_cast<int>(monomials.size()) > policy.wick_monomials_max)
        throw GuardError("Wick evaluation limited to " + std::to_string(policy.wick_monomials_max) +
                         " monomials; got " + std::to_string(monomials.size()));
    std::vector<FlatBilinear> flat;
    for (size_t m = 0; m < monomials.size(); ++m)
        for (const auto& b : monomials[m]) flat.push_back({b.t, &b.kernel, static_cast<int>(m)});
    if (static_cast<int>(flat.size()) > policy.wick_bilinears_max)
        throw GuardError("Wick evaluation limited to " + std::to_string(policy.wick_bilinears_max) +
                         " bilinears (" + std::to_string(policy.wick_bilinears_max) + "! pairings); got " +
                         std::to_string(flat.size()));
    return flat;
}

Complex wick_sum(const std::vector<WickMonomial>& monomials, const TorusPropagator& G, bool connected_only,
                 const NumericPolicy& policy)
{
    const auto flat = flatten(monomials, policy);
    const int m = static_cast<int>(flat.size());
    if (m == 0) return connected_only ? 0.0 : 1.0;
    // MG[X][Y] = M_X G(t_X - t_Y), ties broken by written order.
    std::vector<std::vector<CMatrix>> MG(m, std::vector<CMatrix>(m));
    for (int X = 0; X < m; ++X)
        for (int Y = 0; Y < m; ++Y) {
            const double tau = flat[X].t - flat[Y].t;
            const TimeBranch br = (tau == 0.0 && X < Y) ? TimeBranch::plus : TimeBranch::minus;
            MG[X][Y] = (*flat[X].kernel) * G(tau, br);
        }
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    const int n_mono = static_cast<int>(monomials.size());
    Complex total = 0.0;
    do {
        if (connected_only) {
            Components comp(n_mono);
            for (int X = 0; X < m; ++X) comp.join(flat[X].monomial, flat[perm[X]].monomial);
            bool ok = true;
            for (int a = 1; a < n_mono && ok; ++a) ok = comp.find(a) == comp.find(0);
            if (!ok) continue;
        }
        std::vector<bool> seen(m, false);
        Complex value = 1.0;
        for (int X = 0; X < m; ++X) {
            if (seen[X]) continue;
            CMatrix P = MG[X][perm[X]];
            seen[X] = true;
            for (int Y = perm[X]; Y != X; Y = perm[Y]) {
                seen[Y] = true;
                P = P * MG[Y][perm[Y]];
            }
            value *= -P.trace();
        }
        total += value;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

void set_partitions(int n, std::vector<int>& label, int pos, int blocks,
                    const std::function<void(const std::vector<int>&, int)>& visit)
{
    if (pos == n) {
        visit(label, blocks);
        return;
    }
    for (int b = 0; b <= blocks; ++b) {
        label[pos] = b;
        set_partitions(n, label, pos + 1, std::max(blocks, b + 1), visit);
    }
}

// ---- momentum-space first-order evaluator ----

using Block = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

struct MomentumData {
    int L = 0;
    int nc = 0;
    int nk = 0;
    std::vector<RVector> e;
    std::vector<Block> V;
    std::vector<Block> j1, j2;
    std::vector<Block> vhat;

    int add(int a, int b) const
    {
        const int a1 = a / L, a2 = a % L, b1 = b / L, b2 = b % L;
        return ((a1 + b1) % L) * L + (a2 + b2) % L;
    }
    int neg(int a) const
    {
        const int a1 = a / L, a2 = a % L;
        return ((L - a1) % L) * L + (L - a2) % L;
    }
};

Block translation_block(const TorusSystem& ts, const CMatrix& M, const Vec2& k)
{
    const int nc = ts.num_colors;
    Block B = Block::Zero(nc, nc);
    for (int s = 0; s < ts.L * ts.L; ++s) {
        const Complex ph = std::exp(kI * k.dot(ts.model.spec.to_cartesian(site_coeff(s, ts.L))));
        for (int a = 0; a < nc; ++a)
            for (int b = 0; b < nc; ++b) B(a, b) += ph * M(ts.mode(s, a), ts.mode(0, b));
    }
    return B;
}

MomentumData momentum_data(const TorusSystem& ts, int i, int j)
{
    MomentumData d;
    d.L = ts.L;
    d.nc = ts.num_colors;
    d.nk = ts.L * ts.L;
    if (d.nc > 4) throw GuardError("first-order evaluator supports at most 4 colors");
    const CMatrix hmu = ts.h - ts.model.mu * CMatrix::Identity(ts.num_modes, ts.num_modes);
    const CMatrix J1 = current_kernel(ts, i), J2 = current_kernel(ts, j);
    const CMatrix v = ts.v.cast<Complex>();
    for (int idx = 0; idx < d.nk; ++idx) {
        const Vec2 k = momentum_point(ts.model.spec, site_coeff(idx, ts.L)).cartesian;
        const Block hk = translation_block(ts, hmu, k);
        Eigen::SelfAdjointEigenSolver<CMatrix> es{CMatrix(hk)};
        d.e.push_back(es.eigenvalues());
        d.V.push_back(es.eigenvectors());
        d.j1.push_back(translation_block(ts, J1, k));
        d.j2.push_back(translation_block(ts, J2, k));
        d.vhat.push_back(translation_block(ts, v, k));
    }
    return d;
}

// Bilinears: 0 = J_i(t), 1 = J_j(0), 2 = n_q(s), 3 = n_{-q}(s), written in this order.
enum TimeKey { kT, kMinusT, kS, kMinusS, kTS, kST, kZeroPlus, kZeroMinus, kKeys };

int time_key(int X, int Y)
{
    static const int table[4][4] = {{kZeroMinus, kT, kTS, kTS},
                                    {kMinusT, kZeroMinus, kMinusS, kMinusS},
                                    {kST, kS, kZeroMinus, kZeroPlus},
                                    {kST, kS, kZeroMinus, kZeroMinus}};
    return table[X][Y];
}

struct CycleTerm {
    int sign = 1;
    std::vector<std::vector<int>> cycles;  // each starts at 2 or 3
    bool split = false;                    // 2 and 3 in different cycles
};

std::vector<CycleTerm> connected_terms()
{
    std::vector<CycleTerm> out;
    std::array<int, 4> perm = {0, 1, 2, 3};
    do {
        Components comp(3);  // monomials: J_i, J_j, V
        const int mono[4] = {0, 1, 2, 2};
        for (int X = 0; X < 4; ++X) comp.join(mono[X], mono[perm[X]]);
        if (comp.find(0) != comp.find(2) || comp.find(1) != comp.find(2)) continue;
        CycleTerm term;
        std::array<bool, 4> seen{};
        for (int start : {2, 3}) {
            if (seen[start]) continue;
            std::vector<int> c;
            for (int X = start; !seen[X]; X = perm[X]) {
                seen[X] = true;
                c.push_back(X);
            }
            term.cycles.push_back(c);
        }
        // every connected pairing has each cycle through the interaction
        for (int X = 0; X < 4; ++X)
            if (!seen[X]) throw std::logic_error("unexpected cycle structure");
        term.sign = (term.cycles.size() % 2) ? -1 : 1;
        term.split = term.cycles.size() == 2;
        out.push_back(term);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace

double chi0(double t)
{
    const double a = std::abs(t);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    const double s = a - 1.0;
    return bump(1.0 - s) / (bump(1.0 - s) + bump(s));
}

double CutoffFunction::operator()(double t) const
{
    return chi0(t);
}

double fermi(double beta, double e)
{
    const double x = beta * e;
    if (x > 0.0) {
        const double z = std::exp(-x);
        return z / (1.0 + z);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double propagator_kernel(double s, double beta, double e)
{
    if (e >= 0.0) return std::exp(-s * e) / (1.0 + std::exp(-beta * e));
    return std::exp((beta - s) * e) / (1.0 + std::exp(beta * e));
}

CMatrix propagator(const HoppingModel& model, double beta, int L, double t, const Coeff& x, TimeBranch at_zero)
{
    check_time(t, beta);
    LatticeSpec spec = model.spec;
    spec.L = L;
    const int nc = spec.num_colors();
    const Vec2 xc = spec.to_cartesian(x);
    CMatrix g = CMatrix::Zero(nc, nc);
    for (const auto& k : momentum_grid(spec)) {
        const CMatrix h = bloch_hamiltonian(model, k.cartesian) - model.mu * CMatrix::Identity(nc, nc);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        RVector gd(nc);
        for (int a = 0; a < nc; ++a) gd(a) = branch_value(t, beta, es.eigenvalues()(a), at_zero);
        g += std::exp(-kI * k.cartesian.dot(xc)) *
             (es.eigenvectors() * gd.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
    }
    return g / double(L * L);
}

CMatrix matsubara_propagator(const HoppingModel& model, double k0, const Vec2& k)
{
    const int nc = model.spec.num_colors();
    const CMatrix A = -kI * k0 * CMatrix::Identity(nc, nc) + bloch_hamiltonian(model, k) -
                      model.mu * CMatrix::Identity(nc, nc);
    Eigen::FullPivLU<CMatrix> lu(A);
    if (!lu.isInvertible()) throw GuardError("singular Matsubara propagator: mu on a band at k0 = 0");
    return lu.inverse();
}

TorusPropagator::TorusPropagator(const TorusSystem& ts, double beta) : beta_(beta)
{
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    const int n = ts.num_modes;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(ts.h - ts.model.mu * CMatrix::Identity(n, n));
    levels_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

CMatrix TorusPropagator::operator()(double tau, TimeBranch at_zero) const
{
    check_time(tau, beta_);
    RVector gd(levels_.size());
    for (long a = 0; a < levels_.size(); ++a) gd(a) = branch_value(tau, beta_, levels_(a), at_zero);
    return vectors_ * gd.cast<Complex>().asDiagonal() * vectors_.adjoint();
}

RVector TorusPropagator::occupations() const
{
    RVector f(levels_.size());
    for (long a = 0; a < levels_.size(); ++a) f(a) = fermi(beta_, levels_(a));
    return f;
}

ScaleDecomposition::ScaleDecomposition(const HoppingModel& model, double beta, int L, int M,
                                       const NumericPolicy& policy)
    : model_(model), beta_(beta), L_(L), M_(M)
{
    if (M < 1) throw ValidationError("scale decomposition needs M >= 1");
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    model_.spec.L = L;
    // grid divisible by 6 L: contains the torus momenta and the corners of square and hexagonal zones
    const int grid = 6 * L * ((64 + 6 * L - 1) / (6 * L));
    const GapInfo gap = spectral_gap(model, grid, model.mu, policy);
    delta_ = gap.delta;
    if (gap.gapless || delta_ < policy.gap_threshold)
        throw GuardError("gapless model: scales are measured in units of the gap");
    const double kmax = std::ldexp(2.0 * delta_, M);
    for (long n = 0;; ++n) {
        const double k0 = 2.0 * kPi * (n + 0.5) / beta;
        if (k0 >= kmax) break;
        k0_.push_back(k0);
        k0_.push_back(-k0);
    }
    grid_ = momentum_grid(model_.spec);
    const int nc = model.spec.num_colors();
    for (const auto& k : grid_) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(bloch_hamiltonian(model, k.cartesian) -
                                                  model.mu * CMatrix::Identity(nc, nc));
        energies_.push_back(es.eigenvalues());
        vectors_.push_back(es.eigenvectors());
    }
}

double ScaleDecomposition::f(int h, double k0) const
{
    if (h < 0 || h > M_) throw ValidationError("scale index outside [0, M]");
    const double u = k0 / delta_;
    if (h == 0) return chi0(u);
    return chi0(std::ldexp(u, -h)) - chi0(std::ldexp(u, -h + 1));
}

CMatrix ScaleDecomposition::weighted_sum(const std::vector<double>& weight, double t, const Coeff& x) const
{
    const int nc = model_.spec.num_colors();
    const Vec2 xc = model_.spec.to_cartesian(x);
    CMatrix g = CMatrix::Zero(nc, nc);
    for (size_t ik = 0; ik < grid_.size(); ++ik) {
        CVector d = CVector::Zero(nc);
        for (size_t n = 0; n < k0_.size(); ++n) {
            if (weight[n] == 0.0) continue;
            const Complex ph = weight[n] * std::exp(-kI * k0_[n] * t);
            for (int a = 0; a < nc; ++a) d(a) += ph / (-kI * k0_[n] + energies_[ik](a));
        }
        g += std::exp(-kI * grid_[ik].cartesian.dot(xc)) * (vectors_[ik] * d.asDiagonal() * vectors_[ik].adjoint());
    }
    return g / (beta_ * L_ * L_);
}

CMatrix ScaleDecomposition::single_scale(int h, double t, const Coeff& x) const
{
    std::vector<double> w(k0_.size());
    for (size_t n = 0; n < k0_.size(); ++n) w[n] = f(h, k0_[n]);
    return weighted_sum(w, t, x);
}

CMatrix ScaleDecomposition::regularized(double t, const Coeff& x) const
{
    std::vector<double> w(k0_.size());
    for (size_t n = 0; n < k0_.size(); ++n) w[n] = chi0(std::ldexp(k0_[n] / delta_, -M_));
    return weighted_sum(w, t, x);
}

ScaleDecomposition::GramPair ScaleDecomposition::gram_factors(int h, double t, const Coeff& x, int sigma) const
{
    const int nc = model_.spec.num_colors();
    if (sigma < 0 || sigma >= nc) throw ValidationError("unknown color index");
    const Vec2 xc = model_.spec.to_cartesian(x);
    const double norm = 1.0 / std::sqrt(beta_ * L_ * L_);
    GramPair out;
    const long len = static_cast<long>(k0_.size() * grid_.size()) * nc;
    out.A = CVector::Zero(len);
    out.B = CVector::Zero(len);
    long pos = 0;
    for (size_t n = 0; n < k0_.size(); ++n) {
        const double k0 = k0_[n];
        const double fh = f(h, k0);
        for (size_t ik = 0; ik < grid_.size(); ++ik, pos += nc) {
            if (fh == 0.0) continue;
            const RVector& e = energies_[ik];
            const CMatrix& V = vectors_[ik];
            const Complex ph = norm * std::sqrt(fh) * std::exp(kI * (grid_[ik].cartesian.dot(xc) + k0 * t));
            RVector inv(nc);
            CVector num(nc);
            for (int a = 0; a < nc; ++a) {
                inv(a) = 1.0 / (k0 * k0 + e(a) * e(a));
                num(a) = kI * k0 + e(a);
            }
            const CVector col_a = V * (inv.cast<Complex>().asDiagonal() * V.adjoint().col(sigma));
            const CVector col_b = V * (num.asDiagonal() * V.adjoint().col(sigma));
            out.A.segment(pos, nc) = ph * col_a;
            out.B.segment(pos, nc) = ph * col_b;
        }
    }
    return out;
}

Complex full_wick(const std::vector<WickMonomial>& monomials, const TorusPropagator& G, const NumericPolicy& policy)
{
    return wick_sum(monomials, G, false, policy);
}

Complex truncated_wick(const std::vector<WickMonomial>& monomials, const TorusPropagator& G,
                       const NumericPolicy& policy)
{
    return wick_sum(monomials, G, true, policy);
}

Complex cumulant_from_moments(const std::vector<WickMonomial>& monomials, const TorusPropagator& G,
                              const NumericPolicy& policy)
{
    const int n = static_cast<int>(monomials.size());
    if (n == 0) return 0.0;
    std::vector<int> label(n, 0);
    Complex total = 0.0;
    set_partitions(n, label, 0, 0, [&](const std::vector<int>& lab, int blocks) {
        Complex term = 1.0;
        for (int b = 0; b < blocks; ++b) {
            std::vector<WickMonomial> sub;
            for (int i = 0; i < n; ++i)
                if (lab[i] == b) sub.push_back(monomials[i]);
            term *= full_wick(sub, G, policy);
        }
        double c = (blocks % 2 == 1) ? 1.0 : -1.0;
        for (int f = 2; f < blocks; ++f) c *= f;
        total += c * term;
    });
    return total;
}

Complex free_matsubara_correlator(const TorusSystem& ts, double beta, const CMatrix& A, const CMatrix& B,
                                  double omega)
{
    const TorusPropagator G(ts, beta);
    const CMatrix& V = G.modes();
    const CMatrix At = V.adjoint() * A * V, Bt = V.adjoint() * B * V;
    const RVector& e = G.levels();
    const RVector f = G.occupations();
    const int n = static_cast<int>(e.size());
    Complex sum = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Complex ab = At(a, b) * Bt(b, a);
            if (ab == Complex(0.0)) continue;
            const double d = e(b) - e(a);
            Complex w;
            if (omega != 0.0)
                w = (f(a) - f(b)) / (d + kI * omega);
            else if (std::abs(beta * d) < 1e-8)
                w = f(a) * (1.0 - f(b)) * beta;
            else if (std::abs(beta * d) < 1.0)
                w = f(a) * (1.0 - f(b)) * (-std::expm1(-beta * d)) / d;
            else
                w = (f(a) - f(b)) / d;
            sum += ab * w;
        }
    return sum / double(ts.L * ts.L);
}

std::vector<Complex> first_order_kernel(const HoppingModel& model, int L, double beta, int i, int j,
                                        const std::vector<double>& omegas, const FirstOrderOptions& options)
{
    if (L > options.max_L || beta > options.max_beta)
        throw GuardError("first-order evaluator limited to L <= " + std::to_string(options.max_L) +
                         " and beta <= " + std::to_string(options.max_beta));
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    const TorusSystem ts = make_torus(model, L);
    const MomentumData md = momentum_data(ts, i, j);
    const std::vector<CycleTerm> terms = connected_terms();
    const int nc = md.nc, nk = md.nk;

    const std::vector<double> x = gauss_legendre_nodes(options.nodes);
    const std::vector<double> w = gauss_legendre_weights(options.nodes);
    auto panels = [&](double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
        const int np = std::max(1, static_cast<int>(std::ceil((b - a) / options.panel - 1e-12)));
        const double hp = (b - a) / np;
        for (int p = 0; p < np; ++p)
            for (size_t q = 0; q < x.size(); ++q) {
                nodes.push_back(a + hp * (p + 0.5 * (x[q] + 1.0)));
                weights.push_back(0.5 * hp * w[q]);
            }
    };
    std::vector<double> tn, tw;
    panels(0.0, beta, tn, tw);

    auto Gk = [&](int k, double tau, TimeBranch br) -> Block {
        RVector gd(nc);
        for (int a = 0; a < nc; ++a) gd(a) = branch_value(tau, beta, md.e[k](a), br);
        return md.V[k] * gd.cast<Complex>().asDiagonal() * md.V[k].adjoint();
    };
    std::vector<Block> zplus(nk), zminus(nk);
    for (int k = 0; k < nk; ++k) {
        zplus[k] = Gk(k, 0.0, TimeBranch::plus);
        zminus[k] = Gk(k, 0.0, TimeBranch::minus);
    }

    std::vector<Complex> phi(tn.size(), 0.0);
    parallel_for(static_cast<long>(tn.size()), [&](long it) {
        const double t = tn[it];
        std::vector<double> sn, sw;
        panels(0.0, t, sn, sw);
        panels(t, beta, sn, sw);
        std::array<std::vector<Block>, kKeys> G;
        for (auto& g : G) g.resize(nk);
        for (int k = 0; k < nk; ++k) {
            G[kT][k] = Gk(k, t, TimeBranch::minus);
            G[kMinusT][k] = Gk(k, -t, TimeBranch::minus);
        }
        G[kZeroPlus] = zplus;
        G[kZeroMinus] = zminus;
        Complex acc = 0.0;
        for (size_t is = 0; is < sn.size(); ++is) {
            const double s = sn[is];
            for (int k = 0; k < nk; ++k) {
                G[kS][k] = Gk(k, s, TimeBranch::minus);
                G[kMinusS][k] = Gk(k, -s, TimeBranch::minus);
                G[kTS][k] = Gk(k, t - s, TimeBranch::minus);
                G[kST][k] = Gk(k, s - t, TimeBranch::minus);
            }
            Complex F = 0.0;
            for (int q = 0; q < nk; ++q) {
                const int mq = md.neg(q);
                const Block& vq = md.vhat[q];
                for (const auto& term : terms) {
                    if (term.split && q != 0) continue;
                    // walk a cycle from kappa0, returning the product split at bilinear 3 (if inside)
                    auto walk = [&](const std::vector<int>& c, int kappa0, Block& Ra, Block& Rb, bool& has3) {
                        int p = kappa0;
                        has3 = false;
                        Block R = Block::Identity(nc, nc);
                        const int len = static_cast<int>(c.size());
                        for (int a = 0; a < len; ++a) {
                            const int X = c[a], Y = c[(a + 1) % len];
                            if (a > 0) {
                                if (X == 0) R = R * md.j1[p];
                                else if (X == 1) R = R * md.j2[p];
                                else if (X == 3) {
                                    Ra = R;
                                    R = Block::Identity(nc, nc);
                                    has3 = true;
                                }
                            }
                            if (X == 2) p = md.add(p, mq);   // p -= q
                            else if (X == 3) p = md.add(p, q);
                            R = R * G[time_key(X, Y)][p];
                        }
                        Rb = R;
                        return p;
                    };
                    Complex value = 0.0;
                    if (!term.split) {
                        for (int k0 = 0; k0 < nk; ++k0) {
                            Block Ra, Rb;
                            bool has3;
                            walk(term.cycles[0], k0, Ra, Rb, has3);
                            for (int a = 0; a < nc; ++a)
                                for (int b = 0; b < nc; ++b) value += vq(a, b) * Ra(a, b) * Rb(b, a);
                        }
                    } else {
                        Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 4, 1> va = Eigen::VectorXcd::Zero(nc),
                                                                             vb = Eigen::VectorXcd::Zero(nc);
                        for (int k0 = 0; k0 < nk; ++k0) {
                            Block Ra, Rb;
                            bool has3;
                            walk(term.cycles[0], k0, Ra, Rb, has3);
                            va += Rb.diagonal();
                            walk(term.cycles[1], k0, Ra, Rb, has3);
                            vb += Rb.diagonal();
                        }
                        for (int a = 0; a < nc; ++a)
                            for (int b = 0; b < nc; ++b) value += vq(a, b) * va(a) * vb(b);
                    }
                    F += double(term.sign) * value;
                }
            }
            acc += sw[is] * F / double(nk);
        }
        phi[it] = acc;
    });

    std::vector<Complex> out;
    for (double omega : omegas) {
        Complex K = 0.0;
        for (size_t it = 0; it < tn.size(); ++it) K += tw[it] * std::exp(-kI * omega * tn[it]) * phi[it];
        out.push_back(K / double(nk));
    }
    return out;
}

Complex first_order_kernel(const HoppingModel& model, int L, double beta, int i, int j, double omega,
                           const FirstOrderOptions& options)
{
    return first_order_kernel(model, L, beta, i, j, std::vector<double>{omega}, options)[0];
}

SigmaEstimate perturbative_sigma_first_order(const HoppingModel& model, double beta, int L, int n_omega,
                                             const FirstOrderOptions& options, const NumericPolicy& policy)
{
    std::vector<double> omegas = bosonic_frequencies(beta, n_omega);
    std::vector<double> all = omegas;
    all.insert(all.begin(), 0.0);
    const auto K = first_order_kernel(model, L, beta, 1, 2, all, options);
    const double area = model.spec.cell_area();
    std::vector<double> slopes;
    for (size_t n = 0; n < omegas.size(); ++n) slopes.push_back(-(K[n + 1].real() - K[0].real()) / (area * omegas[n]));
    return extrapolate_to_zero(omegas, slopes, policy);
}

}  // namespace hallkit
