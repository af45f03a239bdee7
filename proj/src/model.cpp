#include "hallkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace hallkit {

namespace {

using Key = std::tuple<int, int, int, int>;

Key key_of(const Coeff& d, int from, int to) { return {d.x(), d.y(), from, to}; }

std::string describe(const Coeff& d, int from, int to, const LatticeSpec& spec)
{
    std::ostringstream os;
    os << "d=(" << d.x() << "," << d.y() << ") from=" << spec.colors[from] << " to=" << spec.colors[to];
    return os.str();
}

}  // namespace

void validate_model(HoppingModel& model, bool strict)
{
    validate(model.spec);
    const int nc = model.spec.num_colors();
    if (!model.onsite.empty() && static_cast<int>(model.onsite.size()) != nc)
        throw ValidationError("onsite potential must list every color");
    for (double e : model.onsite)
        if (!std::isfinite(e)) throw ValidationError("onsite potential is not finite");
    if (!std::isfinite(model.mu) || !std::isfinite(model.U))
        throw ValidationError("mu and U must be finite");

    std::map<Key, Complex> hop;
    for (const auto& h : model.hoppings) {
        if (h.from < 0 || h.from >= nc || h.to < 0 || h.to >= nc)
            throw ValidationError("hopping refers to an unknown color");
        if (!std::isfinite(h.amplitude.real()) || !std::isfinite(h.amplitude.imag()))
            throw ValidationError("hopping amplitude is not finite");
        if (h.d.isZero() && h.from == h.to)
            throw ValidationError("on-site same-color hopping is not allowed (use onsite): " +
                                  describe(h.d, h.from, h.to, model.spec));
        hop[key_of(h.d, h.from, h.to)] += h.amplitude;
    }
    if (!strict) {
        std::map<Key, Complex> missing;
        for (const auto& [k, t] : hop) {
            const auto [d1, d2, f, to] = k;
            const Key partner{-d1, -d2, to, f};
            if (!hop.count(partner)) missing[partner] += std::conj(t);
        }
        for (const auto& [k, t] : missing) hop[k] = t;
    }
    for (const auto& [k, t] : hop) {
        const auto [d1, d2, f, to] = k;
        const Key partner{-d1, -d2, to, f};
        auto it = hop.find(partner);
        if (it == hop.end() || std::abs(it->second - std::conj(t)) > 1e-12 * (1.0 + std::abs(t)))
            throw ValidationError("hopping stencil is not Hermitian at " +
                                  describe(Coeff(d1, d2), f, to, model.spec));
    }
    model.hoppings.clear();
    for (const auto& [k, t] : hop) {
        const auto [d1, d2, f, to] = k;
        if (t != Complex(0.0)) model.hoppings.push_back({Coeff(d1, d2), f, to, t});
    }

    std::map<Key, double> inter;
    for (const auto& v : model.interactions) {
        if (v.from < 0 || v.from >= nc || v.to < 0 || v.to >= nc)
            throw ValidationError("interaction refers to an unknown color");
        if (!std::isfinite(v.strength)) throw ValidationError("interaction strength is not finite");
        inter[key_of(v.d, v.from, v.to)] += v.strength;
    }
    if (!strict) {
        std::map<Key, double> missing;
        for (const auto& [k, s] : inter) {
            const auto [d1, d2, f, to] = k;
            const Key partner{-d1, -d2, to, f};
            if (!inter.count(partner)) missing[partner] += s;
        }
        for (const auto& [k, s] : missing) inter[k] = s;
    }
    for (const auto& [k, s] : inter) {
        const auto [d1, d2, f, to] = k;
        if (d1 == 0 && d2 == 0 && f == to && s != 0.0)
            throw ValidationError("interaction v_ss(0) must vanish: " +
                                  describe(Coeff(d1, d2), f, to, model.spec));
        const Key partner{-d1, -d2, to, f};
        auto it = inter.find(partner);
        if (it == inter.end() || std::abs(it->second - s) > 1e-12 * (1.0 + std::abs(s)))
            throw ValidationError("interaction is not symmetric at " +
                                  describe(Coeff(d1, d2), f, to, model.spec));
    }
    model.interactions.clear();
    for (const auto& [k, s] : inter) {
        const auto [d1, d2, f, to] = k;
        if (s != 0.0) model.interactions.push_back({Coeff(d1, d2), f, to, s});
    }
}

int stencil_radius(const HoppingModel& model)
{
    int r = 0;
    for (const auto& h : model.hoppings) r = std::max({r, std::abs(h.d.x()), std::abs(h.d.y())});
    for (const auto& v : model.interactions) r = std::max({r, std::abs(v.d.x()), std::abs(v.d.y())});
    return r;
}

CMatrix bloch_hamiltonian(const HoppingModel& model, const Vec2& k)
{
    const int nc = model.spec.num_colors();
    CMatrix H = CMatrix::Zero(nc, nc);
    for (int s = 0; s < nc; ++s) H(s, s) = model.onsite_energy(s);
    for (const auto& h : model.hoppings) {
        const double phase = k.dot(model.spec.to_cartesian(h.d));
        H(h.from, h.to) += h.amplitude * std::exp(kI * phase);
    }
    return H;
}

RVector bands(const HoppingModel& model, const Vec2& k)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(bloch_hamiltonian(model, k), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

BlochData bloch_data(const HoppingModel& model, const Vec2& k, double mu, const NumericPolicy& policy)
{
    BlochData out;
    out.k = k;
    out.matrix = bloch_hamiltonian(model, k);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(out.matrix);
    out.bands = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    const int nc = static_cast<int>(out.bands.size());
    out.projector = CMatrix::Zero(nc, nc);
    for (int a = 0; a < nc; ++a) {
        if (std::abs(out.bands(a) - mu) <= policy.fermi_level_tol)
            throw GuardError("Fermi level on a band");
        if (out.bands(a) < mu) out.projector += out.eigenvectors.col(a) * out.eigenvectors.col(a).adjoint();
    }
    return out;
}

CMatrix fermi_projector(const HoppingModel& model, const Vec2& k, double mu, const NumericPolicy& policy)
{
    return bloch_data(model, k, mu, policy).projector;
}

GapInfo spectral_gap(const HoppingModel& model, int grid_size, double mu, const NumericPolicy& policy)
{
    if (grid_size < 8) throw ValidationError("spectral_gap needs grid_size >= 8");
    const auto [G1, G2] = reciprocal_basis(model.spec);
    GapInfo best;
    best.delta = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid_size; ++a)
        for (int b = 0; b < grid_size; ++b) {
            const Vec2 k = (double(a) / grid_size) * G1 + (double(b) / grid_size) * G2;
            const RVector e = bands(model, k);
            const double d = (e.array() - mu).abs().minCoeff();
            if (d < best.delta) {
                best.delta = d;
                best.k = k;
            }
        }
    best.gapless = best.delta < policy.gap_threshold;
    return best;
}

double energy_scale(const HoppingModel& model, int grid_size)
{
    const auto [G1, G2] = reciprocal_basis(model.spec);
    double e0 = 0.0;
    for (int a = 0; a < grid_size; ++a)
        for (int b = 0; b < grid_size; ++b) {
            const Vec2 k = (double(a) / grid_size) * G1 + (double(b) / grid_size) * G2;
            e0 = std::max(e0, bands(model, k).cwiseAbs().maxCoeff());
        }
    return e0;
}

double midgap_chemical_potential(const HoppingModel& model, int grid_size, int filled_bands)
{
    const auto [G1, G2] = reciprocal_basis(model.spec);
    const int nc = model.spec.num_colors();
    if (filled_bands <= 0 || filled_bands >= nc)
        throw ValidationError("filled band count must lie strictly between 0 and the color count");
    double top = -std::numeric_limits<double>::infinity();
    double bottom = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid_size; ++a)
        for (int b = 0; b < grid_size; ++b) {
            const Vec2 k = (double(a) / grid_size) * G1 + (double(b) / grid_size) * G2;
            const RVector e = bands(model, k);
            top = std::max(top, e(filled_bands - 1));
            bottom = std::min(bottom, e(filled_bands));
        }
    return 0.5 * (top + bottom);
}

HoppingModel haldane_model(double t1, double t2, double phi, double W, double mu)
{
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw ValidationError("Haldane model needs t1 > 0 and t2 > 0");
    if (t2 / t1 >= 1.0 / 3.0)
        std::clog << "warning: t2/t1 >= 1/3, bands may overlap\n";
    HoppingModel m;
    const double s3 = std::sqrt(3.0);
    m.spec.ell1 = Vec2(1.5, -s3 / 2.0);
    m.spec.ell2 = Vec2(1.5, s3 / 2.0);
    m.spec.L = 1;
    m.spec.colors = {"A", "B"};
    m.spec.displacements = {Vec2(0.0, 0.0), Vec2(1.0, 0.0)};
    m.mu = mu;
    m.onsite = {W, -W};
    for (const Coeff& d : {Coeff(0, 0), Coeff(1, 0), Coeff(0, 1)}) {
        m.hoppings.push_back({d, 0, 1, Complex(-t1, 0.0)});
        m.hoppings.push_back({Coeff(-d), 1, 0, Complex(-t1, 0.0)});
    }
    const Coeff gamma[3] = {Coeff(1, -1), Coeff(0, 1), Coeff(-1, 0)};
    for (int alpha : {+1, -1})
        for (const Coeff& g : gamma) {
            // psi+_{x,A} psi-_{x + alpha gamma, A}: d = -alpha gamma
            m.hoppings.push_back({Coeff(-alpha * g), 0, 0, -t2 * std::exp(kI * (alpha * phi))});
            m.hoppings.push_back({Coeff(-alpha * g), 1, 1, -t2 * std::exp(-kI * (alpha * phi))});
        }
    validate_model(m, true);
    return m;
}

HaldaneMasses haldane_masses(double t2, double phi, double W)
{
    const double s = 3.0 * std::sqrt(3.0) * t2 * std::sin(phi);
    return {W + s, W - s};
}

void add_haldane_nn_interaction(HoppingModel& model, double v)
{
    for (const Coeff& d : {Coeff(0, 0), Coeff(1, 0), Coeff(0, 1)}) {
        model.interactions.push_back({d, 0, 1, v});
        model.interactions.push_back({Coeff(-d), 1, 0, v});
    }
    validate_model(model, true);
}

}  // namespace hallkit
