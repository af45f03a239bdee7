#include "hallkit/torus.hpp"

#include <cmath>

namespace hallkit {

Vec2 TorusSystem::position(int m) const
{
    return model.spec.to_cartesian(site_coeff_of(m)) + model.spec.displacements[color_of(m)];
}

TorusSystem make_torus(const HoppingModel& model, int L)
{
    if (L < 1) throw ValidationError("torus side L must be >= 1");
    const int r = stencil_radius(model);
    if (L < 2 * r)
        throw ValidationError("stencil radius " + std::to_string(r) + " is wider than the torus L=" +
                              std::to_string(L));
    TorusSystem ts;
    ts.model = model;
    ts.model.spec.L = L;
    ts.L = L;
    ts.num_colors = model.spec.num_colors();
    ts.num_modes = L * L * ts.num_colors;
    const int n = ts.num_modes;
    ts.h = CMatrix::Zero(n, n);
    ts.v = RMatrix::Zero(n, n);
    for (int s = 0; s < L * L; ++s) {
        const Coeff x = site_coeff(s, L);
        for (int c = 0; c < ts.num_colors; ++c) ts.h(ts.mode(s, c), ts.mode(s, c)) += model.onsite_energy(c);
        for (const auto& hop : model.hoppings) {
            const int y = site_index(torus_wrap(x - hop.d, L), L);
            ts.h(ts.mode(s, hop.from), ts.mode(y, hop.to)) += hop.amplitude;
        }
        for (const auto& in : model.interactions) {
            const int y = site_index(torus_wrap(x - in.d, L), L);
            ts.v(ts.mode(s, in.from), ts.mode(y, in.to)) += in.strength;
        }
    }
    for (int a = 0; a < n; ++a)
        if (ts.v(a, a) != 0.0) throw ValidationError("interaction wraps onto a single mode on this torus");
    ts.dx = RMatrix::Zero(n, n);
    ts.dy = RMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Vec2 d = torus_difference(ts.site_coeff_of(a), ts.site_coeff_of(b), ts.model.spec) +
                           model.spec.displacements[ts.color_of(b)] - model.spec.displacements[ts.color_of(a)];
            ts.dx(a, b) = d.x();
            ts.dy(a, b) = d.y();
        }
    return ts;
}

HoppingModel without_intracell_offsets(const HoppingModel& model)
{
    HoppingModel m = model;
    for (auto& r : m.spec.displacements) r.setZero();
    return m;
}

Complex eta(double z, bool coincident)
{
    if (coincident) return 0.0;
    if (z == 0.0) return 1.0;
    // (1 - e^{-iz})/(iz) without the cancellation at small z
    const double s = std::sin(0.5 * z);
    return Complex(std::sin(z) / z, -2.0 * s * s / z);
}

CMatrix current_kernel(const TorusSystem& ts, int i)
{
    const int n = ts.num_modes;
    CMatrix M = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (ts.h(a, b) != Complex(0.0)) M(a, b) = kI * ts.h(a, b) * ts.antisymmetric_displacement(a, b)(i - 1);
    return M;
}

CMatrix diamagnetic_kernel(const TorusSystem& ts, int i, int j)
{
    const int n = ts.num_modes;
    CMatrix M = CMatrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (ts.h(a, b) != Complex(0.0)) {
                const Vec2 d = ts.antisymmetric_displacement(a, b);
                M(a, b) = ts.h(a, b) * d(i - 1) * d(j - 1);
            }
    return M;
}

CMatrix momentum_kernel(const TorusSystem& ts, int alpha, const Coeff& p)
{
    const int n = ts.num_modes;
    const Vec2 pc = momentum_point(ts.model.spec, p).cartesian;
    CMatrix M = CMatrix::Zero(n, n);
    if (alpha == kDensity) {
        for (int a = 0; a < n; ++a) M(a, a) = std::exp(-kI * pc.dot(ts.position(a)));
        return M;
    }
    if (alpha >= 3) {
        const int color = alpha - 3;
        if (color >= ts.num_colors) throw ValidationError("observable refers to an unknown color");
        for (int a = 0; a < n; ++a)
            if (ts.color_of(a) == color)
                M(a, a) = std::exp(-kI * pc.dot(ts.model.spec.to_cartesian(ts.site_coeff_of(a))));
        return M;
    }
    if (alpha != 1 && alpha != 2) throw ValidationError("observable index must be 0, 1, 2 or a color");
    const int i = alpha - 1;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b || ts.h(a, b) == Complex(0.0)) continue;
            const Vec2 dab = ts.displacement(a, b), dba = ts.displacement(b, a);
            const Complex fwd = std::exp(-kI * pc.dot(ts.position(a))) * dab(i) * eta(pc.dot(dab), dab.isZero());
            const Complex bwd = std::exp(-kI * pc.dot(ts.position(b))) * dba(i) * eta(pc.dot(dba), dba.isZero());
            M(a, b) = 0.5 * kI * ts.h(a, b) * (fwd - bwd);
        }
    return M;
}

CMatrix bond_current_kernel(const TorusSystem& ts, int a, int b)
{
    const int n = ts.num_modes;
    CMatrix M = CMatrix::Zero(n, n);
    if (a == b) return M;
    M(a, b) = kI * ts.h(a, b);
    M(b, a) = -kI * ts.h(b, a);
    return M;
}

}  // namespace hallkit
