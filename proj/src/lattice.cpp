#include "hallkit/lattice.hpp"

#include <cmath>

namespace hallkit {

namespace {

int floor_div(int a, int b)
{
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

double LatticeSpec::cell_area() const
{
    return std::abs(ell1.x() * ell2.y() - ell1.y() * ell2.x());
}

int LatticeSpec::color_index(const std::string& name) const
{
    for (int i = 0; i < num_colors(); ++i)
        if (colors[i] == name) return i;
    return -1;
}

void validate(const LatticeSpec& spec)
{
    if (!(spec.cell_area() > 0.0) || !std::isfinite(spec.cell_area()))
        throw ValidationError("lattice basis is degenerate (zero cell area)");
    if (spec.L < 1) throw ValidationError("torus side L must be >= 1");
    if (spec.colors.empty()) throw ValidationError("at least one color is required");
    if (spec.displacements.size() != spec.colors.size())
        throw ValidationError("every color needs exactly one displacement vector");
    for (int i = 0; i < spec.num_colors(); ++i)
        for (int j = i + 1; j < spec.num_colors(); ++j)
            if (spec.colors[i] == spec.colors[j])
                throw ValidationError("duplicate color label '" + spec.colors[i] + "'");
}

std::pair<Vec2, Vec2> reciprocal_basis(const LatticeSpec& spec)
{
    Eigen::Matrix2d E;
    E.row(0) = spec.ell1.transpose();
    E.row(1) = spec.ell2.transpose();
    if (!(spec.cell_area() > 0.0))
        throw ValidationError("lattice basis is degenerate (zero cell area)");
    // rows of E times columns of G give 2 pi delta
    const Eigen::Matrix2d G = 2.0 * kPi * E.inverse();
    return {G.col(0), G.col(1)};
}

MomentumPoint momentum_point(const LatticeSpec& spec, const Coeff& n)
{
    const auto [G1, G2] = reciprocal_basis(spec);
    MomentumPoint p;
    p.n = n;
    p.cartesian = (double(n.x()) / spec.L) * G1 + (double(n.y()) / spec.L) * G2;
    return p;
}

std::vector<MomentumPoint> momentum_grid(const LatticeSpec& spec)
{
    std::vector<MomentumPoint> out;
    out.reserve(static_cast<size_t>(spec.L) * spec.L);
    for (int a = 0; a < spec.L; ++a)
        for (int b = 0; b < spec.L; ++b) out.push_back(momentum_point(spec, Coeff(a, b)));
    return out;
}

int reduce_coefficient(int n, int L)
{
    return n - L * floor_div(2 * n + L, 2 * L);
}

Coeff torus_reduce(const Coeff& n, int L)
{
    return Coeff(reduce_coefficient(n.x(), L), reduce_coefficient(n.y(), L));
}

Coeff torus_wrap(const Coeff& n, int L)
{
    auto w = [L](int v) { return ((v % L) + L) % L; };
    return Coeff(w(n.x()), w(n.y()));
}

Vec2 torus_difference(const Coeff& x, const Coeff& y, const LatticeSpec& spec)
{
    return spec.to_cartesian(torus_reduce(y - x, spec.L));
}

}  // namespace hallkit
