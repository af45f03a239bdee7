#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hallkit/common.hpp"

namespace hallkit {

struct LatticeSpec {
    Vec2 ell1{1.0, 0.0};
    Vec2 ell2{0.0, 1.0};
    int L = 1;
    std::vector<std::string> colors;
    std::vector<Vec2> displacements;  // r_sigma, same order as colors

    int num_colors() const { return static_cast<int>(colors.size()); }
    int num_sites() const { return L * L; }
    int num_modes() const { return L * L * num_colors(); }
    double cell_area() const;
    int color_index(const std::string& name) const;  // -1 if absent
    Vec2 to_cartesian(const Coeff& n) const { return n.x() * ell1 + n.y() * ell2; }
};

struct MomentumPoint {
    Coeff n{0, 0};
    Vec2 cartesian{0.0, 0.0};
};

// Throws ValidationError on a degenerate basis, L < 1 or mismatched colors.
void validate(const LatticeSpec& spec);

std::pair<Vec2, Vec2> reciprocal_basis(const LatticeSpec& spec);

std::vector<MomentumPoint> momentum_grid(const LatticeSpec& spec);
MomentumPoint momentum_point(const LatticeSpec& spec, const Coeff& n);

// {n}_L = n - L*floor(n/L + 1/2), in [-L/2, L/2)
int reduce_coefficient(int n, int L);
Coeff torus_reduce(const Coeff& n, int L);
Coeff torus_wrap(const Coeff& n, int L);  // representative in [0, L)

// (y - x)_L in Cartesian coordinates.
Vec2 torus_difference(const Coeff& x, const Coeff& y, const LatticeSpec& spec);

// Site index of a representative coefficient pair, n1-major.
inline int site_index(const Coeff& n, int L) { return n.x() * L + n.y(); }
inline Coeff site_coeff(int s, int L) { return Coeff(s / L, s % L); }

}  // namespace hallkit
