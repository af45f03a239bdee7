#pragma once

#include <vector>

#include "hallkit/model.hpp"

namespace hallkit {

// Single-particle data of a model on the L x L torus.  Modes are site-major,
// color-minor: mode = site * |I| + color, site = n1 * L + n2.
struct TorusSystem {
    HoppingModel model;  // spec.L equals L
    int L = 1;
    int num_colors = 1;
    int num_modes = 1;
    CMatrix h;   // image-summed hopping plus onsite, no mu
    RMatrix v;   // image-summed interaction, V = sum_ab v_ab n_a n_b
    RMatrix dx;  // literal bond displacement (y-x)_L + r_s' - r_s, x component
    RMatrix dy;

    int mode(int site, int color) const { return site * num_colors + color; }
    int site_of(int mode) const { return mode / num_colors; }
    int color_of(int mode) const { return mode % num_colors; }
    Coeff site_coeff_of(int mode) const { return hallkit::site_coeff(site_of(mode), L); }
    Vec2 position(int mode) const;  // representative x plus r_sigma
    Vec2 displacement(int a, int b) const { return Vec2(dx(a, b), dy(a, b)); }
    // (d_ab - d_ba)/2; differs from the literal value only on bonds of length exactly L/2
    Vec2 antisymmetric_displacement(int a, int b) const
    {
        return 0.5 * (displacement(a, b) - displacement(b, a));
    }
};

// Throws ValidationError if the stencil is wider than the torus (L < 2 * radius).
TorusSystem make_torus(const HoppingModel& model, int L);

// Copy of the model with every r_sigma set to zero; drops the intra-cell part of the current.
HoppingModel without_intracell_offsets(const HoppingModel& model);

// Observable labels: 0 density, 1 and 2 current components, 3 + sigma the density of color sigma.
inline constexpr int kDensity = 0;
inline int color_observable(int color) { return 3 + color; }

// Single-particle kernels M of quadratic operators sum_ab M_ab psi+_a psi-_b.
CMatrix current_kernel(const TorusSystem& ts, int i);
CMatrix diamagnetic_kernel(const TorusSystem& ts, int i, int j);
CMatrix momentum_kernel(const TorusSystem& ts, int alpha, const Coeff& p);
CMatrix bond_current_kernel(const TorusSystem& ts, int a, int b);

Complex eta(double z, bool coincident);

}  // namespace hallkit
