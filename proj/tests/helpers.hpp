#pragma once

#include <random>

#include "hallkit/model.hpp"

namespace testing {

using namespace hallkit;

inline LatticeSpec square_spec(int colors = 1)
{
    LatticeSpec s;
    s.ell1 = Vec2(1.0, 0.0);
    s.ell2 = Vec2(0.0, 1.0);
    for (int c = 0; c < colors; ++c) {
        s.colors.push_back(std::string(1, char('A' + c)));
        s.displacements.push_back(Vec2::Zero());
    }
    return s;
}

// one color, nearest-neighbour amplitude t
inline HoppingModel square_model(double t = -1.0)
{
    HoppingModel m;
    m.spec = square_spec();
    m.hoppings = {{Coeff(1, 0), 0, 0, t}, {Coeff(0, 1), 0, 0, t}};
    validate_model(m);
    return m;
}

// k-independent diag(e0, e1)
inline HoppingModel flat_model(double e0 = 1.0, double e1 = -1.0, double mu = 0.0)
{
    HoppingModel m;
    m.spec = square_spec(2);
    m.onsite = {e0, e1};
    m.mu = mu;
    validate_model(m);
    return m;
}

// two colors in one cell, hopping t between them and coupling v on the bond
inline HoppingModel dimer_model(double t, double v, double U)
{
    HoppingModel m;
    m.spec = square_spec(2);
    m.spec.displacements[1] = Vec2(0.5, 0.0);
    m.hoppings = {{Coeff(0, 0), 0, 1, t}};
    m.interactions = {{Coeff(0, 0), 0, 1, v}};
    m.U = U;
    validate_model(m);
    return m;
}

inline HoppingModel single_level(double eps, double mu = 0.0)
{
    HoppingModel m;
    m.spec = square_spec(1);
    m.onsite = {eps};
    m.mu = mu;
    validate_model(m);
    return m;
}

// Haldane model with one nearest-neighbour bond scaled, which breaks the three-fold rotation
inline HoppingModel anisotropic_haldane(double scale = 1.3)
{
    HoppingModel m = haldane_model(1.0, 0.1, kPi / 2, 0.2);
    for (auto& h : m.hoppings)
        if ((h.d == Coeff(1, 0) && h.from == 0 && h.to == 1) || (h.d == Coeff(-1, 0) && h.from == 1 && h.to == 0))
            h.amplitude *= scale;
    validate_model(m, true);
    return m;
}

inline HoppingModel haldane_hubbard(double U, double mu = 0.0)
{
    HoppingModel m = haldane_model(1.0, 0.1, kPi / 2, 0.0, mu);
    add_haldane_nn_interaction(m, 1.0);
    m.U = U;
    return m;
}

// one color on the square lattice, complex diagonal hopping breaks k -> -k, nearest-neighbour coupling
inline HoppingModel chiral_square(double U, double mu, double t2 = 0.3, double phi = 1.1)
{
    HoppingModel m = square_model(-1.0);
    m.hoppings.push_back({Coeff(1, 1), 0, 0, t2 * std::exp(kI * phi)});
    m.hoppings.push_back({Coeff(1, -1), 0, 0, 0.5 * t2 * std::exp(-kI * phi)});
    m.interactions = {{Coeff(1, 0), 0, 0, 1.0}, {Coeff(0, 1), 0, 0, 1.0}};
    m.U = U;
    m.mu = mu;
    validate_model(m);
    return m;
}

inline std::mt19937_64& rng()
{
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

}  // namespace testing
