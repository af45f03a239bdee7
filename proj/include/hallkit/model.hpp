#pragma once

#include <vector>

#include "hallkit/common.hpp"
#include "hallkit/lattice.hpp"

namespace hallkit {

// H_{from,to}(d): term psi+_{x,from} amplitude psi-_{x-d,to}
struct Hopping {
    Coeff d{0, 0};
    int from = 0;
    int to = 0;
    Complex amplitude{0.0, 0.0};
};

// v_{from,to}(d): term n_{x,from} strength n_{x-d,to}
struct Interaction {
    Coeff d{0, 0};
    int from = 0;
    int to = 0;
    double strength = 0.0;
};

struct HoppingModel {
    LatticeSpec spec;
    std::vector<Hopping> hoppings;
    std::vector<Interaction> interactions;
    std::vector<double> onsite;  // per color; empty means zero
    double mu = 0.0;
    double U = 0.0;

    double onsite_energy(int color) const
    {
        return onsite.empty() ? 0.0 : onsite[static_cast<size_t>(color)];
    }
};

struct BlochData {
    Vec2 k{0.0, 0.0};
    CMatrix matrix;
    RVector bands;
    CMatrix eigenvectors;  // columns, ascending
    CMatrix projector;
};

struct GapInfo {
    double delta = 0.0;
    Vec2 k{0.0, 0.0};
    bool gapless = false;
};

// Merges duplicate entries, auto-completes Hermitian partners unless strict,
// then checks every invariant.  Throws ValidationError naming the offending entry.
void validate_model(HoppingModel& model, bool strict = false);

int stencil_radius(const HoppingModel& model);

CMatrix bloch_hamiltonian(const HoppingModel& model, const Vec2& k);
RVector bands(const HoppingModel& model, const Vec2& k);
BlochData bloch_data(const HoppingModel& model, const Vec2& k, double mu,
                     const NumericPolicy& policy = default_policy());

// Spectral projector on bands strictly below mu; throws GuardError if a band sits at mu.
CMatrix fermi_projector(const HoppingModel& model, const Vec2& k, double mu,
                        const NumericPolicy& policy = default_policy());

// Minimum of dist(mu, spec H(k)) over the grid_size x grid_size grid spanned by G1, G2.
GapInfo spectral_gap(const HoppingModel& model, int grid_size, double mu,
                     const NumericPolicy& policy = default_policy());
inline GapInfo spectral_gap(const HoppingModel& model, int grid_size)
{
    return spectral_gap(model, grid_size, model.mu);
}

double energy_scale(const HoppingModel& model, int grid_size);

// Midpoint between the highest filled and lowest empty level over a grid, at fixed filling.
double midgap_chemical_potential(const HoppingModel& model, int grid_size, int filled_bands);

HoppingModel haldane_model(double t1, double t2, double phi, double W, double mu = 0.0);

struct HaldaneMasses {
    double m_plus;
    double m_minus;
};
HaldaneMasses haldane_masses(double t2, double phi, double W);

// Nearest-neighbour density-density coupling on the three A-B bonds of the Haldane lattice.
void add_haldane_nn_interaction(HoppingModel& model, double v);

}  // namespace hallkit
