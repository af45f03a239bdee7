#pragma once

#include <vector>

#include "hallkit/model.hpp"

namespace hallkit {

struct ChernResult {
    int chern = 0;
    RMatrix curvature_grid;  // plaquette phases, indexed by the lower-left grid corner
    int grid_size = 0;
    double gap_at_grid = 0.0;
    double phase_sum = 0.0;  // sum of plaquette phases / 2 pi, before rounding
};

enum class ChernGauge {
    bravais,    // H(k) = sum_x e^{ik.x} H(x), periodic in k
    displaced,  // U(k) H(k) U(k)^dagger with U = diag(e^{ik.r_sigma})
};

// Link-variable plaquette discretization over filled-band frames.
ChernResult chern_number(const HoppingModel& model, double mu, int grid_size,
                         const NumericPolicy& policy = default_policy(),
                         ChernGauge gauge = ChernGauge::bravais);

// sigma_ij = i int dk/(2pi)^2 Tr P[d_i P, d_j P], Cartesian derivatives.
Eigen::Matrix2d noninteracting_sigma(const HoppingModel& model, double mu, int grid_size,
                                     const NumericPolicy& policy = default_policy());

struct PhaseRow {
    double phi = 0.0;
    double W = 0.0;
    double m_plus = 0.0;
    double m_minus = 0.0;
    double chern_analytic = 0.0;  // half-integer exactly on a critical line
    int chern_numeric = 0;
    bool numeric_available = false;
    double gap = 0.0;
    double mu = 0.0;
    bool near_critical = false;
};

struct PhaseDiagramOptions {
    int k_grid = 24;
};

std::vector<PhaseRow> haldane_phase_diagram(double t1, double t2, const std::vector<double>& phi_grid,
                                            const std::vector<double>& W_grid,
                                            const PhaseDiagramOptions& options = {},
                                            const NumericPolicy& policy = default_policy());

double haldane_chern_analytic(double t2, double phi, double W);

std::vector<double> linspace(double a, double b, int n);

}  // namespace hallkit
