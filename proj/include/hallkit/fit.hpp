#pragma once

#include <vector>

#include "hallkit/common.hpp"

namespace hallkit {

struct SigmaEstimate {
    double value = 0.0;
    double error = 0.0;
    bool flagged = false;  // non-smooth small-omega behaviour
    std::vector<double> omegas;
    std::vector<double> slopes;  // -(1/A)[K(w) - K(0)]/w per omega
};

// Extrapolates slopes(omega) to omega = 0 with a least-squares quadratic; the error is the
// distance to the linear extrapolation.  Needs at least three points.
SigmaEstimate extrapolate_to_zero(const std::vector<double>& omegas, const std::vector<double>& slopes,
                                  const NumericPolicy& policy = default_policy());

// n positive bosonic Matsubara frequencies 2 pi m / beta, m = 1..n
std::vector<double> bosonic_frequencies(double beta, int n);

std::vector<double> gauss_legendre_nodes(int n);    // on [-1, 1]
std::vector<double> gauss_legendre_weights(int n);

}  // namespace hallkit
