#include "hallkit/topology.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "hallkit/parallel.hpp"

namespace hallkit {

namespace {

CMatrix displaced_phase(const LatticeSpec& spec, const Vec2& k)
{
    const int nc = spec.num_colors();
    CMatrix U = CMatrix::Zero(nc, nc);
    for (int s = 0; s < nc; ++s) U(s, s) = std::exp(kI * k.dot(spec.displacements[s]));
    return U;
}

Complex unit(Complex z)
{
    const double a = std::abs(z);
    if (a < 1e-300) throw GuardError("vanishing link variable; refine the k grid");
    return z / a;
}

}  // namespace

ChernResult chern_number(const HoppingModel& model, double mu, int grid_size, const NumericPolicy& policy,
                         ChernGauge gauge)
{
    if (grid_size < 2) throw ValidationError("chern_number needs grid_size >= 2");
    const auto [G1, G2] = reciprocal_basis(model.spec);
    const int N = grid_size;
    const int nc = model.spec.num_colors();

    std::vector<CMatrix> frame(static_cast<size_t>(N) * N);
    std::vector<int> filled(frame.size());
    std::vector<double> gap(frame.size());
    parallel_for(static_cast<long>(frame.size()), [&](long idx) {
        const int a = static_cast<int>(idx / N), b = static_cast<int>(idx % N);
        const Vec2 k = (double(a) / N) * G1 + (double(b) / N) * G2;
        CMatrix H = bloch_hamiltonian(model, k);
        if (gauge == ChernGauge::displaced) {
            const CMatrix U = displaced_phase(model.spec, k);
            H = U * H * U.adjoint();
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
        const RVector& e = es.eigenvalues();
        int nf = 0;
        while (nf < nc && e(nf) < mu) ++nf;
        filled[idx] = nf;
        gap[idx] = (e.array() - mu).abs().minCoeff();
        frame[idx] = es.eigenvectors().leftCols(nf);
    });

    ChernResult out;
    out.grid_size = N;
    out.gap_at_grid = *std::min_element(gap.begin(), gap.end());
    if (out.gap_at_grid < policy.gap_threshold) throw GuardError("gap condition violated");
    for (int f : filled)
        if (f != filled[0]) throw GuardError("gap condition violated: filling changes across the grid");
    out.curvature_grid = RMatrix::Zero(N, N);
    if (filled[0] == 0 || filled[0] == nc) return out;

    const CMatrix wrap1 = gauge == ChernGauge::displaced ? displaced_phase(model.spec, G1) : CMatrix::Identity(nc, nc);
    const CMatrix wrap2 = gauge == ChernGauge::displaced ? displaced_phase(model.spec, G2) : CMatrix::Identity(nc, nc);
    auto at = [&](int a, int b) -> CMatrix {
        CMatrix f = frame[static_cast<size_t>(a % N) * N + (b % N)];
        if (a >= N) f = wrap1 * f;
        if (b >= N) f = wrap2 * f;
        return f;
    };
    auto link = [&](int a, int b, int da, int db) {
        return unit((at(a, b).adjoint() * at(a + da, b + db)).determinant());
    };

    const double orientation = (G1.x() * G2.y() - G1.y() * G2.x()) > 0 ? 1.0 : -1.0;
    parallel_for(static_cast<long>(N) * N, [&](long idx) {
        const int a = static_cast<int>(idx / N), b = static_cast<int>(idx % N);
        const Complex loop = link(a, b, 1, 0) * link(a + 1, b, 0, 1) * std::conj(link(a, b + 1, 1, 0)) *
                             std::conj(link(a, b, 0, 1));
        out.curvature_grid(a, b) = -orientation * std::arg(loop);
    });
    double total = 0.0;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) total += out.curvature_grid(a, b);
    out.phase_sum = total / (2.0 * kPi);
    out.chern = static_cast<int>(std::lround(out.phase_sum));
    return out;
}

Eigen::Matrix2d noninteracting_sigma(const HoppingModel& model, double mu, int grid_size,
                                     const NumericPolicy& policy)
{
    if (grid_size < 8) throw ValidationError("noninteracting_sigma needs grid_size >= 8");
    const auto [G1, G2] = reciprocal_basis(model.spec);
    const int N = grid_size;
    const double spacing = std::min(G1.norm(), G2.norm()) / N;
    const double h = spacing / 2.0;
    const Vec2 ex(1.0, 0.0), ey(0.0, 1.0);

    std::vector<Eigen::Matrix2cd> local(static_cast<size_t>(N) * N);
    std::vector<double> gap(local.size());
    parallel_for(static_cast<long>(local.size()), [&](long idx) {
        const int a = static_cast<int>(idx / N), b = static_cast<int>(idx % N);
        const Vec2 k = (double(a) / N) * G1 + (double(b) / N) * G2;
        const BlochData bd = bloch_data(model, k, mu, policy);
        gap[idx] = (bd.bands.array() - mu).abs().minCoeff();
        auto P = [&](const Vec2& q) { return fermi_projector(model, q, mu, policy); };
        auto deriv = [&](const Vec2& e) -> CMatrix {
            return (8.0 * (P(k + h * e) - P(k - h * e)) - (P(k + 2 * h * e) - P(k - 2 * h * e))) / (12.0 * h);
        };
        const CMatrix d[2] = {deriv(ex), deriv(ey)};
        Eigen::Matrix2cd t;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) t(i, j) = (bd.projector * (d[i] * d[j] - d[j] * d[i])).trace();
        local[idx] = t;
    });
    if (*std::min_element(gap.begin(), gap.end()) < policy.gap_threshold)
        throw GuardError("gap condition violated");

    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (const auto& t : local) sum += t;
    const double area = std::abs(G1.x() * G2.y() - G1.y() * G2.x());
    const Eigen::Matrix2cd sigma = kI * sum * (area / (double(N) * N)) / std::pow(2.0 * kPi, 2);
    return sigma.real();
}

double haldane_chern_analytic(double t2, double phi, double W)
{
    const auto m = haldane_masses(t2, phi, W);
    auto sgn = [](double x) { return double((x > 0) - (x < 0)); };
    return 0.5 * (sgn(m.m_minus) - sgn(m.m_plus));
}

std::vector<PhaseRow> haldane_phase_diagram(double t1, double t2, const std::vector<double>& phi_grid,
                                            const std::vector<double>& W_grid, const PhaseDiagramOptions& options,
                                            const NumericPolicy& policy)
{
    std::vector<PhaseRow> rows(phi_grid.size() * W_grid.size());
    for (size_t i = 0; i < phi_grid.size(); ++i)
        for (size_t j = 0; j < W_grid.size(); ++j) {
            PhaseRow& r = rows[i * W_grid.size() + j];
            r.phi = phi_grid[i];
            r.W = W_grid[j];
        }
    const int N = options.k_grid;
    const auto half_band = 0.5 * policy.critical_band;
    parallel_for(static_cast<long>(rows.size()), [&](long idx) {
        PhaseRow& r = rows[idx];
        const auto m = haldane_masses(t2, r.phi, r.W);
        r.m_plus = m.m_plus;
        r.m_minus = m.m_minus;
        r.chern_analytic = haldane_chern_analytic(t2, r.phi, r.W);
        r.near_critical = std::min(std::abs(m.m_plus), std::abs(m.m_minus)) < half_band;
        const HoppingModel model = haldane_model(t1, t2, r.phi, r.W);
        r.mu = midgap_chemical_potential(model, N, 1);
        const auto [G1, G2] = reciprocal_basis(model.spec);
        double g = std::numeric_limits<double>::infinity();
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b)
                g = std::min(g, (bands(model, (double(a) / N) * G1 + (double(b) / N) * G2).array() - r.mu)
                                    .abs()
                                    .minCoeff());
        r.gap = g;
        if (g >= policy.gap_threshold) {
            try {
                r.chern_numeric = chern_number(model, r.mu, N, policy).chern;
                r.numeric_available = true;
            } catch (const GuardError&) {
                r.numeric_available = false;
            }
        }
    });
    return rows;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out;
    if (n <= 0) return out;
    if (n == 1) return {a};
    for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * double(i) / double(n - 1));
    return out;
}

}  // namespace hallkit
