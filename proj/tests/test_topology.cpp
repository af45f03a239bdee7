#include <doctest.h>

#include "helpers.hpp"
#include "hallkit/topology.hpp"

using namespace hallkit;
using namespace testing;

namespace {

// Lower-band Chern number of a two-band model as the degree of k -> d(k)/|d(k)|,
// summing signed solid angles of grid triangles.
int skyrmion_number(const HoppingModel& m, int N)
{
    const auto [G1, G2] = reciprocal_basis(m.spec);
    auto dhat = [&](int a, int b) {
        const CMatrix H = bloch_hamiltonian(m, (double(a) / N) * G1 + (double(b) / N) * G2);
        Eigen::Vector3d d(H(0, 1).real(), -H(0, 1).imag(), 0.5 * (H(0, 0) - H(1, 1)).real());
        return Eigen::Vector3d(d.normalized());
    };
    auto solid = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
        return 2 * std::atan2(a.dot(b.cross(c)), 1 + a.dot(b) + b.dot(c) + c.dot(a));
    };
    double total = 0.0;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const auto p00 = dhat(a, b), p10 = dhat(a + 1, b), p11 = dhat(a + 1, b + 1), p01 = dhat(a, b + 1);
            total += solid(p00, p10, p11) + solid(p00, p11, p01);
        }
    return static_cast<int>(std::lround(total / (4 * kPi)));
}

}  // namespace

TEST_CASE("Chern number examples")
{
    CHECK(chern_number(haldane_model(1.0, 0.1, 0.0, 1.0), 0.0, 24).chern == 0);
    CHECK(chern_number(haldane_model(1.0, 0.1, kPi / 2, 0.0), 0.0, 24).chern == -1);
    CHECK(chern_number(haldane_model(1.0, 0.1, -kPi / 2, 0.0), 0.0, 24).chern == 1);
    CHECK(chern_number(haldane_model(1.0, 0.1, kPi / 2, -1.0), 0.0, 24).chern == 0);
    CHECK(chern_number(flat_model(), 0.0, 8).chern == 0);
}

TEST_CASE("Chern number against the degree of the d-vector map")
{
    for (int i = 0; i < 12; ++i) {
        const double phi = uniform(-kPi, kPi);
        const double W = uniform(-1.0, 1.0);
        const auto ms = haldane_masses(0.1, phi, W);
        if (std::min(std::abs(ms.m_plus), std::abs(ms.m_minus)) < 0.1) continue;
        const HoppingModel m = haldane_model(1.0, 0.1, phi, W);
        const double mu = midgap_chemical_potential(m, 48, 1);
        CHECK(chern_number(m, mu, 48).chern == skyrmion_number(m, 96));
        CHECK(chern_number(m, mu, 48).chern == std::lround(haldane_chern_analytic(0.1, phi, W)));
    }
    const HoppingModel a = anisotropic_haldane(1.3);
    CHECK(chern_number(a, midgap_chemical_potential(a, 48, 1), 48).chern == skyrmion_number(a, 96));
}

TEST_CASE("Chern result invariants")
{
    const HoppingModel m = haldane_model(1.0, 0.1, 1.0, 0.3);
    const double mu = midgap_chemical_potential(m, 48, 1);
    const ChernResult r = chern_number(m, mu, 30);
    CHECK(r.grid_size == 30);
    CHECK(std::abs(r.phase_sum - r.chern) < 1e-12);
    CHECK(std::abs(r.curvature_grid.sum() / (2 * kPi) - r.phase_sum) < 1e-12);
    CHECK(r.gap_at_grid > 0.0);

    SUBCASE("color-phase conjugation")
    {
        for (int N : {12, 24, 36})
            CHECK(chern_number(m, mu, N, default_policy(), ChernGauge::displaced).chern ==
                  chern_number(m, mu, N, default_policy(), ChernGauge::bravais).chern);
        const HoppingModel a = anisotropic_haldane(0.7);
        const double mua = midgap_chemical_potential(a, 48, 1);
        CHECK(chern_number(a, mua, 24, default_policy(), ChernGauge::displaced).chern ==
              chern_number(a, mua, 24).chern);
    }
    SUBCASE("grid doubling")
    {
        for (int N : {12, 24, 48}) CHECK(chern_number(m, mu, N).chern == chern_number(m, mu, 2 * N).chern);
    }
    SUBCASE("Fermi level on a band")
    {
        CHECK_THROWS_AS(chern_number(flat_model(), 1.0, 8), GuardError);
    }
}

TEST_CASE("non-interacting conductivity")
{
    SUBCASE("R2 point")
    {
        const Eigen::Matrix2d s = noninteracting_sigma(haldane_model(1.0, 0.1, kPi / 2, 0.0), 0.0, 64);
        CHECK(std::abs(s(0, 1) + 1 / (2 * kPi)) < 1e-4);
        CHECK(std::abs(s(1, 0) - 1 / (2 * kPi)) < 1e-4);
        CHECK(std::abs(s(0, 0)) < 1e-8);
        CHECK(std::abs(s(1, 1)) < 1e-8);
    }
    SUBCASE("antisymmetric part is the Chern number over 2 pi")
    {
        for (double phi : {-2.0, 0.6, 2.5}) {
            const HoppingModel m = haldane_model(1.0, 0.1, phi, 0.1);
            const double mu = midgap_chemical_potential(m, 48, 1);
            const Eigen::Matrix2d s = noninteracting_sigma(m, mu, 64);
            const int c = chern_number(m, mu, 32).chern;
            CHECK(std::abs(0.5 * (s(0, 1) - s(1, 0)) - c / (2 * kPi)) < 1e-3);
        }
    }
    SUBCASE("trivial insulators")
    {
        CHECK(noninteracting_sigma(flat_model(), 0.0, 16).norm() < 1e-12);
        const Eigen::Matrix2d s = noninteracting_sigma(haldane_model(1.0, 0.1, kPi / 2, -1.0), 0.0, 48);
        CHECK(std::abs(s(0, 1)) < 1e-4);
    }
}

TEST_CASE("Haldane phase diagram")
{
    CHECK(haldane_chern_analytic(0.1, 0.0, 1.0) == 0.0);
    CHECK(haldane_chern_analytic(0.1, kPi / 2, 0.0) == -1.0);
    CHECK(haldane_chern_analytic(0.1, -kPi / 2, 0.0) == 1.0);
    CHECK(haldane_chern_analytic(0.1, kPi / 2, -1.0) == 0.0);
    CHECK(haldane_chern_analytic(0.1, kPi / 2, 3 * std::sqrt(3.0) * 0.1) == -0.5);

    const auto rows = haldane_phase_diagram(1.0, 0.1, {0.0, kPi / 2}, {-1.0, 0.0, 1.0});
    REQUIRE(rows.size() == 6);
    auto find = [&](double phi, double W) {
        for (const auto& r : rows)
            if (r.phi == phi && r.W == W) return r;
        FAIL("row missing");
        return PhaseRow{};
    };
    const PhaseRow r1 = find(0.0, 1.0);
    CHECK(r1.chern_analytic == 0.0);
    CHECK(r1.chern_numeric == 0);
    const PhaseRow r2 = find(kPi / 2, 0.0);
    CHECK(r2.chern_numeric == -1);
    CHECK(r2.gap == doctest::Approx(0.3 * std::sqrt(3.0)).epsilon(1e-3));
    const PhaseRow r4 = find(kPi / 2, -1.0);
    CHECK(r4.m_plus == doctest::Approx(-0.48).epsilon(0.01));
    CHECK(r4.m_minus == doctest::Approx(-1.52).epsilon(0.01));
    CHECK(r4.chern_numeric == 0);
    for (const auto& r : rows) {
        if (r.phi == 0.0 && r.W == 0.0) continue;
        CHECK(r.numeric_available);
        CHECK_FALSE(r.near_critical);
        CHECK(r.chern_numeric == r.chern_analytic);
    }

    // phi = 0, W = 0 is gapless at both Dirac points
    const auto crit = haldane_phase_diagram(1.0, 0.1, {0.0}, {0.0});
    REQUIRE(crit.size() == 1);
    CHECK(crit[0].near_critical);
    CHECK_FALSE(crit[0].numeric_available);

    CHECK(linspace(-1.0, 1.0, 5) == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
}
