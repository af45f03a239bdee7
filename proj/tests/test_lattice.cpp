#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "hallkit/lattice.hpp"

using namespace hallkit;
using namespace testing;

namespace {

LatticeSpec spec_of(Vec2 a, Vec2 b, int L)
{
    LatticeSpec s = square_spec();
    s.ell1 = a;
    s.ell2 = b;
    s.L = L;
    return s;
}

}  // namespace

TEST_CASE("reciprocal basis")
{
    SUBCASE("square")
    {
        const auto [G1, G2] = reciprocal_basis(spec_of({1, 0}, {0, 1}, 1));
        CHECK((G1 - Vec2(2 * kPi, 0)).norm() < 1e-12);
        CHECK((G2 - Vec2(0, 2 * kPi)).norm() < 1e-12);
    }
    SUBCASE("honeycomb triangular basis")
    {
        const double s3 = std::sqrt(3.0);
        const auto [G1, G2] = reciprocal_basis(spec_of({1.5, -s3 / 2}, {1.5, s3 / 2}, 1));
        CHECK((G1 - (2 * kPi / 3) * Vec2(1, -s3)).norm() < 1e-12);
        CHECK((G2 - (2 * kPi / 3) * Vec2(1, s3)).norm() < 1e-12);
    }
    SUBCASE("rectangular")
    {
        const auto [G1, G2] = reciprocal_basis(spec_of({2, 0}, {0, 1}, 1));
        CHECK((G1 - Vec2(kPi, 0)).norm() < 1e-12);
        CHECK((G2 - Vec2(0, 2 * kPi)).norm() < 1e-12);
    }
    SUBCASE("duality and scaling")
    {
        for (int trial = 0; trial < 20; ++trial) {
            const Vec2 a(uniform(-2, 2), uniform(-2, 2)), b(uniform(-2, 2), uniform(-2, 2));
            const LatticeSpec s = spec_of(a, b, 1);
            if (s.cell_area() < 1e-3) continue;
            const auto [G1, G2] = reciprocal_basis(s);
            CHECK(std::abs(G1.dot(a) - 2 * kPi) < 1e-10);
            CHECK(std::abs(G1.dot(b)) < 1e-10);
            CHECK(std::abs(G2.dot(b) - 2 * kPi) < 1e-10);
            CHECK(std::abs(G2.dot(a)) < 1e-10);
            for (double c : {0.5, 2.0}) {
                const auto [H1, H2] = reciprocal_basis(spec_of(c * a, c * b, 1));
                CHECK((H1 - G1 / c).norm() < 1e-10);
                CHECK((H2 - G2 / c).norm() < 1e-10);
            }
        }
    }
    SUBCASE("degenerate basis is rejected")
    {
        CHECK_THROWS_AS(reciprocal_basis(spec_of({1, 1}, {2, 2}, 1)), ValidationError);
        CHECK_THROWS_AS(validate(spec_of({1, 0}, {0, 0}, 1)), ValidationError);
    }
}

TEST_CASE("cell area")
{
    const LatticeSpec s = spec_of({1.5, -0.5}, {0.25, 2.0}, 1);
    CHECK(s.cell_area() == std::abs(1.5 * 2.0 - (-0.5) * 0.25));
}

TEST_CASE("momentum grid")
{
    SUBCASE("L = 1")
    {
        const auto g = momentum_grid(spec_of({1, 0}, {0, 1}, 1));
        REQUIRE(g.size() == 1);
        CHECK(g[0].cartesian.norm() == 0.0);
    }
    SUBCASE("L = 2 square")
    {
        const auto g = momentum_grid(spec_of({1, 0}, {0, 1}, 2));
        REQUIRE(g.size() == 4);
        std::vector<Vec2> expect = {{0, 0}, {0, kPi}, {kPi, 0}, {kPi, kPi}};
        for (const auto& e : expect) {
            bool found = false;
            for (const auto& p : g) found |= (p.cartesian - e).norm() < 1e-12;
            CHECK(found);
        }
    }
    SUBCASE("L = 3 honeycomb basis")
    {
        const double s3 = std::sqrt(3.0);
        const LatticeSpec s = spec_of({1.5, -s3 / 2}, {1.5, s3 / 2}, 3);
        const auto [G1, G2] = reciprocal_basis(s);
        const auto g = momentum_grid(s);
        REQUIRE(g.size() == 9);
        for (const auto& p : g) {
            CHECK(p.n.x() >= 0);
            CHECK(p.n.x() < 3);
            CHECK((p.cartesian - (p.n.x() / 3.0) * G1 - (p.n.y() / 3.0) * G2).norm() < 1e-12);
        }
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = i + 1; j < g.size(); ++j) CHECK((g[i].cartesian - g[j].cartesian).norm() > 1e-10);
        // closed under addition modulo the reciprocal lattice
        std::set<std::pair<int, int>> all;
        for (const auto& p : g) all.insert({p.n.x(), p.n.y()});
        for (const auto& p : g)
            for (const auto& q : g) {
                const Coeff r = torus_wrap(Coeff(p.n + q.n), 3);
                CHECK(all.count({r.x(), r.y()}) == 1);
            }
    }
}

TEST_CASE("torus reduction")
{
    CHECK(reduce_coefficient(3, 4) == -1);
    CHECK(reduce_coefficient(2, 4) == -2);
    CHECK(reduce_coefficient(-2, 4) == -2);
    CHECK(reduce_coefficient(7, 5) == 2);
    CHECK(reduce_coefficient(-3, 5) == 2);
    for (int L = 1; L <= 6; ++L)
        for (int n = -13; n <= 13; ++n) {
            const int r = reduce_coefficient(n, L);
            CHECK(2 * r >= -L);
            CHECK(2 * r < L);
            CHECK((n - r) % L == 0);
        }

    const LatticeSpec s = spec_of({1, 0}, {0, 1}, 5);
    CHECK((torus_difference(Coeff(0, 0), Coeff(4, 0), s) - Vec2(-1, 0)).norm() < 1e-12);

    SUBCASE("antisymmetry away from ties")
    {
        const LatticeSpec h = spec_of({1.5, -0.8660254037844386}, {1.5, 0.8660254037844386}, 4);
        for (int a = -5; a <= 5; ++a)
            for (int b = -5; b <= 5; ++b) {
                const Coeff x(0, 0), y(a, b);
                const Coeff r = torus_reduce(Coeff(y - x), 4);
                if (r.x() == -2 || r.y() == -2) continue;
                CHECK((torus_difference(x, y, h) + torus_difference(y, x, h)).norm() < 1e-12);
            }
    }
}
