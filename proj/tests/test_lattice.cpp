#include "doctest.h"

#include <stdexcept>
#include <algorithm>
#include <set>

#include "quench/lattice.hpp"
#include "quench/rng.hpp"

using namespace quench;

namespace {

// Independent coordinate arithmetic: decode site, step, re-encode.
std::vector<SiteIndex> brute_neighbors(int d, int L, SiteIndex site) {
    std::vector<int> c(static_cast<std::size_t>(d));
    SiteIndex rest = site;
    for (int a = d - 1; a >= 0; --a) {
        c[static_cast<std::size_t>(a)] = static_cast<int>(rest % L);
        rest /= L;
    }
    std::vector<SiteIndex> out;
    for (int a = 0; a < d; ++a)
        for (int step : {-1, 1}) {
            auto cc = c;
            cc[static_cast<std::size_t>(a)] = (cc[static_cast<std::size_t>(a)] + step + L) % L;
            SiteIndex s = 0;
            for (int b = 0; b < d; ++b) s = s * L + cc[static_cast<std::size_t>(b)];
            out.push_back(s);
        }
    return out;
}

SpinConfiguration random_config(const LatticeGeometry& g, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<Spin> s(static_cast<std::size_t>(g.num_sites()));
    for (auto& x : s) x = rng.below(2) ? Spin{1} : Spin{-1};
    return SpinConfiguration(g, std::move(s));
}

// Every bond enumerated from coordinates, once per (site, axis).
std::int64_t brute_bond_sum(const SpinConfiguration& c) {
    const auto& g = c.geometry();
    std::int64_t sum = 0;
    for (SiteIndex i = 0; i < g.num_sites(); ++i) {
        const auto nb = brute_neighbors(g.dimension(), g.linear_size(), i);
        for (int a = 0; a < g.dimension(); ++a) sum += c[i] * c[nb[static_cast<std::size_t>(2 * a + 1)]];
    }
    return sum;
}

}  // namespace

TEST_CASE("geometry counts") {
    LatticeGeometry g(3, 5);
    CHECK(g.num_sites() == 125);
    CHECK(g.coordination() == 6);
    CHECK(g.num_bonds() == 375);
    CHECK_THROWS_AS(LatticeGeometry(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(LatticeGeometry(2, 1), std::invalid_argument);
}

TEST_CASE("neighbor examples") {
    CHECK(neighbor_indices(LatticeGeometry(1, 4), 0) == std::vector<SiteIndex>{3, 1});
    CHECK(neighbor_indices(LatticeGeometry(2, 3), 4) == std::vector<SiteIndex>{1, 7, 3, 5});
    LatticeGeometry g(3, 4);
    CHECK(neighbor_indices(g, 0) == brute_neighbors(3, 4, 0));
}

TEST_CASE("neighbor table matches brute force and is symmetric") {
    for (auto [d, L] : {std::pair{1, 7}, {2, 5}, {3, 4}, {4, 3}}) {
        LatticeGeometry g(d, L);
        for (SiteIndex s = 0; s < g.num_sites(); ++s) {
            const auto nb = g.neighbors(s);
            const auto want = brute_neighbors(d, L, s);
            REQUIRE(std::equal(nb.begin(), nb.end(), want.begin(), want.end()));
            std::set<SiteIndex> distinct(nb.begin(), nb.end());
            CHECK(distinct.size() == static_cast<std::size_t>(2 * d));
            for (auto j : nb) {
                const auto back = g.neighbors(j);
                CHECK(std::find(back.begin(), back.end(), s) != back.end());
            }
        }
    }
}

TEST_CASE("out of range sites are rejected") {
    LatticeGeometry g(2, 4);
    CHECK_THROWS_AS(neighbor_indices(g, 16), std::invalid_argument);
    CHECK_THROWS_AS(neighbor_indices(g, -1), std::invalid_argument);
    SpinConfiguration c(g);
    CHECK_THROWS_AS(local_field_sum(c, 16), std::invalid_argument);
}

TEST_CASE("configuration validation") {
    LatticeGeometry g(1, 4);
    CHECK_THROWS_AS(SpinConfiguration(g, {1, 1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(SpinConfiguration(g, {1, 1, 1}), std::invalid_argument);
    SpinConfiguration c(g);
    CHECK_THROWS_AS(c.set(0, 2), std::invalid_argument);
}

TEST_CASE("magnetization") {
    LatticeGeometry g(2, 4);
    SpinConfiguration up(g);
    CHECK(total_magnetization(up) == 16);
    std::vector<Spin> half(16, 1);
    for (int i = 0; i < 8; ++i) half[static_cast<std::size_t>(i)] = -1;
    CHECK(total_magnetization(SpinConfiguration(g, half)) == 0);

    LatticeGeometry g3(3, 5);
    for (std::uint64_t seed = 1; seed < 20; ++seed) {
        auto c = random_config(g3, seed);
        std::int64_t m = 0;
        for (auto s : c.spins()) m += s;
        CHECK(total_magnetization(c) == m);
        CHECK(std::abs(m) <= g3.num_sites());
        CHECK((m - g3.num_sites()) % 2 == 0);
    }
}

TEST_CASE("bond energy examples") {
    CHECK(bond_energy(SpinConfiguration(LatticeGeometry(3, 4)), 1.0) == -192.0);
    LatticeGeometry g(2, 4);
    std::vector<Spin> stag(16);
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) stag[static_cast<std::size_t>(4 * x + y)] = ((x + y) % 2) ? Spin{-1} : Spin{1};
    CHECK(bond_energy(SpinConfiguration(g, stag), 1.0) == 32.0);
    CHECK(bond_energy(SpinConfiguration(g, stag), 2.5) == 80.0);
}

TEST_CASE("bond sum matches enumeration") {
    for (auto [d, L] : {std::pair{1, 9}, {2, 6}, {3, 4}, {4, 3}}) {
        LatticeGeometry g(d, L);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            auto c = random_config(g, seed * 31 + static_cast<std::uint64_t>(d));
            CHECK(bond_sum(c) == brute_bond_sum(c));
            CHECK(std::abs(bond_energy(c, 1.0)) <= static_cast<double>(g.num_bonds()));
        }
    }
}

TEST_CASE("local field sum") {
    SpinConfiguration up(LatticeGeometry(2, 5));
    CHECK(local_field_sum(up, 7) == 4);
    SpinConfiguration down(LatticeGeometry(3, 4));
    down.flip_all();
    CHECK(local_field_sum(down, 0) == -6);

    LatticeGeometry g(3, 5);
    auto c = random_config(g, 99);
    for (SiteIndex i = 0; i < g.num_sites(); ++i) {
        int f = 0;
        for (auto j : brute_neighbors(3, 5, i)) f += c[j];
        CHECK(local_field_sum(c, i) == f);
        CHECK((f + 6) % 2 == 0);
    }
}

TEST_CASE("single flip changes energy by 2 J s f") {
    const double J = 1.3;
    for (auto [d, L] : {std::pair{2, 5}, {3, 4}}) {
        LatticeGeometry g(d, L);
        auto c = random_config(g, 5);
        for (SiteIndex i = 0; i < g.num_sites(); ++i) {
            const double before = bond_energy(c, J);
            const double predicted = 2.0 * J * c[i] * local_field_sum(c, i);
            c.flip(i);
            CHECK(bond_energy(c, J) - before == doctest::Approx(predicted));
        }
    }
}

TEST_CASE("global flip and translation symmetry") {
    LatticeGeometry g(3, 4);
    auto c = random_config(g, 17);
    auto f = c;
    f.flip_all();
    CHECK(bond_energy(f, 1.0) == bond_energy(c, 1.0));
    CHECK(total_magnetization(f) == -total_magnetization(c));

    for (int axis = 0; axis < 3; ++axis) {
        std::vector<Spin> shifted(static_cast<std::size_t>(g.num_sites()));
        for (SiteIndex i = 0; i < g.num_sites(); ++i) {
            auto coord = g.coordinates(i);
            coord[static_cast<std::size_t>(axis)] += 1;
            shifted[static_cast<std::size_t>(g.site_at(coord))] = c[i];
        }
        CHECK(bond_energy(SpinConfiguration(g, shifted), 1.0) == bond_energy(c, 1.0));
    }
}
