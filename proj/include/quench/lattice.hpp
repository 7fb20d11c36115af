#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace quench {

using SiteIndex = std::int64_t;

// Periodic hypercubic lattice of linear size L in d dimensions.
//
// Sites are indexed row-major over coordinates with axis 0 slowest:
//   site = sum_a coord[a] * L^(d-1-a)
// Neighbors are listed axis by axis, the -1 step before the +1 step.
// L = 2 is accepted for tests only; the two neighbors along an axis coincide.
class LatticeGeometry {
public:
    LatticeGeometry(int d, int L);

    int dimension() const { return d_; }
    int linear_size() const { return L_; }
    SiteIndex num_sites() const { return n_; }
    int coordination() const { return 2 * d_; }
    SiteIndex num_bonds() const { return static_cast<SiteIndex>(d_) * n_; }

    std::vector<int> coordinates(SiteIndex site) const;
    SiteIndex site_at(std::span<const int> coords) const;

    // Precomputed neighbor table, row `site` holds coordination() entries.
    std::span<const std::int32_t> neighbors(SiteIndex site) const;
    std::span<const std::int32_t> neighbor_table() const { return *table_; }

    friend bool operator==(const LatticeGeometry& a, const LatticeGeometry& b) {
        return a.d_ == b.d_ && a.L_ == b.L_;
    }

private:
    int d_;
    int L_;
    SiteIndex n_;
    std::vector<SiteIndex> stride_;
    std::shared_ptr<const std::vector<std::int32_t>> table_;
};

// Computed from coordinates, independent of the cached table.
std::vector<SiteIndex> neighbor_indices(const LatticeGeometry& geometry, SiteIndex site);

using Spin = std::int8_t;

class SpinConfiguration {
public:
    // All spins up.
    explicit SpinConfiguration(LatticeGeometry geometry);
    SpinConfiguration(LatticeGeometry geometry, std::vector<Spin> spins);

    const LatticeGeometry& geometry() const { return geometry_; }
    SiteIndex size() const { return geometry_.num_sites(); }

    Spin operator[](SiteIndex i) const { return spins_[static_cast<std::size_t>(i)]; }
    void set(SiteIndex i, Spin s);
    void flip(SiteIndex i) { spins_[static_cast<std::size_t>(i)] = static_cast<Spin>(-spins_[static_cast<std::size_t>(i)]); }
    void flip_all();

    std::span<const Spin> spins() const { return spins_; }
    std::span<Spin> mutable_spins() { return spins_; }

    friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

private:
    LatticeGeometry geometry_;
    std::vector<Spin> spins_;
};

std::int64_t total_magnetization(const SpinConfiguration& config);

// Sum over neighbor spins; bounded in [-2d, 2d].
int local_field_sum(const SpinConfiguration& config, SiteIndex site);

// Sum_{bonds} s_i s_j with every bond counted once (d*N bonds).
std::int64_t bond_sum(const SpinConfiguration& config);

// -J * bond_sum
double bond_energy(const SpinConfiguration& config, double J);

}  // namespace quench
