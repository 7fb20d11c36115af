#include "quench/lattice.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace quench {

namespace {

void check_site(const LatticeGeometry& g, SiteIndex site) {
    if (site < 0 || site >= g.num_sites())
        throw std::invalid_argument("site index " + std::to_string(site) + " out of range [0, " +
                                    std::to_string(g.num_sites()) + ")");
}

}  // namespace

LatticeGeometry::LatticeGeometry(int d, int L) : d_(d), L_(L), n_(1) {
    if (d < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    if (L < 2) throw std::invalid_argument("linear size must be >= 2");
    for (int a = 0; a < d; ++a) {
        if (n_ > std::numeric_limits<std::int32_t>::max() / L)
            throw std::invalid_argument("lattice too large for 32-bit site indices");
        n_ *= L;
    }
    stride_.assign(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a) stride_[static_cast<std::size_t>(a)] = stride_[static_cast<std::size_t>(a) + 1] * L;

    auto table = std::make_shared<std::vector<std::int32_t>>(static_cast<std::size_t>(n_ * 2 * d));
    for (SiteIndex s = 0; s < n_; ++s) {
        auto nbrs = neighbor_indices(*this, s);
        for (std::size_t k = 0; k < nbrs.size(); ++k)
            (*table)[static_cast<std::size_t>(s * 2 * d) + k] = static_cast<std::int32_t>(nbrs[k]);
    }
    table_ = std::move(table);
}

std::vector<int> LatticeGeometry::coordinates(SiteIndex site) const {
    check_site(*this, site);
    std::vector<int> c(static_cast<std::size_t>(d_));
    for (int a = 0; a < d_; ++a) c[static_cast<std::size_t>(a)] = static_cast<int>((site / stride_[static_cast<std::size_t>(a)]) % L_);
    return c;
}

SiteIndex LatticeGeometry::site_at(std::span<const int> coords) const {
    if (static_cast<int>(coords.size()) != d_) throw std::invalid_argument("coordinate rank mismatch");
    SiteIndex s = 0;
    for (int a = 0; a < d_; ++a) {
        int c = coords[static_cast<std::size_t>(a)] % L_;
        if (c < 0) c += L_;
        s += c * stride_[static_cast<std::size_t>(a)];
    }
    return s;
}

std::span<const std::int32_t> LatticeGeometry::neighbors(SiteIndex site) const {
    check_site(*this, site);
    const auto z = static_cast<std::size_t>(2 * d_);
    return std::span<const std::int32_t>(*table_).subspan(static_cast<std::size_t>(site) * z, z);
}

std::vector<SiteIndex> neighbor_indices(const LatticeGeometry& geometry, SiteIndex site) {
    auto coords = geometry.coordinates(site);
    std::vector<SiteIndex> out;
    out.reserve(static_cast<std::size_t>(2 * geometry.dimension()));
    for (int a = 0; a < geometry.dimension(); ++a) {
        for (int step : {-1, +1}) {
            auto c = coords;
            c[static_cast<std::size_t>(a)] += step;
            out.push_back(geometry.site_at(c));
        }
    }
    return out;
}

SpinConfiguration::SpinConfiguration(LatticeGeometry geometry)
    : geometry_(std::move(geometry)), spins_(static_cast<std::size_t>(geometry_.num_sites()), Spin{1}) {}

SpinConfiguration::SpinConfiguration(LatticeGeometry geometry, std::vector<Spin> spins)
    : geometry_(std::move(geometry)), spins_(std::move(spins)) {
    if (static_cast<SiteIndex>(spins_.size()) != geometry_.num_sites())
        throw std::invalid_argument("spin array length does not match lattice site count");
    for (Spin s : spins_)
        if (s != 1 && s != -1) throw std::invalid_argument("spin values must be -1 or +1");
}

void SpinConfiguration::set(SiteIndex i, Spin s) {
    check_site(geometry_, i);
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be -1 or +1");
    spins_[static_cast<std::size_t>(i)] = s;
}

void SpinConfiguration::flip_all() {
    for (auto& s : spins_) s = static_cast<Spin>(-s);
}

std::int64_t total_magnetization(const SpinConfiguration& config) {
    const auto s = config.spins();
    return std::accumulate(s.begin(), s.end(), std::int64_t{0});
}

int local_field_sum(const SpinConfiguration& config, SiteIndex site) {
    int sum = 0;
    for (auto j : config.geometry().neighbors(site)) sum += config[j];
    return sum;
}

std::int64_t bond_sum(const SpinConfiguration& config) {
    const auto& g = config.geometry();
    const auto table = g.neighbor_table();
    const int z = g.coordination();
    std::int64_t sum = 0;
    // The +1 neighbor along each axis sits at odd offsets in a table row.
    for (SiteIndex i = 0; i < g.num_sites(); ++i) {
        const auto row = static_cast<std::size_t>(i * z);
        int partial = 0;
        for (int a = 0; a < g.dimension(); ++a) partial += config[table[row + static_cast<std::size_t>(2 * a + 1)]];
        sum += config[i] * partial;
    }
    return sum;
}

double bond_energy(const SpinConfiguration& config, double J) {
    return -J * static_cast<double>(bond_sum(config));
}

}  // namespace quench
