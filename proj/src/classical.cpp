#include "quench/classical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "quench/errors.hpp"
#include "quench/parallel.hpp"

namespace quench {

ClassicalModelSpec::ClassicalModelSpec(LatticeGeometry g, double J_, double T_, double h_)
    : geometry(std::move(g)), J(J_), T(T_), h(h_) {
    if (!(J > 0.0)) throw std::invalid_argument("coupling J must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (!(h >= 0.0)) throw std::invalid_argument("field h must be non-negative");
}

QuenchSchedule::QuenchSchedule(std::vector<std::int64_t> record_times) : times_(std::move(record_times)) {
    if (times_.empty() || times_.front() != 0) throw std::invalid_argument("schedule must start at t = 0");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (times_[k] <= times_[k - 1]) throw std::invalid_argument("schedule times must be strictly increasing");
}

QuenchSchedule QuenchSchedule::log_spaced(std::int64_t t_max, int points_per_decade) {
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    std::vector<std::int64_t> t{0};
    for (int k = 0;; ++k) {
        const auto v = static_cast<std::int64_t>(std::llround(std::pow(10.0, static_cast<double>(k) / points_per_decade)));
        if (v >= t_max) break;
        if (v > t.back()) t.push_back(v);
    }
    t.push_back(t_max);
    return QuenchSchedule(std::move(t));
}

double wolff_bond_probability(double beta, double J) { return -std::expm1(-2.0 * beta * J); }

double glauber_flip_probability(double beta, double delta_E) {
    const double x = beta * delta_E;
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

std::int64_t wolff_update(SpinConfiguration& config, const ClassicalModelSpec& spec, RandomStream& rng) {
    if (spec.h != 0.0) throw ProtocolError("Wolff cluster updates are only valid at zero field");
    const auto& g = config.geometry();
    const auto table = g.neighbor_table();
    const int z = g.coordination();
    const std::uint64_t add = probability_threshold(wolff_bond_probability(spec.beta(), spec.J));
    auto spins = config.mutable_spins();

    thread_local std::vector<std::int32_t> stack;
    stack.clear();
    const auto seed_site = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(g.num_sites())));
    const Spin cluster_spin = spins[static_cast<std::size_t>(seed_site)];
    // Sites are flipped when pushed, so a flipped site is never added twice.
    spins[static_cast<std::size_t>(seed_site)] = static_cast<Spin>(-cluster_spin);
    stack.push_back(seed_site);
    std::int64_t size = 1;
    while (!stack.empty()) {
        const auto i = static_cast<std::size_t>(stack.back());
        stack.pop_back();
        const std::size_t row = i * static_cast<std::size_t>(z);
        for (int k = 0; k < z; ++k) {
            const auto j = table[row + static_cast<std::size_t>(k)];
            auto& sj = spins[static_cast<std::size_t>(j)];
            if (sj == cluster_spin && rng() < add) {
                sj = static_cast<Spin>(-cluster_spin);
                stack.push_back(j);
                ++size;
            }
        }
    }
    return size;
}

SpinConfiguration wolff_equilibrate(SpinConfiguration config, const ClassicalModelSpec& spec, std::int64_t n_updates,
                                    RandomStream& rng) {
    if (spec.h != 0.0) throw ProtocolError("equilibration with Wolff updates requires h = 0");
    if (n_updates < 1) throw std::invalid_argument("n_updates must be >= 1");
    for (std::int64_t u = 0; u < n_updates; ++u) wolff_update(config, spec, rng);
    return config;
}

GlauberKernel::GlauberKernel(const ClassicalModelSpec& spec) : d_(spec.geometry.dimension()) {
    const int z = 2 * d_;
    threshold_.assign(static_cast<std::size_t>(2 * (z + 1)), 0);
    probability_.assign(threshold_.size(), 0.0);
    for (int s : {-1, 1}) {
        for (int f = -z; f <= z; f += 2) {
            const double p = glauber_flip_probability(spec.beta(), flip_energy_change(s, f, spec.J, spec.h));
            probability_[slot(s, f)] = p;
            threshold_[slot(s, f)] = probability_threshold(p);
        }
    }
}

double GlauberKernel::flip_probability(int spin, int field_sum) const {
    if ((spin != 1 && spin != -1) || field_sum < -2 * d_ || field_sum > 2 * d_ || ((field_sum + 2 * d_) % 2) != 0)
        throw std::invalid_argument("field sum not representable on this lattice");
    return probability_[slot(spin, field_sum)];
}

void GlauberKernel::sweep(SpinConfiguration& config, RandomStream& rng, Tally& tally) const {
    const auto& g = config.geometry();
    const auto n = static_cast<std::uint64_t>(g.num_sites());
    const int z = g.coordination();
    const std::int32_t* nbr = g.neighbor_table().data();
    Spin* s = config.mutable_spins().data();
    const std::uint64_t* thr = threshold_.data();
    const int up_offset = z + 1;

    std::int64_t dm = 0;
    std::int64_t db = 0;
    for (std::uint64_t a = 0; a < n; ++a) {
        const std::uint64_t i = rng.below(n);
        const std::int32_t* row = nbr + i * static_cast<std::uint64_t>(z);
        int f = 0;
        for (int k = 0; k < z; ++k) f += s[row[k]];
        const int si = s[i];
        const int idx = (si > 0 ? up_offset : 0) + ((f + z) >> 1);
        // Branchless: the flip decision is close to a coin toss at criticality.
        const int delta = (rng() < thr[idx]) ? -2 * si : 0;
        s[i] = static_cast<Spin>(si + delta);
        dm += delta;
        db += delta * f;
    }
    tally.magnetization += dm;
    tally.bond_sum += db;
}

SpinConfiguration glauber_sweep(SpinConfiguration config, const ClassicalModelSpec& spec, RandomStream& rng) {
    GlauberKernel kernel(spec);
    GlauberKernel::Tally tally;
    kernel.sweep(config, rng, tally);
    return config;
}

std::int64_t default_equilibration_updates(const LatticeGeometry& geometry) {
    // Cluster sizes scale like L^(2 - eta), so the number of updates needed to
    // decorrelate from the ordered start grows like L^(d - 2).
    const auto L = static_cast<std::int64_t>(geometry.linear_size());
    std::int64_t bulk = 1;
    for (int a = 2; a < geometry.dimension(); ++a) bulk *= L;
    return 10 * std::max(L, bulk);
}

Trajectory run_quench_realization(const ClassicalModelSpec& spec, const QuenchSchedule& schedule, std::int64_t n_equil,
                                  std::uint64_t seed) {
    if (n_equil < 1) throw std::invalid_argument("n_equil must be >= 1");
    RandomStream rng(seed);
    const auto& g = spec.geometry;

    // Ordered start: Wolff clusters are large from the first update on.
    SpinConfiguration config(g);
    config = wolff_equilibrate(std::move(config), spec.with_field(0.0), n_equil, rng);

    GlauberKernel kernel(spec);
    GlauberKernel::Tally tally{total_magnetization(config), bond_sum(config)};

    Trajectory tr{schedule, {}, {}, {}, seed};
    tr.M_values.reserve(schedule.size());
    tr.M2_values.reserve(schedule.size());
    tr.E_values.reserve(schedule.size());
    auto record = [&] {
        tr.M_values.push_back(tally.magnetization);
        const auto m = static_cast<double>(tally.magnetization);
        tr.M2_values.push_back(m * m);
        tr.E_values.push_back(-spec.J * static_cast<double>(tally.bond_sum));
    };

    std::int64_t t = 0;
    for (auto target : schedule.times()) {
        for (; t < target; ++t) kernel.sweep(config, rng, tally);
        record();
    }
    return tr;
}

std::uint64_t realization_seed(std::uint64_t master_seed, int L, double h, std::int64_t index) {
    return hash_words({master_seed, static_cast<std::uint64_t>(L), std::bit_cast<std::uint64_t>(h),
                       static_cast<std::uint64_t>(index)});
}

std::vector<Trajectory> run_quench_ensemble(const ClassicalModelSpec& spec, const QuenchSchedule& schedule,
                                            std::int64_t n_equil, std::uint64_t master_seed, std::int64_t n_realizations,
                                            unsigned threads) {
    if (n_realizations < 1) throw std::invalid_argument("n_realizations must be >= 1");
    std::vector<Trajectory> out(static_cast<std::size_t>(n_realizations), Trajectory{schedule, {}, {}, {}, 0});
    parallel_for(out.size(), threads, [&](std::size_t r) {
        out[r] = run_quench_realization(
            spec, schedule, n_equil,
            realization_seed(master_seed, spec.geometry.linear_size(), spec.h, static_cast<std::int64_t>(r)));
    });
    return out;
}

SampleStats sample_stats(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sample_stats of an empty sample");
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::vector<SampleStats> column_stats(std::span<const Trajectory> trajectories,
                                      const std::function<double(const Trajectory&, std::size_t)>& column) {
    if (trajectories.empty()) throw std::invalid_argument("no trajectories to aggregate");
    const auto& schedule = trajectories.front().schedule;
    for (const auto& tr : trajectories)
        if (!(tr.schedule == schedule)) throw std::invalid_argument("trajectories have mismatched schedules");
    std::vector<SampleStats> out;
    out.reserve(schedule.size());
    std::vector<double> buf(trajectories.size());
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        for (std::size_t r = 0; r < trajectories.size(); ++r) buf[r] = column(trajectories[r], k);
        out.push_back(sample_stats(buf));
    }
    return out;
}

EnsembleSeries ensemble_average(std::span<const Trajectory> trajectories, const SeriesLabel& label) {
    const auto stats =
        column_stats(trajectories, [](const Trajectory& tr, std::size_t k) { return tr.M2_values[k]; });
    EnsembleSeries s;
    s.label = label;
    s.n_realizations = static_cast<std::int64_t>(trajectories.size());
    for (std::size_t k = 0; k < stats.size(); ++k) {
        s.times.push_back(static_cast<double>(trajectories.front().schedule.times()[k]));
        s.mean_M2.push_back(stats[k].mean);
        s.stderr_M2.push_back(stats[k].stderr_mean);
    }
    return s;
}

}  // namespace quench
