#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "quench/lattice.hpp"
#include "quench/rng.hpp"
#include "quench/series.hpp"

namespace quench {

// Classical Ising model at temperature T; after the quench H = H_crit - h M.
struct ClassicalModelSpec {
    ClassicalModelSpec(LatticeGeometry geometry, double J, double T, double h);

    LatticeGeometry geometry;
    double J;
    double T;
    double h;

    double beta() const { return 1.0 / T; }
    ClassicalModelSpec with_field(double field) const { return {geometry, J, T, field}; }
};

// Record times in Monte Carlo sweeps: strictly increasing, starting at 0.
class QuenchSchedule {
public:
    explicit QuenchSchedule(std::vector<std::int64_t> record_times);

    // 0 plus log-spaced integer sweeps up to t_max (both ends included).
    static QuenchSchedule log_spaced(std::int64_t t_max, int points_per_decade);

    std::span<const std::int64_t> times() const { return times_; }
    std::int64_t t_max() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }

    friend bool operator==(const QuenchSchedule&, const QuenchSchedule&) = default;

private:
    std::vector<std::int64_t> times_;
};

struct Trajectory {
    QuenchSchedule schedule;
    std::vector<std::int64_t> M_values;
    std::vector<double> M2_values;
    // Critical part of the energy, -J sum s_i s_j, at each record time.
    std::vector<double> E_values;
    std::uint64_t seed = 0;
};

// 1 - exp(-2 beta J)
double wolff_bond_probability(double beta, double J);

// 1 / (1 + exp(beta * dE)), evaluated without overflow.
double glauber_flip_probability(double beta, double delta_E);

// Energy change of H = H_crit - h M when flipping a spin s whose neighbors sum to field_sum.
inline double flip_energy_change(int s, int field_sum, double J, double h) {
    return 2.0 * s * (J * field_sum + h);
}

// One Wolff cluster flip; returns the cluster size. Requires spec.h == 0.
std::int64_t wolff_update(SpinConfiguration& config, const ClassicalModelSpec& spec, RandomStream& rng);

SpinConfiguration wolff_equilibrate(SpinConfiguration config, const ClassicalModelSpec& spec, std::int64_t n_updates,
                                    RandomStream& rng);

// Random-site Glauber dynamics with precomputed integer flip thresholds.
class GlauberKernel {
public:
    explicit GlauberKernel(const ClassicalModelSpec& spec);

    // Running totals kept in sync with the configuration during sweeps.
    struct Tally {
        std::int64_t magnetization = 0;
        std::int64_t bond_sum = 0;
    };

    double flip_probability(int spin, int field_sum) const;

    // One sweep = N update attempts at uniformly random sites.
    void sweep(SpinConfiguration& config, RandomStream& rng, Tally& tally) const;

private:
    std::size_t slot(int spin, int field_sum) const {
        return static_cast<std::size_t>((spin > 0 ? 2 * d_ + 1 : 0) + (field_sum + 2 * d_) / 2);
    }

    int d_;
    std::vector<std::uint64_t> threshold_;
    std::vector<double> probability_;
};

SpinConfiguration glauber_sweep(SpinConfiguration config, const ClassicalModelSpec& spec, RandomStream& rng);

// Default equilibration length, in Wolff cluster updates.
std::int64_t default_equilibration_updates(const LatticeGeometry& geometry);

// Equilibrate at h = 0 with Wolff updates, then evolve with Glauber dynamics in
// field spec.h, recording at each schedule time. Fully determined by `seed`.
Trajectory run_quench_realization(const ClassicalModelSpec& spec, const QuenchSchedule& schedule, std::int64_t n_equil,
                                  std::uint64_t seed);

// Stream key for one realization of one (L, h) series.
std::uint64_t realization_seed(std::uint64_t master_seed, int L, double h, std::int64_t index);

// Runs n realizations on `threads` workers; element r is realization r.
std::vector<Trajectory> run_quench_ensemble(const ClassicalModelSpec& spec, const QuenchSchedule& schedule,
                                            std::int64_t n_equil, std::uint64_t master_seed, std::int64_t n_realizations,
                                            unsigned threads = 0);

struct SampleStats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

// Sample mean and sd/sqrt(n); stderr is 0 for a single value.
SampleStats sample_stats(std::span<const double> values);

EnsembleSeries ensemble_average(std::span<const Trajectory> trajectories, const SeriesLabel& label);

// Per-record-time statistics for an arbitrary trajectory column.
std::vector<SampleStats> column_stats(std::span<const Trajectory> trajectories,
                                      const std::function<double(const Trajectory&, std::size_t)>& column);

}  // namespace quench
