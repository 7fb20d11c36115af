#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "quench/lattice.hpp"
#include "quench/series.hpp"

namespace quench {

// Largest site count accepted for state-vector simulation. 2^22 complex
// amplitudes are 64 MiB; the Krylov bases below hold a few dozen of them.
inline constexpr SiteIndex kMaxQuantumSites = 22;

// H = -J sum_<ij> Z_i Z_j - g sum_i X_i - h sum_i Z_i on a periodic chain or square lattice.
struct QuantumModelSpec {
    QuantumModelSpec(LatticeGeometry geometry, double J, double g, double h);

    LatticeGeometry geometry;
    double J;
    double g;
    double h;

    SiteIndex num_sites() const { return geometry.num_sites(); }
    std::size_t dimension() const { return std::size_t{1} << num_sites(); }
    QuantumModelSpec with_field(double field) const { return {geometry, J, g, field}; }
};

using Amplitude = std::complex<double>;

// Amplitudes in the Z basis. Bit i of the basis index is site i, 0 = up (+1), 1 = down (-1).
class StateVector {
public:
    explicit StateVector(int num_sites);
    StateVector(int num_sites, std::vector<Amplitude> amplitudes);

    static StateVector all_up(int num_sites);
    // prod_i |+>_x
    static StateVector x_polarized(int num_sites);

    int num_sites() const { return n_; }
    std::size_t dimension() const { return amp_.size(); }
    std::span<const Amplitude> amplitudes() const { return amp_; }
    std::span<Amplitude> mutable_amplitudes() { return amp_; }
    Amplitude operator[](std::size_t s) const { return amp_[s]; }

    double norm() const;
    void normalize();

private:
    int n_;
    std::vector<Amplitude> amp_;
};

// Magnetization sum_i Z_i of a basis state.
inline int basis_magnetization(std::uint64_t s, int num_sites) {
    return num_sites - 2 * __builtin_popcountll(s);
}

// Matrix-free Hamiltonian. The diagonal (ZZ and Z terms) is tabulated once.
class TfimHamiltonian {
public:
    explicit TfimHamiltonian(const QuantumModelSpec& spec);

    const QuantumModelSpec& spec() const { return spec_; }
    std::size_t dimension() const { return diag_.size(); }
    std::span<const double> diagonal() const { return diag_; }

    // out = H in; out must not alias in.
    void apply(std::span<const Amplitude> in, std::span<Amplitude> out) const;
    void apply(std::span<const double> in, std::span<double> out) const;

    double expectation(const StateVector& psi) const;

private:
    QuantumModelSpec spec_;
    std::vector<double> diag_;
};

StateVector apply_hamiltonian(const QuantumModelSpec& spec, const StateVector& state);

struct GroundState {
    double energy = 0.0;
    StateVector state;
    double residual = 0.0;  // ||H psi - E psi||
};

struct LanczosOptions {
    int krylov_dim = 40;
    int max_restarts = 200;
    double residual_tol = 1e-9;
};

// Lowest state of the Z2-even sector (requires h = 0). The start vector is
// the uniform superposition, which is even, and the sector is preserved.
// Throws NumericalError when the residual stays above residual_tol.
GroundState ground_state(const QuantumModelSpec& spec, const LanczosOptions& options = {});

struct KrylovOptions {
    int max_dim = 30;
    int max_halvings = 60;
};

// exp(-i H dt) psi by adaptive Lanczos propagation, each substep with
// estimated local error <= tol.
StateVector evolve(const StateVector& state, const TfimHamiltonian& H, double dt, double tol = 1e-12,
                   const KrylovOptions& options = {});
StateVector evolve(const StateVector& state, const QuantumModelSpec& spec, double dt, double tol = 1e-12);

double measure_M(const StateVector& state);
double measure_M2(const StateVector& state);
// <Z_i Z_j>
double measure_ZZ(const StateVector& state, int i, int j);

struct QuantumQuench {
    EnsembleSeries series;
    std::vector<double> energies;  // <H> with the quench field, per record time
    double ground_energy = 0.0;
    double ground_residual = 0.0;
};

// Ground state at h = 0, then evolution with spec.h. Times are J t.
QuantumQuench run_quantum_quench_detailed(const QuantumModelSpec& spec, std::span<const double> record_times,
                                          double tol = 1e-12);
EnsembleSeries run_quantum_quench(const QuantumModelSpec& spec, std::span<const double> record_times,
                                  double tol = 1e-12);

}  // namespace quench
