#include "doctest.h"

#include <stdexcept>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "quench/errors.hpp"
#include "quench/quantum.hpp"
#include "quench/rng.hpp"

using namespace quench;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace {

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Single-site operator embedded at `site`; site 0 is the rightmost factor (lowest bit).
Mat embed(const Mat& op, int site, int n) {
    Mat out = Mat::Identity(1, 1);
    for (int k = n - 1; k >= 0; --k) out = kron(out, k == site ? op : Mat(Mat::Identity(2, 2)));
    return out;
}

// Dense H for a periodic chain built from Kronecker products.
Mat dense_chain(int L, double J, double g, double h) {
    Mat X(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Z << 1, 0, 0, -1;  // bit 0 is spin up
    const auto dim = Eigen::Index{1} << L;
    Mat H = Mat::Zero(dim, dim);
    for (int i = 0; i < L; ++i) {
        H -= J * embed(Z, i, L) * embed(Z, (i + 1) % L, L);
        H -= g * embed(X, i, L);
        H -= h * embed(Z, i, L);
    }
    return H;
}

Vec to_eigen(const StateVector& s) {
    Vec v(static_cast<Eigen::Index>(s.dimension()));
    for (std::size_t k = 0; k < s.dimension(); ++k) v[static_cast<Eigen::Index>(k)] = s[k];
    return v;
}

StateVector random_state(int n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<Amplitude> a(std::size_t{1} << n);
    for (auto& x : a) x = {rng.normal(), rng.normal()};
    StateVector s(n, std::move(a));
    s.normalize();
    return s;
}

double dense_M2(const Vec& v, int n) {
    double m2 = 0.0;
    for (Eigen::Index s = 0; s < v.size(); ++s) {
        const double m = n - 2 * __builtin_popcountll(static_cast<std::uint64_t>(s));
        m2 += std::norm(v[s]) * m * m;
    }
    return m2;
}

}  // namespace

TEST_CASE("spec validation and capacity") {
    CHECK_THROWS_AS(QuantumModelSpec(LatticeGeometry(3, 2), 1, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(QuantumModelSpec(LatticeGeometry(1, 23), 1, 1, 0), CapacityError);
    CHECK_THROWS_AS(QuantumModelSpec(LatticeGeometry(2, 5), 1, 1, 0), CapacityError);
    CHECK_THROWS_AS(QuantumModelSpec(LatticeGeometry(1, 4), 1, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(QuantumModelSpec(LatticeGeometry(1, 4), 1, 1, -0.1), std::invalid_argument);
}

TEST_CASE("transverse term flips one spin with amplitude -g") {
    QuantumModelSpec spec(LatticeGeometry(1, 3), 1.0, 0.7, 0.0);
    const auto up = StateVector::all_up(3);
    const auto out = apply_hamiltonian(spec, up);
    CHECK(out[0].real() == doctest::Approx(-3.0));
    for (int i = 0; i < 3; ++i) CHECK(out[std::size_t{1} << i].real() == doctest::Approx(-0.7));
    CHECK(std::abs(out[3]) == 0.0);
}

TEST_CASE("matrix-free Hamiltonian matches the dense Kronecker construction") {
    QuantumModelSpec spec(LatticeGeometry(1, 4), 1.0, 0.8, 0.3);
    const Mat H = dense_chain(4, 1.0, 0.8, 0.3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto psi = random_state(4, seed);
        const Vec want = H * to_eigen(psi);
        const Vec got = to_eigen(apply_hamiltonian(spec, psi));
        CHECK((want - got).norm() <= 1e-12);
    }
    const auto wrong = random_state(5, 1);
    CHECK_THROWS_AS(apply_hamiltonian(spec, wrong), std::invalid_argument);
}

TEST_CASE("Hamiltonian is Hermitian") {
    QuantumModelSpec spec(LatticeGeometry(2, 3), 1.0, 3.044, 0.2);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto psi = random_state(9, seed);
        const auto hpsi = apply_hamiltonian(spec, psi);
        Amplitude e = 0.0;
        for (std::size_t s = 0; s < psi.dimension(); ++s) e += std::conj(psi[s]) * hpsi[s];
        CHECK(std::abs(e.imag()) <= 1e-12 * std::abs(e.real()));
    }
}

TEST_CASE("simple states") {
    CHECK(measure_M2(StateVector::x_polarized(6)) == doctest::Approx(6.0));
    CHECK(measure_M2(StateVector::all_up(6)) == 36.0);
    CHECK(measure_M(StateVector::all_up(6)) == 6.0);
}

TEST_CASE("ground state matches dense diagonalization") {
    QuantumModelSpec spec(LatticeGeometry(1, 4), 1.0, 1.0, 0.0);
    const auto gs = ground_state(spec);
    Eigen::SelfAdjointEigenSolver<Mat> es(dense_chain(4, 1.0, 1.0, 0.0));
    CHECK(std::abs(gs.energy - es.eigenvalues()[0]) <= 1e-10);
    CHECK(gs.residual <= 1e-8);
    CHECK(std::abs(measure_M(gs.state)) <= 1e-8);
    CHECK(std::abs(gs.state.norm() - 1.0) <= 1e-10);
}

TEST_CASE("ground state M2 at L = 8 matches dense expectation") {
    QuantumModelSpec spec(LatticeGeometry(1, 8), 1.0, 1.0, 0.0);
    const auto gs = ground_state(spec);
    Eigen::SelfAdjointEigenSolver<Mat> es(dense_chain(8, 1.0, 1.0, 0.0));
    CHECK(std::abs(gs.energy - es.eigenvalues()[0]) <= 1e-10);
    CHECK(std::abs(measure_M2(gs.state) - dense_M2(es.eigenvectors().col(0), 8)) <= 1e-10);
}

TEST_CASE("ground state requires zero field") {
    CHECK_THROWS_AS(ground_state(QuantumModelSpec(LatticeGeometry(1, 4), 1.0, 1.0, 0.1)), ProtocolError);
}

TEST_CASE("paramagnetic limit") {
    QuantumModelSpec spec(LatticeGeometry(1, 8), 1.0, 1000.0, 0.0);
    const auto gs = ground_state(spec);
    CHECK(std::abs(measure_M2(gs.state) - 8.0) <= 8.0 * 10.0 / 1000.0);
}

TEST_CASE("critical chain energy approaches the free-fermion value") {
    QuantumModelSpec spec(LatticeGeometry(1, 16), 1.0, 1.0, 0.0);
    const auto gs = ground_state(spec);
    const double e = gs.energy / 16.0;
    const double inf = -4.0 / std::numbers::pi;
    CHECK(std::abs(e - inf) <= 0.01 * std::abs(inf));
    // Exact periodic-chain value from the even-parity free-fermion modes.
    double exact = 0.0;
    for (int k = 0; k < 16; ++k) exact -= 2.0 * std::abs(std::sin(std::numbers::pi * (k + 0.5) / 16.0));
    CHECK(gs.energy == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("ground state correlations are translation invariant") {
    QuantumModelSpec spec(LatticeGeometry(1, 10), 1.0, 1.0, 0.0);
    const auto gs = ground_state(spec);
    for (int r = 1; r <= 5; ++r) {
        const double c0 = measure_ZZ(gs.state, 0, r);
        for (int i = 1; i < 10; ++i) CHECK(std::abs(measure_ZZ(gs.state, i, (i + r) % 10) - c0) <= 1e-8);
    }
}

TEST_CASE("evolve: identity at dt = 0 and phase-only for eigenstates") {
    QuantumModelSpec spec(LatticeGeometry(1, 6), 1.0, 1.0, 0.0);
    const auto psi = random_state(6, 4);
    const auto same = evolve(psi, spec, 0.0);
    for (std::size_t s = 0; s < psi.dimension(); ++s) CHECK(same[s] == psi[s]);

    const auto gs = ground_state(spec);
    const auto later = evolve(gs.state, spec, 3.7);
    const Amplitude phase = std::polar(1.0, -gs.energy * 3.7);
    double dev = 0.0;
    for (std::size_t s = 0; s < psi.dimension(); ++s) dev = std::max(dev, std::abs(later[s] - phase * gs.state[s]));
    CHECK(dev <= 1e-9);
    CHECK(std::abs(measure_M2(later) - measure_M2(gs.state)) <= 1e-10);
    CHECK_THROWS_AS(evolve(psi, spec, -1.0), std::invalid_argument);
}

TEST_CASE("evolve matches the dense exponential") {
    const int L = 4;
    QuantumModelSpec spec(LatticeGeometry(1, L), 1.0, 1.0, 0.1);
    Eigen::SelfAdjointEigenSolver<Mat> es(dense_chain(L, 1.0, 1.0, 0.1));
    const auto psi0 = random_state(L, 9);
    const Vec v0 = to_eigen(psi0);
    const TfimHamiltonian H(spec);
    auto psi = psi0;
    for (int step = 1; step <= 10; ++step) {
        psi = evolve(psi, H, 0.5);
        const double t = 0.5 * step;
        Vec phases(es.eigenvalues().size());
        for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, -es.eigenvalues()[k] * t);
        const Vec want = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * v0;
        CHECK((to_eigen(psi) - want).norm() <= 1e-9);
        CHECK(std::abs(psi.norm() - 1.0) <= 1e-10);
    }
}

TEST_CASE("quench series") {
    QuantumModelSpec spec0(LatticeGeometry(1, 8), 1.0, 1.0, 0.0);
    const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
    const auto flat = run_quantum_quench(spec0, times);
    for (double m : flat.mean_M2) CHECK(std::abs(m - flat.mean_M2[0]) <= 1e-8);
    CHECK(flat.label.time_unit == TimeUnit::jt);
    CHECK(flat.n_realizations == 1);

    QuantumModelSpec spec(LatticeGeometry(1, 8), 1.0, 1.0, 0.1);
    const auto q = run_quantum_quench_detailed(spec, times);
    CHECK(q.series.mean_M2[0] == doctest::Approx(flat.mean_M2[0]).epsilon(1e-10));
    CHECK(q.series.mean_M2.back() > q.series.mean_M2[0]);
    for (double e : q.energies) CHECK(std::abs(e - q.energies[0]) <= 1e-8 * std::abs(q.energies[0]) * times.back());
    for (double s : q.series.stderr_M2) CHECK(s == 0.0);

    CHECK_THROWS_AS(run_quantum_quench(spec, std::vector<double>{0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(run_quantum_quench(spec, std::vector<double>{0.0, 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("time axis in units of J t") {
    // Doubling J and g at fixed J t gives the same state up to the h/J ratio.
    const std::vector<double> times{0.0, 1.0, 2.0};
    const auto a = run_quantum_quench(QuantumModelSpec(LatticeGeometry(1, 6), 1.0, 1.0, 0.1), times);
    const auto b = run_quantum_quench(QuantumModelSpec(LatticeGeometry(1, 6), 2.0, 2.0, 0.2), times);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(a.mean_M2[k] == doctest::Approx(b.mean_M2[k]).epsilon(1e-9));
}

TEST_CASE("small square lattice conserves energy") {
    QuantumModelSpec spec(LatticeGeometry(2, 3), 1.0, 3.044, 0.1);
    const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
    const auto q = run_quantum_quench_detailed(spec, times);
    for (double e : q.energies) CHECK(std::abs(e - q.energies[0]) <= 1e-8 * std::abs(q.energies[0]) * times.back());
    CHECK(std::abs(measure_M(ground_state(spec.with_field(0.0)).state)) <= 1e-8);
}
