#include "quench/quantum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "quench/errors.hpp"

namespace quench {

namespace {

void check_sites(int n) {
    if (n < 1) throw std::invalid_argument("state needs at least one site");
    if (n > kMaxQuantumSites)
        throw CapacityError("quantum simulation supports at most " + std::to_string(kMaxQuantumSites) +
                            " sites, got " + std::to_string(n));
}

template <class T>
double real_dot(std::span<const T> a, std::span<const T> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::real(std::conj(a[k]) * b[k]);
    return s;
}

double l2(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

double l2(std::span<const Amplitude> a) {
    double s = 0.0;
    for (const auto& x : a) s += std::norm(x);
    return std::sqrt(s);
}

Amplitude cdot(std::span<const Amplitude> a, std::span<const Amplitude> b) {
    Amplitude s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::conj(a[k]) * b[k];
    return s;
}

// Lowest eigenpair of the symmetric tridiagonal matrix (alpha, beta).
std::pair<double, Eigen::VectorXd> lowest_tridiagonal(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index k = 0; k + 1 < m; ++k) sub[k] = beta[static_cast<std::size_t>(k)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

// exp(-i T tau) e_1 for the tridiagonal T given by its eigendecomposition.
Eigen::VectorXcd propagate_e1(const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es, double tau) {
    const auto& Q = es.eigenvectors();
    const auto& lam = es.eigenvalues();
    Eigen::VectorXcd coef(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) coef[k] = std::polar(1.0, -lam[k] * tau) * Q(0, k);
    return Q.cast<Amplitude>() * coef;
}

}  // namespace

QuantumModelSpec::QuantumModelSpec(LatticeGeometry g_, double J_, double g__, double h_)
    : geometry(std::move(g_)), J(J_), g(g__), h(h_) {
    if (geometry.dimension() > 2) throw std::invalid_argument("quantum model supports d = 1 or 2");
    check_sites(static_cast<int>(geometry.num_sites()));
    if (!(J > 0.0)) throw std::invalid_argument("coupling J must be positive");
    if (!(g > 0.0)) throw std::invalid_argument("transverse field g must be positive");
    if (!(h >= 0.0)) throw std::invalid_argument("field h must be non-negative");
}

// ---------------------------------------------------------------------------

StateVector::StateVector(int num_sites) : n_(num_sites) {
    check_sites(num_sites);
    amp_.assign(std::size_t{1} << num_sites, Amplitude{0.0});
}

StateVector::StateVector(int num_sites, std::vector<Amplitude> amplitudes) : n_(num_sites), amp_(std::move(amplitudes)) {
    check_sites(num_sites);
    if (amp_.size() != (std::size_t{1} << num_sites))
        throw std::invalid_argument("amplitude count does not match 2^N");
}

StateVector StateVector::all_up(int num_sites) {
    StateVector s(num_sites);
    s.amp_[0] = 1.0;
    return s;
}

StateVector StateVector::x_polarized(int num_sites) {
    StateVector s(num_sites);
    const double a = 1.0 / std::sqrt(static_cast<double>(s.dimension()));
    std::fill(s.amp_.begin(), s.amp_.end(), Amplitude{a});
    return s;
}

double StateVector::norm() const { return l2(std::span<const Amplitude>(amp_)); }

void StateVector::normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero state");
    for (auto& a : amp_) a /= n;
}

// ---------------------------------------------------------------------------

TfimHamiltonian::TfimHamiltonian(const QuantumModelSpec& spec) : spec_(spec) {
    const auto& geo = spec.geometry;
    const int n = static_cast<int>(geo.num_sites());
    const int z = geo.coordination();
    const auto table = geo.neighbor_table();
    // Each bond once: the +1 neighbor along every axis.
    std::vector<std::pair<int, int>> bonds;
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < geo.dimension(); ++a)
            bonds.emplace_back(i, table[static_cast<std::size_t>(i * z + 2 * a + 1)]);

    diag_.resize(spec.dimension());
    for (std::uint64_t s = 0; s < diag_.size(); ++s) {
        int zz = 0;
        for (auto [i, j] : bonds) zz += (((s >> i) ^ (s >> j)) & 1U) ? -1 : 1;
        diag_[s] = -spec.J * zz - spec.h * basis_magnetization(s, n);
    }
}

void TfimHamiltonian::apply(std::span<const Amplitude> in, std::span<Amplitude> out) const {
    if (in.size() != diag_.size() || out.size() != diag_.size())
        throw std::invalid_argument("state dimension does not match the Hamiltonian");
    const int n = static_cast<int>(spec_.num_sites());
    const double g = spec_.g;
    for (std::size_t s = 0; s < diag_.size(); ++s) {
        Amplitude x = 0.0;
        for (int i = 0; i < n; ++i) x += in[s ^ (std::size_t{1} << i)];
        out[s] = diag_[s] * in[s] - g * x;
    }
}

void TfimHamiltonian::apply(std::span<const double> in, std::span<double> out) const {
    if (in.size() != diag_.size() || out.size() != diag_.size())
        throw std::invalid_argument("state dimension does not match the Hamiltonian");
    const int n = static_cast<int>(spec_.num_sites());
    const double g = spec_.g;
    for (std::size_t s = 0; s < diag_.size(); ++s) {
        double x = 0.0;
        for (int i = 0; i < n; ++i) x += in[s ^ (std::size_t{1} << i)];
        out[s] = diag_[s] * in[s] - g * x;
    }
}

double TfimHamiltonian::expectation(const StateVector& psi) const {
    std::vector<Amplitude> hpsi(psi.dimension());
    apply(psi.amplitudes(), hpsi);
    return real_dot<Amplitude>(psi.amplitudes(), hpsi) / std::pow(psi.norm(), 2);
}

StateVector apply_hamiltonian(const QuantumModelSpec& spec, const StateVector& state) {
    if (state.num_sites() != spec.num_sites()) throw std::invalid_argument("state and model have different site counts");
    TfimHamiltonian H(spec);
    std::vector<Amplitude> out(state.dimension());
    H.apply(state.amplitudes(), out);
    return StateVector(state.num_sites(), std::move(out));
}

// ---------------------------------------------------------------------------

GroundState ground_state(const QuantumModelSpec& spec, const LanczosOptions& options) {
    if (spec.h != 0.0) throw ProtocolError("ground state preparation requires h = 0");
    if (options.krylov_dim < 2) throw std::invalid_argument("Krylov dimension must be >= 2");
    const TfimHamiltonian H(spec);
    const std::size_t dim = H.dimension();
    const int n = static_cast<int>(spec.num_sites());
    const auto m_max = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(options.krylov_dim), dim));

    std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    std::vector<double> w(dim), hv(dim);
    std::vector<std::vector<double>> basis;
    double residual = 0.0;
    double energy = 0.0;

    for (int restart = 0; restart <= options.max_restarts; ++restart) {
        basis.clear();
        basis.push_back(v);
        std::vector<double> alpha, beta;
        for (std::size_t j = 0; j < m_max; ++j) {
            H.apply(basis[j], w);
            const double a = real_dot<double>(basis[j], w);
            alpha.push_back(a);
            // Full reorthogonalization, two passes.
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) {
                    const double c = real_dot<double>(q, w);
                    for (std::size_t k = 0; k < dim; ++k) w[k] -= c * q[k];
                }
            const double b = l2(w);
            if (j + 1 == m_max || b <= 1e-12 * std::max(1.0, std::abs(a))) break;
            beta.push_back(b);
            for (auto& x : w) x /= b;
            basis.push_back(w);
        }
        const auto [theta, y] = lowest_tridiagonal(alpha, beta);
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const double c = y[static_cast<Eigen::Index>(k)];
            for (std::size_t s = 0; s < dim; ++s) v[s] += c * basis[k][s];
        }
        const double nv = l2(v);
        for (auto& x : v) x /= nv;
        H.apply(v, hv);
        energy = real_dot<double>(v, hv);
        double r2 = 0.0;
        for (std::size_t s = 0; s < dim; ++s) r2 += (hv[s] - energy * v[s]) * (hv[s] - energy * v[s]);
        residual = std::sqrt(r2);
        (void)theta;
        if (residual <= options.residual_tol) break;
    }
    if (residual > options.residual_tol)
        throw NumericalError("Lanczos ground state did not converge, residual " + std::to_string(residual), residual);

    std::vector<Amplitude> amp(v.begin(), v.end());
    GroundState gs{energy, StateVector(n, std::move(amp)), residual};
    if (const double m = measure_M(gs.state); std::abs(m) > 1e-8 * n)
        throw NumericalError("ground state is not Z2-even, <M> = " + std::to_string(m), std::abs(m));
    return gs;
}

// ---------------------------------------------------------------------------

StateVector evolve(const StateVector& state, const TfimHamiltonian& H, double dt, double tol, const KrylovOptions& options) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("time step must be finite and non-negative");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (options.max_dim < 2) throw std::invalid_argument("Krylov dimension must be >= 2");
    if (state.dimension() != H.dimension()) throw std::invalid_argument("state dimension does not match the Hamiltonian");
    if (dt == 0.0) return state;

    const std::size_t dim = state.dimension();
    const auto m_max = std::min<std::size_t>(static_cast<std::size_t>(options.max_dim), dim);
    std::vector<Amplitude> psi(state.amplitudes().begin(), state.amplitudes().end());
    const double nrm = l2(std::span<const Amplitude>(psi));
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot evolve a zero state");

    std::vector<std::vector<Amplitude>> basis;
    std::vector<Amplitude> w(dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    double remaining = dt;

    while (remaining > 0.0) {
        basis.clear();
        basis.emplace_back(psi);
        for (auto& x : basis[0]) x /= nrm;
        std::vector<double> alpha, beta;
        double tau = remaining;
        Eigen::VectorXcd c;
        for (std::size_t j = 0;; ++j) {
            H.apply(basis[j], w);
            alpha.push_back(real_dot<Amplitude>(basis[j], w));
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& q : basis) {
                    const Amplitude cq = cdot(q, w);
                    for (std::size_t k = 0; k < dim; ++k) w[k] -= cq * q[k];
                }
            const double b = l2(std::span<const Amplitude>(w));
            const auto m = static_cast<Eigen::Index>(alpha.size());
            Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd sub(m - 1);
            for (Eigen::Index k = 0; k + 1 < m; ++k) sub[k] = beta[static_cast<std::size_t>(k)];
            es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

            const bool invariant = b <= 1e-13 * std::max(1.0, std::abs(alpha.back()));
            auto error_at = [&](double t) {
                c = propagate_e1(es, t);
                return invariant ? 0.0 : b * std::abs(c[m - 1]);
            };
            double err = error_at(tau);
            if (err <= tol) break;
            if (alpha.size() == m_max) {
                int halvings = 0;
                while (err > tol) {
                    if (++halvings > options.max_halvings)
                        throw NumericalError("Krylov propagation cannot reach the requested tolerance", err);
                    tau *= 0.5;
                    err = error_at(tau);
                }
                break;
            }
            beta.push_back(b);
            for (auto& x : w) x /= b;
            basis.push_back(w);
        }
        std::fill(psi.begin(), psi.end(), Amplitude{0.0});
        for (std::size_t k = 0; k < basis.size(); ++k) {
            const Amplitude ck = nrm * c[static_cast<Eigen::Index>(k)];
            for (std::size_t s = 0; s < dim; ++s) psi[s] += ck * basis[k][s];
        }
        remaining = tau == remaining ? 0.0 : remaining - tau;
    }
    return StateVector(state.num_sites(), std::move(psi));
}

StateVector evolve(const StateVector& state, const QuantumModelSpec& spec, double dt, double tol) {
    return evolve(state, TfimHamiltonian(spec), dt, tol);
}

// ---------------------------------------------------------------------------

double measure_M(const StateVector& state) {
    const int n = state.num_sites();
    double m = 0.0;
    for (std::size_t s = 0; s < state.dimension(); ++s) m += std::norm(state[s]) * basis_magnetization(s, n);
    return m;
}

double measure_M2(const StateVector& state) {
    const int n = state.num_sites();
    double m2 = 0.0;
    for (std::size_t s = 0; s < state.dimension(); ++s) {
        const double m = basis_magnetization(s, n);
        m2 += std::norm(state[s]) * m * m;
    }
    return m2;
}

double measure_ZZ(const StateVector& state, int i, int j) {
    if (i < 0 || j < 0 || i >= state.num_sites() || j >= state.num_sites())
        throw std::invalid_argument("site index out of range");
    double c = 0.0;
    for (std::size_t s = 0; s < state.dimension(); ++s)
        c += std::norm(state[s]) * ((((s >> i) ^ (s >> j)) & 1U) ? -1.0 : 1.0);
    return c;
}

// ---------------------------------------------------------------------------

QuantumQuench run_quantum_quench_detailed(const QuantumModelSpec& spec, std::span<const double> record_times,
                                          double tol) {
    if (record_times.empty() || record_times.front() != 0.0)
        throw std::invalid_argument("record times must start at 0");
    for (std::size_t k = 1; k < record_times.size(); ++k)
        if (!(record_times[k] > record_times[k - 1])) throw std::invalid_argument("record times must be increasing");

    const auto gs = ground_state(spec.with_field(0.0));
    const TfimHamiltonian H(spec);
    QuantumQuench out;
    out.ground_energy = gs.energy;
    out.ground_residual = gs.residual;
    out.series.label = {ModelFamily::quantum, spec.geometry.dimension(), spec.geometry.linear_size(), spec.h,
                        TimeUnit::jt};
    out.series.n_realizations = 1;

    StateVector psi = gs.state;
    double prev = 0.0;
    for (double jt : record_times) {
        psi = evolve(psi, H, (jt - prev) / spec.J, tol);
        prev = jt;
        out.series.times.push_back(jt);
        out.series.mean_M2.push_back(measure_M2(psi));
        out.series.stderr_M2.push_back(0.0);
        out.energies.push_back(H.expectation(psi));
    }
    return out;
}

EnsembleSeries run_quantum_quench(const QuantumModelSpec& spec, std::span<const double> record_times, double tol) {
    return run_quantum_quench_detailed(spec, record_times, tol).series;
}

}  // namespace quench
