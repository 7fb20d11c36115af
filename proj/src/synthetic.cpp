#include "quench/synthetic.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "quench/rng.hpp"

namespace quench {

std::string_view to_string(ScalingFunction f) {
    switch (f) {
        case ScalingFunction::rational: return "rational";
        case ScalingFunction::saturating: return "saturating";
    }
    return "unknown";
}

ScalingFunction parse_scaling_function(std::string_view s) {
    if (s == "rational") return ScalingFunction::rational;
    if (s == "saturating") return ScalingFunction::saturating;
    throw std::invalid_argument("unknown scaling function '" + std::string(s) + "'");
}

double evaluate(ScalingFunction f, double x) {
    switch (f) {
        case ScalingFunction::rational: return x * x / (1.0 + x);
        case ScalingFunction::saturating: return x * x / (1.0 + x * x);
    }
    throw std::invalid_argument("unknown scaling function");
}

void validate(const SyntheticSpec& s) {
    if (!(s.w_star > 0.0)) throw std::invalid_argument("w_star must be positive");
    if (s.Ls.empty() || s.hs.empty()) throw std::invalid_argument("L and h lists must be nonempty");
    for (int L : s.Ls)
        if (L < 2) throw std::invalid_argument("L must be >= 2");
    for (double h : s.hs)
        if (!(h > 0.0)) throw std::invalid_argument("synthetic fields must be positive");
    if (!(s.x_min > 0.0 && s.x_max > s.x_min)) throw std::invalid_argument("need 0 < x_min < x_max");
    if (s.points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    if (!(s.noise >= 0.0)) throw std::invalid_argument("noise must be non-negative");
    if (!(s.time_power > 0.0 && s.variable_power > 0.0)) throw std::invalid_argument("powers must be positive");
}

std::vector<EnsembleSeries> make_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    const auto& c = spec.constants;
    const double lx_lo = std::log10(spec.x_min);
    const double lx_hi = std::log10(spec.x_max);
    const auto n = static_cast<int>(std::ceil((lx_hi - lx_lo) * spec.points_per_decade));

    std::vector<EnsembleSeries> out;
    for (int L : spec.Ls) {
        const double yscale = power(static_cast<double>(L), c.kappa);
        const double tscale = power(static_cast<double>(L), c.z);
        for (double h : spec.hs) {
            const double hhat = reduced_field(h, L, c);
            RandomStream rng(hash_words({spec.seed, static_cast<std::uint64_t>(L), std::bit_cast<std::uint64_t>(h)}));
            EnsembleSeries s;
            s.label = {c.family, c.d, L, h, time_unit_for(c.family)};
            s.n_realizations = 1;
            s.times.push_back(0.0);
            s.mean_M2.push_back(yscale * evaluate(spec.function, 0.0));
            s.stderr_M2.push_back(0.0);
            for (int k = 0; k <= n; ++k) {
                const double x = std::pow(10.0, lx_lo + (lx_hi - lx_lo) * k / n);
                const double that = std::pow(x / hhat, 1.0 / (spec.w_star * spec.time_power));
                // Classical times are sweeps, quantum times are J t.
                s.times.push_back(that * tscale);
                const double y = yscale * evaluate(spec.function, std::pow(x, spec.variable_power));
                const double noisy = spec.noise > 0.0 ? y * (1.0 + spec.noise * rng.normal()) : y;
                s.mean_M2.push_back(noisy);
                s.stderr_M2.push_back(spec.noise * y);
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace quench
