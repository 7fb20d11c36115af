#include "quench/scaling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace quench {

std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::paper: return "paper";
        case Provenance::literature_default: return "literature-default";
        case Provenance::user_override: return "user-override";
    }
    return "unknown";
}

CriticalConstants derive_constants(ModelFamily family, int d, double eta, double z, double J, double critical_point) {
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
    if (!(z > 0.0)) throw std::invalid_argument("z must be positive");
    if (!(J > 0.0)) throw std::invalid_argument("J must be positive");
    if (!(critical_point > 0.0)) throw std::invalid_argument("critical point must be positive");

    CriticalConstants c;
    c.family = family;
    c.d = d;
    c.eta = eta;
    c.z = z;
    c.J = J;
    c.critical_point = critical_point;
    switch (family) {
        case ModelFamily::quantum:
            c.kappa = d + 2.0 - z - eta;
            c.y_h = (d + z + 2.0 - eta) / 2.0;
            break;
        case ModelFamily::classical:
            c.kappa = d + 2.0 - eta;
            c.y_h = (d + 2.0 - eta) / 2.0;
            break;
        default: throw std::invalid_argument("unknown model family");
    }
    return c;
}

CriticalConstants default_constants(ModelFamily family, int d) {
    using P = Provenance;
    struct Entry {
        double eta, z, crit;
        P eta_src, z_src, crit_src;
    };
    Entry e{};
    if (family == ModelFamily::quantum) {
        if (d == 1) e = {0.25, 1.0, 1.0, P::literature_default, P::paper, P::paper};
        else if (d == 2) e = {0.0363, 1.0, 3.044, P::literature_default, P::paper, P::paper};
        else throw std::invalid_argument("quantum defaults exist for d = 1, 2 only");
    } else {
        if (d == 2) e = {0.25, 2.17, 2.0 / std::log(1.0 + std::sqrt(2.0)), P::literature_default, P::literature_default,
                         P::literature_default};
        else if (d == 3) e = {0.0363, 2.02, 4.5115, P::literature_default, P::paper, P::paper};
        else if (d == 4) e = {0.0, 2.0, 6.6803, P::literature_default, P::paper, P::paper};
        else throw std::invalid_argument("classical defaults exist for d = 2, 3, 4 only");
    }
    auto c = derive_constants(family, d, e.eta, e.z, 1.0, e.crit);
    c.eta_source = e.eta_src;
    c.z_source = e.z_src;
    c.critical_point_source = e.crit_src;
    return c;
}

double power(double base, double exponent) {
    if (base == 0.0) return exponent == 0.0 ? 1.0 : 0.0;
    return std::exp(exponent * std::log(base));
}

double reduced_time(double t, int L, const CriticalConstants& c) {
    if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
    const double scale = power(static_cast<double>(L), -c.z);
    return c.family == ModelFamily::quantum ? c.J * t * scale : t * scale;
}

double reduced_field(double h, int L, const CriticalConstants& c) {
    if (!(h >= 0.0)) throw std::invalid_argument("field must be non-negative");
    return h / c.J * power(static_cast<double>(L), c.y_h);
}

RescaledCurve rescale_curve(const EnsembleSeries& series, const CriticalConstants& c, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("collapse exponent w must be positive");
    if (series.label.family != c.family || series.label.d != c.d)
        throw std::invalid_argument("series " + describe(series.label) + " does not match the critical constants");
    RescaledCurve out;
    out.label = series.label;
    out.w = w;
    out.times = series.times;
    const int L = series.label.L;
    const double hhat = reduced_field(series.label.h, L, c);
    const double yscale = power(static_cast<double>(L), -c.kappa);
    out.x_values.reserve(series.size());
    out.y_values.reserve(series.size());
    out.y_errors.reserve(series.size());
    // Quantum series are recorded in units of J t already.
    const double to_raw = series.label.time_unit == TimeUnit::jt ? 1.0 / c.J : 1.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        out.x_values.push_back(hhat * power(reduced_time(series.times[k] * to_raw, L, c), w));
        out.y_values.push_back(yscale * series.mean_M2[k]);
        out.y_errors.push_back(yscale * series.stderr_M2[k]);
    }
    return out;
}

}  // namespace quench
