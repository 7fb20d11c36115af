#pragma once

#include <string>
#include <vector>

#include "quench/series.hpp"

namespace quench {

// Where a constant's value came from; recorded in run manifests.
enum class Provenance { paper, literature_default, user_override };
std::string_view to_string(Provenance p);

// Exponents and constants of one critical point. kappa and y_h are derived:
//   quantum:   kappa = d + 2 - z - eta,  y_h = (d + z + 2 - eta) / 2
//   classical: kappa = d + 2 - eta,      y_h = (d + 2 - eta) / 2
struct CriticalConstants {
    ModelFamily family = ModelFamily::classical;
    int d = 0;
    double eta = 0.0;
    double z = 0.0;
    double J = 1.0;
    // T_c for classical models, g_c for quantum models.
    double critical_point = 0.0;
    double y_h = 0.0;
    double kappa = 0.0;

    Provenance eta_source = Provenance::literature_default;
    Provenance z_source = Provenance::literature_default;
    Provenance critical_point_source = Provenance::literature_default;
};

CriticalConstants derive_constants(ModelFamily family, int d, double eta, double z, double J, double critical_point);

// Compiled-in defaults for the supported (family, d) pairs, with provenance.
CriticalConstants default_constants(ModelFamily family, int d);

// a^b computed as exp(b log a) so powers agree across platforms and call sites.
double power(double base, double exponent);

// quantum: (J t) L^-z; classical: t_MCS L^-z
double reduced_time(double t, int L, const CriticalConstants& c);

// (h / J) L^y_h
double reduced_field(double h, int L, const CriticalConstants& c);

// One (L, h) curve in collapse coordinates x = h_hat * t_hat^w, y = L^-kappa <M^2>.
struct RescaledCurve {
    SeriesLabel label;
    std::vector<double> times;
    std::vector<double> x_values;
    std::vector<double> y_values;
    std::vector<double> y_errors;
    double w = 0.0;

    std::size_t size() const { return x_values.size(); }
};

// Keeps every point including t = 0 (mapped to x = 0).
RescaledCurve rescale_curve(const EnsembleSeries& series, const CriticalConstants& c, double w);

}  // namespace quench
