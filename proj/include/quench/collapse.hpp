#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quench/scaling.hpp"
#include "quench/series.hpp"

namespace quench {

// ---------------------------------------------------------------------------
// Crossover detection
// ---------------------------------------------------------------------------

enum class CrossoverAnchor {
    // Fit segment starts at the first t > 0 point.
    first,
    // Fit segment is the one with the largest log-log slope, so an initial
    // equilibrium plateau is skipped and the growth regime is used.
    steepest,
};

struct CrossoverOptions {
    // Width of the fit segment as a fraction of the log-time range.
    double fit_fraction = 0.25;
    // Allowed deviation from the fitted line, in natural log units.
    double delta = 0.05;
    CrossoverAnchor anchor = CrossoverAnchor::steepest;
};

// Time at which log <M^2> bends away from a straight-line fit to its early
// growth in log t; t_max when it never does. Requires >= 8 points with t > 0
// and positive means, throws DiagnosticsError otherwise.
double detect_crossover_time(const EnsembleSeries& series, const CrossoverOptions& options = {});

// ---------------------------------------------------------------------------
// Common grid and cost
// ---------------------------------------------------------------------------

// Relative time window [beta_frac * t_x, gamma_frac * t_x].
struct CollapseWindow {
    double beta_frac = 0.1;
    double gamma_frac = 1.0;
};

void validate(const CollapseWindow& w);

// beta in {0.10, 0.15, ..., 0.50}, gamma in {0.6, 0.7, ..., 1.0}.
std::vector<CollapseWindow> default_window_grid();

struct CommonGrid {
    std::vector<double> log_x;  // natural log of the grid points
    // Indices of the curves whose x-range contains each grid point.
    std::vector<std::vector<std::size_t>> covering;
    // Grid points covered by at least min_curves curves.
    std::vector<std::size_t> included;

    std::size_t size() const { return log_x.size(); }
    double decades() const;
    std::size_t count_with_at_least(std::size_t n_curves) const;
};

// Log-spaced grid over the region where at least `min_curves` curves overlap.
// Only points with x > 0 and y > 0 are used. nullopt when there is no such region.
std::optional<CommonGrid> build_common_grid(std::span<const RescaledCurve> curves, int points_per_decade,
                                            int min_curves = 2);

// log y of a curve at log x, linear interpolation in (log x, log y).
// nullopt outside the curve's range.
std::optional<double> interpolate_log(const RescaledCurve& curve, double log_x);

// Mean over included grid points of the unbiased across-curve variance of log y.
// nullopt when no grid point retains two contributing curves.
std::optional<double> collapse_cost(std::span<const RescaledCurve> curves, const CommonGrid& grid);

// ---------------------------------------------------------------------------
// Optimization over w
// ---------------------------------------------------------------------------

struct CoverageRules {
    double min_decades = 0.3;
    std::size_t min_points_two_curves = 20;
    double min_fraction_three_curves = 0.25;  // applied when >= 3 curves exist
};

struct SearchOptions {
    double w_min = 0.2;
    double w_max = 3.0;
    int scan_points = 200;
    double refine_tol = 1e-3;
};

struct CollapseOptions {
    CrossoverOptions crossover;
    SearchOptions search;
    CoverageRules coverage;
    int points_per_decade = 100;
    int min_curves = 2;
    // A landscape whose scanned costs span less than this is treated as flat.
    double flat_tolerance = 1e-14;
};

struct WindowEstimate {
    CollapseWindow window;
    double w_opt = 0.0;
    double cost_min = 0.0;
    std::size_t n_grid = 0;
    bool accepted = false;
    std::string reason;  // empty when accepted
};

// Cost of one window as a function of w. Curves are cut to their windows once.
class CollapseObjective {
public:
    // crossover_times[i] belongs to curveset[i].
    CollapseObjective(std::span<const EnsembleSeries> curveset, std::span<const double> crossover_times,
                      const CriticalConstants& constants, const CollapseWindow& window, const CollapseOptions& options);

    struct Evaluation {
        std::optional<double> cost;
        std::size_t n_grid = 0;
        bool coverage_ok = false;
        std::string reason;
    };

    Evaluation evaluate(double w) const;
    std::size_t curve_count() const { return windowed_.size(); }
    std::vector<RescaledCurve> rescaled(double w) const;

private:
    std::vector<EnsembleSeries> windowed_;
    CriticalConstants constants_;
    CollapseOptions options_;
    std::string setup_error_;
};

std::vector<double> crossover_times(std::span<const EnsembleSeries> curveset, const CrossoverOptions& options);

WindowEstimate optimize_w(std::span<const EnsembleSeries> curveset, const CriticalConstants& constants,
                          const CollapseWindow& window, const CollapseOptions& options = {});

WindowEstimate optimize_w(std::span<const EnsembleSeries> curveset, std::span<const double> crossover_times,
                          const CriticalConstants& constants, const CollapseWindow& window,
                          const CollapseOptions& options = {});

// ---------------------------------------------------------------------------
// Window ensemble
// ---------------------------------------------------------------------------

// p-th percentile (0..100) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

struct CollapseResult {
    double w_rep = 0.0;
    double sigma_sys = 0.0;
    double k = 4.0;
    std::vector<WindowEstimate> estimates;
    std::vector<double> crossover_times;

    double band_low() const { return w_rep - k * sigma_sys; }
    double band_high() const { return w_rep + k * sigma_sys; }
    std::size_t accepted_count() const;
    // Smallest cost among accepted windows.
    double min_accepted_cost() const;
};

// Throws AnalysisError (listing per-window reasons) when fewer than 3 windows are accepted.
CollapseResult estimate_w(std::span<const EnsembleSeries> curveset, const CriticalConstants& constants,
                          std::span<const CollapseWindow> windows, double k = 4.0, const CollapseOptions& options = {},
                          unsigned threads = 0);

// ---------------------------------------------------------------------------
// Single-crossing diagnostic
// ---------------------------------------------------------------------------

struct CrossingDiagnostic {
    std::vector<double> x_grid;
    std::vector<double> delta;
    std::size_t index_min = 0;
    double x_min = 0.0;
};

// Relative spread (max - min) / mean across curves on a log grid over the
// region covered by every curve. Throws DiagnosticsError on empty overlap.
CrossingDiagnostic crossing_spread(std::span<const RescaledCurve> curves, int points_per_decade = 100);

}  // namespace quench
