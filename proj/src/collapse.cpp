#include "quench/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "quench/errors.hpp"
#include "quench/parallel.hpp"

namespace quench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {my - slope * mx, slope};
}

// Points of a curve usable on log axes.
struct LogCurve {
    std::vector<double> lx;
    std::vector<double> ly;

    explicit LogCurve(const RescaledCurve& c) {
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double x = c.x_values[k];
            const double y = c.y_values[k];
            if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y)) {
                lx.push_back(std::log(x));
                ly.push_back(std::log(y));
            }
        }
    }

    bool usable() const { return lx.size() >= 2; }
    double first() const { return lx.front(); }
    double last() const { return lx.back(); }

    bool covers(double g) const {
        constexpr double eps = 1e-12;
        return usable() && g >= first() - eps * std::max(1.0, std::abs(first())) &&
               g <= last() + eps * std::max(1.0, std::abs(last()));
    }

    std::optional<double> at(double g) const {
        if (!covers(g)) return std::nullopt;
        if (g <= lx.front()) return ly.front();
        if (g >= lx.back()) return ly.back();
        const auto it = std::upper_bound(lx.begin(), lx.end(), g);
        const auto hi = static_cast<std::size_t>(it - lx.begin());
        const auto lo = hi - 1;
        const double f = (g - lx[lo]) / (lx[hi] - lx[lo]);
        return ly[lo] + f * (ly[hi] - ly[lo]);
    }
};

std::vector<LogCurve> to_log_curves(std::span<const RescaledCurve> curves) {
    std::vector<LogCurve> out;
    out.reserve(curves.size());
    for (const auto& c : curves) out.emplace_back(c);
    return out;
}

std::vector<double> evenly_spaced(double lo, double hi, int points_per_decade) {
    const double decades = (hi - lo) / std::numbers::ln10;
    const auto n = static_cast<std::size_t>(std::max(2.0, std::ceil(decades * points_per_decade) + 1.0));
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    g.back() = hi;
    return g;
}

}  // namespace

// ---------------------------------------------------------------------------

double detect_crossover_time(const EnsembleSeries& series, const CrossoverOptions& options) {
    if (!(options.fit_fraction > 0.0 && options.fit_fraction <= 1.0))
        throw std::invalid_argument("fit_fraction must lie in (0, 1]");
    if (!(options.delta > 0.0)) throw std::invalid_argument("delta must be positive");

    std::vector<double> lt, ly, t;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (series.times[k] <= 0.0) continue;
        if (!(series.mean_M2[k] > 0.0))
            throw DiagnosticsError("nonpositive <M^2> at t = " + std::to_string(series.times[k]) + " in " +
                                   describe(series.label));
        t.push_back(series.times[k]);
        lt.push_back(std::log(series.times[k]));
        ly.push_back(std::log(series.mean_M2[k]));
    }
    if (t.size() < 8)
        throw DiagnosticsError("crossover detection needs >= 8 points with t > 0, got " + std::to_string(t.size()) +
                               " in " + describe(series.label));

    const std::size_t n = t.size();
    const double width = options.fit_fraction * (lt.back() - lt.front());
    // Index one past the end of the fit segment starting at `start` (at least two points).
    auto segment_end = [&](std::size_t start) {
        std::size_t end = start + 1;
        while (end < n && lt[end] <= lt[start] + width * (1.0 + 1e-12)) ++end;
        return std::max(end, std::min(start + 2, n));
    };

    std::size_t start = 0;
    if (options.anchor == CrossoverAnchor::steepest) {
        double best = -kInf;
        for (std::size_t s = 0; s + 1 < n; ++s) {
            if (lt[s] + width > lt.back() * (1.0 + 1e-12) + 1e-12 && s > 0) break;
            const auto e = segment_end(s);
            const auto fit = least_squares(std::span(lt).subspan(s, e - s), std::span(ly).subspan(s, e - s));
            if (fit.slope > best) {
                best = fit.slope;
                start = s;
            }
        }
    }
    const auto end = segment_end(start);
    const auto fit = least_squares(std::span(lt).subspan(start, end - start), std::span(ly).subspan(start, end - start));
    for (std::size_t k = start; k < n; ++k)
        if (std::abs(ly[k] - (fit.intercept + fit.slope * lt[k])) > options.delta) return t[k];
    return t.back();
}

// ---------------------------------------------------------------------------

void validate(const CollapseWindow& w) {
    if (!(w.beta_frac > 0.0 && w.beta_frac < w.gamma_frac))
        throw std::invalid_argument("collapse window needs 0 < beta < gamma");
}

std::vector<CollapseWindow> default_window_grid() {
    std::vector<CollapseWindow> out;
    for (int b = 0; b <= 8; ++b)
        for (int g = 0; g <= 4; ++g) out.push_back({0.10 + 0.05 * b, 0.60 + 0.10 * g});
    return out;
}

double CommonGrid::decades() const {
    return log_x.size() < 2 ? 0.0 : (log_x.back() - log_x.front()) / std::numbers::ln10;
}

std::size_t CommonGrid::count_with_at_least(std::size_t n_curves) const {
    return static_cast<std::size_t>(
        std::count_if(covering.begin(), covering.end(), [&](const auto& c) { return c.size() >= n_curves; }));
}

std::optional<CommonGrid> build_common_grid(std::span<const RescaledCurve> curves, int points_per_decade,
                                            int min_curves) {
    if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    if (min_curves < 2) throw std::invalid_argument("min_curves must be >= 2");
    const auto logs = to_log_curves(curves);

    // The region where >= min_curves overlap starts at some curve's first point
    // and ends at some curve's last point.
    auto coverage_at = [&](double g) {
        int c = 0;
        for (const auto& lc : logs) c += lc.covers(g) ? 1 : 0;
        return c;
    };
    double lo = kInf, hi = -kInf;
    for (const auto& lc : logs) {
        if (!lc.usable()) continue;
        if (coverage_at(lc.first()) >= min_curves) lo = std::min(lo, lc.first());
        if (coverage_at(lc.last()) >= min_curves) hi = std::max(hi, lc.last());
    }
    if (!(lo <= hi)) return std::nullopt;

    CommonGrid grid;
    grid.log_x = lo == hi ? std::vector<double>{lo} : evenly_spaced(lo, hi, points_per_decade);
    grid.covering.resize(grid.log_x.size());
    for (std::size_t j = 0; j < grid.log_x.size(); ++j) {
        for (std::size_t i = 0; i < logs.size(); ++i)
            if (logs[i].covers(grid.log_x[j])) grid.covering[j].push_back(i);
        if (grid.covering[j].size() >= static_cast<std::size_t>(min_curves)) grid.included.push_back(j);
    }
    if (grid.included.empty()) return std::nullopt;
    return grid;
}

std::optional<double> interpolate_log(const RescaledCurve& curve, double log_x) { return LogCurve(curve).at(log_x); }

std::optional<double> collapse_cost(std::span<const RescaledCurve> curves, const CommonGrid& grid) {
    const auto logs = to_log_curves(curves);
    double total = 0.0;
    std::size_t used = 0;
    std::vector<double> v;
    for (auto j : grid.included) {
        v.clear();
        for (auto i : grid.covering[j]) {
            if (i >= logs.size()) throw std::invalid_argument("grid refers to a curve that was not supplied");
            if (auto y = logs[i].at(grid.log_x[j])) v.push_back(*y);
        }
        if (v.size() < 2) continue;
        // Offsets from the first value keep identical curves at exactly zero.
        double mean = 0.0;
        for (double y : v) mean += y - v[0];
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double y : v) ss += (y - v[0] - mean) * (y - v[0] - mean);
        total += ss / static_cast<double>(v.size() - 1);
        ++used;
    }
    if (used == 0) return std::nullopt;
    return total / static_cast<double>(used);
}

// ---------------------------------------------------------------------------

std::vector<double> crossover_times(std::span<const EnsembleSeries> curveset, const CrossoverOptions& options) {
    std::vector<double> out;
    out.reserve(curveset.size());
    for (const auto& s : curveset) out.push_back(detect_crossover_time(s, options));
    return out;
}

CollapseObjective::CollapseObjective(std::span<const EnsembleSeries> curveset, std::span<const double> tx,
                                     const CriticalConstants& constants, const CollapseWindow& window,
                                     const CollapseOptions& options)
    : constants_(constants), options_(options) {
    validate(window);
    if (tx.size() != curveset.size()) throw std::invalid_argument("one crossover time per curve is required");
    for (std::size_t i = 0; i < curveset.size(); ++i) {
        const auto& s = curveset[i];
        const double lo = window.beta_frac * tx[i] * (1.0 - 1e-12);
        const double hi = window.gamma_frac * tx[i] * (1.0 + 1e-12);
        EnsembleSeries cut;
        cut.label = s.label;
        cut.n_realizations = s.n_realizations;
        for (std::size_t k = 0; k < s.size(); ++k) {
            if (s.times[k] <= 0.0 || s.times[k] < lo || s.times[k] > hi) continue;
            cut.times.push_back(s.times[k]);
            cut.mean_M2.push_back(s.mean_M2[k]);
            cut.stderr_M2.push_back(s.stderr_M2[k]);
        }
        if (cut.size() >= 2 && s.label.h > 0.0) windowed_.push_back(std::move(cut));
    }
    if (windowed_.size() < 2) setup_error_ = "fewer than two curves have >= 2 points inside the window";
}

std::vector<RescaledCurve> CollapseObjective::rescaled(double w) const {
    std::vector<RescaledCurve> out;
    out.reserve(windowed_.size());
    for (const auto& s : windowed_) out.push_back(rescale_curve(s, constants_, w));
    return out;
}

CollapseObjective::Evaluation CollapseObjective::evaluate(double w) const {
    Evaluation ev;
    if (!setup_error_.empty()) {
        ev.reason = setup_error_;
        return ev;
    }
    const auto curves = rescaled(w);
    const auto grid = build_common_grid(curves, options_.points_per_decade, options_.min_curves);
    if (!grid) {
        ev.reason = "empty overlap";
        return ev;
    }
    ev.cost = collapse_cost(curves, *grid);
    if (!ev.cost) {
        ev.reason = "no grid point with two usable curves";
        return ev;
    }
    ev.n_grid = grid->included.size();
    const auto& rules = options_.coverage;
    std::ostringstream why;
    if (grid->decades() < rules.min_decades) {
        why << "overlap spans " << grid->decades() << " decades < " << rules.min_decades;
    } else if (grid->count_with_at_least(2) < rules.min_points_two_curves) {
        why << grid->count_with_at_least(2) << " grid points with >= 2 curves < " << rules.min_points_two_curves;
    } else if (curves.size() >= 3 && static_cast<double>(grid->count_with_at_least(3)) <
                                         rules.min_fraction_three_curves * static_cast<double>(grid->size())) {
        why << "fraction of grid points with >= 3 curves below " << rules.min_fraction_three_curves;
    }
    ev.reason = why.str();
    ev.coverage_ok = ev.reason.empty();
    return ev;
}

WindowEstimate optimize_w(std::span<const EnsembleSeries> curveset, const CriticalConstants& constants,
                          const CollapseWindow& window, const CollapseOptions& options) {
    const auto tx = crossover_times(curveset, options.crossover);
    return optimize_w(curveset, tx, constants, window, options);
}

WindowEstimate optimize_w(std::span<const EnsembleSeries> curveset, std::span<const double> tx,
                          const CriticalConstants& constants, const CollapseWindow& window,
                          const CollapseOptions& options) {
    const auto& search = options.search;
    if (!(search.w_min > 0.0 && search.w_max > search.w_min)) throw std::invalid_argument("need 0 < w_min < w_max");
    if (search.scan_points < 3) throw std::invalid_argument("scan needs >= 3 points");
    if (!(search.refine_tol > 0.0)) throw std::invalid_argument("refine_tol must be positive");

    WindowEstimate est;
    est.window = window;
    const CollapseObjective objective(curveset, tx, constants, window, options);

    // Coverage is judged at the minimizer only, so a window too narrow to
    // pass at its best w is rejected rather than pushed to a worse w.
    std::string last_reason;
    auto cost_of = [&](double w) {
        const auto ev = objective.evaluate(w);
        if (!ev.cost) {
            last_reason = ev.reason;
            return kInf;
        }
        return *ev.cost;
    };

    const auto n = static_cast<std::size_t>(search.scan_points);
    std::vector<double> ws(n), cs(n);
    std::size_t best = 0;
    double lo_cost = kInf, hi_cost = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
        ws[i] = search.w_min + (search.w_max - search.w_min) * static_cast<double>(i) / static_cast<double>(n - 1);
        cs[i] = cost_of(ws[i]);
        if (cs[i] < cs[best]) best = i;
        if (std::isfinite(cs[i])) {
            lo_cost = std::min(lo_cost, cs[i]);
            hi_cost = std::max(hi_cost, cs[i]);
        }
    }
    if (!std::isfinite(cs[best])) {
        est.reason = last_reason.empty() ? "cost undefined for every w" : last_reason;
        return est;
    }
    if (hi_cost - lo_cost <= options.flat_tolerance * std::max(1.0, hi_cost)) {
        est.w_opt = ws[best];
        est.cost_min = cs[best];
        est.reason = "flat cost landscape";
        return est;
    }

    // Golden-section refinement inside the neighboring scan cells.
    double a = ws[best > 0 ? best - 1 : 0];
    double b = ws[std::min(best + 1, n - 1)];
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = cost_of(x1), f2 = cost_of(x2);
    while (b - a > search.refine_tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = cost_of(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = cost_of(x2);
        }
    }
    double w_opt = ws[best], c_opt = cs[best];
    const double mid = 0.5 * (a + b);
    if (const double c_mid = cost_of(mid); c_mid <= c_opt) {
        w_opt = mid;
        c_opt = c_mid;
    }
    if (f1 < c_opt) {
        w_opt = x1;
        c_opt = f1;
    }
    if (f2 < c_opt) {
        w_opt = x2;
        c_opt = f2;
    }

    const auto final_eval = objective.evaluate(w_opt);
    est.w_opt = w_opt;
    est.cost_min = c_opt;
    est.n_grid = final_eval.n_grid;
    est.accepted = final_eval.coverage_ok && est.n_grid >= options.coverage.min_points_two_curves;
    if (!est.accepted) est.reason = final_eval.reason.empty() ? "too few grid points" : final_eval.reason;
    return est;
}

// ---------------------------------------------------------------------------

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::size_t CollapseResult::accepted_count() const {
    return static_cast<std::size_t>(std::count_if(estimates.begin(), estimates.end(), [](const auto& e) { return e.accepted; }));
}

double CollapseResult::min_accepted_cost() const {
    double m = kInf;
    for (const auto& e : estimates)
        if (e.accepted) m = std::min(m, e.cost_min);
    return m;
}

CollapseResult estimate_w(std::span<const EnsembleSeries> curveset, const CriticalConstants& constants,
                          std::span<const CollapseWindow> windows, double k, const CollapseOptions& options,
                          unsigned threads) {
    if (windows.size() < 3) throw std::invalid_argument("estimate_w needs at least 3 windows");
    if (!(k >= 1.0)) throw std::invalid_argument("band multiplier k must be >= 1");
    if (curveset.size() < 2) throw std::invalid_argument("collapse analysis needs at least 2 series");

    CollapseResult result;
    result.k = k;
    result.crossover_times = crossover_times(curveset, options.crossover);
    result.estimates.resize(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t i) {
        result.estimates[i] = optimize_w(curveset, result.crossover_times, constants, windows[i], options);
    });

    std::vector<double> accepted;
    for (const auto& e : result.estimates)
        if (e.accepted) accepted.push_back(e.w_opt);
    if (accepted.size() < 3) {
        std::ostringstream os;
        os << "only " << accepted.size() << " of " << windows.size() << " windows accepted";
        for (const auto& e : result.estimates)
            if (!e.accepted)
                os << "\n  window [" << e.window.beta_frac << ", " << e.window.gamma_frac << "]: " << e.reason;
        throw AnalysisError(os.str());
    }
    result.w_rep = percentile(accepted, 50.0);
    result.sigma_sys = 0.5 * (percentile(accepted, 84.0) - percentile(accepted, 16.0));
    return result;
}

// ---------------------------------------------------------------------------

CrossingDiagnostic crossing_spread(std::span<const RescaledCurve> curves, int points_per_decade) {
    if (curves.size() < 2) throw std::invalid_argument("crossing diagnostic needs at least 2 curves");
    if (points_per_decade < 1) throw std::invalid_argument("points_per_decade must be >= 1");
    const auto logs = to_log_curves(curves);
    double lo = -kInf, hi = kInf;
    for (const auto& lc : logs) {
        if (!lc.usable()) throw DiagnosticsError("curve with fewer than two positive points");
        lo = std::max(lo, lc.first());
        hi = std::min(hi, lc.last());
    }
    if (!(lo < hi)) throw DiagnosticsError("curves do not overlap in the collapse variable");

    CrossingDiagnostic out;
    const auto grid = evenly_spaced(lo, hi, points_per_decade);
    double best = kInf;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double mx = -kInf, mn = kInf, sum = 0.0;
        for (const auto& lc : logs) {
            const double y = std::exp(*lc.at(grid[j]));
            mx = std::max(mx, y);
            mn = std::min(mn, y);
            sum += y;
        }
        const double d = (mx - mn) / (sum / static_cast<double>(logs.size()));
        out.x_grid.push_back(std::exp(grid[j]));
        out.delta.push_back(d);
        if (d < best) {
            best = d;
            out.index_min = j;
        }
    }
    out.x_min = out.x_grid[out.index_min];
    return out;
}

}  // namespace quench
