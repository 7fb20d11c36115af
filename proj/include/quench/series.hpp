#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace quench {

enum class ModelFamily { quantum, classical };
// Classical runs count Monte Carlo sweeps, quantum runs count J*t.
enum class TimeUnit { t_mcs, jt };

std::string_view to_string(ModelFamily f);
std::string_view to_string(TimeUnit u);
ModelFamily parse_family(std::string_view s);
TimeUnit parse_time_unit(std::string_view s);

inline TimeUnit time_unit_for(ModelFamily f) { return f == ModelFamily::classical ? TimeUnit::t_mcs : TimeUnit::jt; }

struct SeriesLabel {
    ModelFamily family = ModelFamily::classical;
    int d = 0;
    int L = 0;
    double h = 0.0;
    TimeUnit time_unit = TimeUnit::t_mcs;

    friend bool operator==(const SeriesLabel&, const SeriesLabel&) = default;
};

std::string describe(const SeriesLabel& label);

// <M^2(t)> versus time, averaged over realizations.
struct EnsembleSeries {
    SeriesLabel label;
    std::vector<double> times;
    std::vector<double> mean_M2;
    std::vector<double> stderr_M2;
    std::int64_t n_realizations = 1;

    std::size_t size() const { return times.size(); }
};

// Throws std::invalid_argument when the record violates its invariants.
void validate(const EnsembleSeries& series);

}  // namespace quench
