#include "quench/series.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace quench {

std::string_view to_string(ModelFamily f) { return f == ModelFamily::quantum ? "quantum" : "classical"; }

std::string_view to_string(TimeUnit u) { return u == TimeUnit::jt ? "Jt" : "t_MCS"; }

ModelFamily parse_family(std::string_view s) {
    if (s == "quantum") return ModelFamily::quantum;
    if (s == "classical") return ModelFamily::classical;
    throw std::invalid_argument("unknown model family '" + std::string(s) + "'");
}

TimeUnit parse_time_unit(std::string_view s) {
    if (s == "Jt") return TimeUnit::jt;
    if (s == "t_MCS") return TimeUnit::t_mcs;
    throw std::invalid_argument("unknown time unit '" + std::string(s) + "'");
}

std::string describe(const SeriesLabel& label) {
    std::ostringstream os;
    os << to_string(label.family) << " d=" << label.d << " L=" << label.L << " h=" << label.h;
    return os.str();
}

void validate(const EnsembleSeries& s) {
    const auto n = s.times.size();
    if (s.mean_M2.size() != n || s.stderr_M2.size() != n)
        throw std::invalid_argument("series column lengths differ");
    if (s.n_realizations < 1) throw std::invalid_argument("series needs at least one realization");
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && !(s.times[k] > s.times[k - 1])) throw std::invalid_argument("series times must be strictly increasing");
        if (!(s.stderr_M2[k] >= 0.0)) throw std::invalid_argument("negative standard error in series");
        if (!std::isfinite(s.mean_M2[k]) || s.mean_M2[k] < 0.0) throw std::invalid_argument("invalid mean_M2 in series");
    }
}

}  // namespace quench
