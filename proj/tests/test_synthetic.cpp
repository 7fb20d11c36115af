#include "doctest.h"

#include <stdexcept>
#include <cmath>

#include "quench/collapse.hpp"
#include "quench/synthetic.hpp"

using namespace quench;

namespace {

SyntheticSpec base(double w) {
    SyntheticSpec s;
    s.constants = default_constants(ModelFamily::classical, 4);
    s.w_star = w;
    s.Ls = {6, 8, 10};
    s.hs = {0.05, 0.1};
    return s;
}

}  // namespace

TEST_CASE("generator obeys the scaling form exactly") {
    const auto s = base(0.9);
    const auto set = make_synthetic(s);
    REQUIRE(set.size() == 6);
    for (const auto& series : set) {
        validate(series);
        const auto r = rescale_curve(series, s.constants, s.w_star);
        for (std::size_t k = 0; k < r.size(); ++k)
            CHECK(r.y_values[k] == doctest::Approx(evaluate(s.function, r.x_values[k])).epsilon(1e-9));
        CHECK(r.x_values[1] == doctest::Approx(s.x_min).epsilon(1e-9));
        CHECK(r.x_values.back() == doctest::Approx(s.x_max).epsilon(1e-9));
    }
}

TEST_CASE("noise is reproducible and multiplicative") {
    auto s = base(1.0);
    s.noise = 0.01;
    const auto a = make_synthetic(s);
    const auto b = make_synthetic(s);
    s.noise = 0.0;
    const auto clean = make_synthetic(s);
    double sq = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean_M2 == b[i].mean_M2);
        for (std::size_t k = 1; k < a[i].size(); ++k) {
            const double rel = a[i].mean_M2[k] / clean[i].mean_M2[k] - 1.0;
            sq += rel * rel;
            ++n;
        }
    }
    CHECK(std::sqrt(sq / n) == doctest::Approx(0.01).epsilon(0.15));
}

TEST_CASE("quantum fixtures use J t") {
    SyntheticSpec s;
    s.constants = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 2.0, 1.0);
    s.w_star = 1.3;
    s.Ls = {8, 12};
    s.hs = {0.1};
    const auto set = make_synthetic(s);
    CHECK(set[0].label.time_unit == TimeUnit::jt);
    const auto r = rescale_curve(set[1], s.constants, 1.3);
    CHECK(r.x_values[5] == doctest::Approx(std::pow(10.0, -3.0 + 4.0 / 20.0)));
}

TEST_CASE("reparameterized variables") {
    const auto grid = default_window_grid();
    // Time reparameterized as t_hat^c collapses at c * w_star.
    auto s = base(0.8);
    s.time_power = 1.5;
    auto r = estimate_w(make_synthetic(s), s.constants, grid, 4.0, {}, 1);
    CHECK(r.w_rep == doctest::Approx(1.2).epsilon(5e-3));
    // F evaluated at x^c is still a function of x alone.
    s = base(0.8);
    s.variable_power = 1.5;
    r = estimate_w(make_synthetic(s), s.constants, grid, 4.0, {}, 1);
    CHECK(r.w_rep == doctest::Approx(0.8).epsilon(5e-3));
}

TEST_CASE("spec validation") {
    auto s = base(0.0);
    CHECK_THROWS_AS(make_synthetic(s), std::invalid_argument);
    s = base(1.0);
    s.hs = {0.0};
    CHECK_THROWS_AS(make_synthetic(s), std::invalid_argument);
    CHECK(parse_scaling_function("saturating") == ScalingFunction::saturating);
    CHECK_THROWS_AS(parse_scaling_function("cubic"), std::invalid_argument);
}
