#include "doctest.h"

#include <stdexcept>
#include <cmath>

#include "quench/scaling.hpp"

using namespace quench;

TEST_CASE("constants from the exponent formulas") {
    auto q = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 1.0, 1.0);
    CHECK(q.kappa == doctest::Approx(1.75));
    CHECK(q.y_h == doctest::Approx(1.875));
    auto c4 = derive_constants(ModelFamily::classical, 4, 0.0, 2.0, 1.0, 6.6803);
    CHECK(c4.kappa == doctest::Approx(6.0));
    CHECK(c4.y_h == doctest::Approx(3.0));
    auto c3 = derive_constants(ModelFamily::classical, 3, 0.0363, 2.02, 1.0, 4.5115);
    CHECK(c3.kappa == doctest::Approx(4.9637));
    CHECK(c3.y_h == doctest::Approx(2.48185));
}

TEST_CASE("constant validation") {
    CHECK_THROWS_AS(derive_constants(ModelFamily::classical, 3, 1.0, 2.0, 1.0, 4.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(ModelFamily::classical, 3, -0.1, 2.0, 1.0, 4.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(ModelFamily::classical, 3, 0.0, 0.0, 1.0, 4.5), std::invalid_argument);
    CHECK_THROWS_AS(derive_constants(static_cast<ModelFamily>(7), 3, 0.0, 2.0, 1.0, 4.5), std::invalid_argument);
    CHECK_THROWS_AS(default_constants(ModelFamily::quantum, 3), std::invalid_argument);
}

TEST_CASE("identities hold for the compiled defaults") {
    for (auto [f, d] : {std::pair{ModelFamily::quantum, 1}, {ModelFamily::quantum, 2}, {ModelFamily::classical, 2},
                        {ModelFamily::classical, 3}, {ModelFamily::classical, 4}}) {
        const auto c = default_constants(f, d);
        const double zq = f == ModelFamily::quantum ? c.z : 0.0;
        CHECK(c.kappa == d + 2.0 - zq - c.eta);
        CHECK(c.y_h == (d + zq + 2.0 - c.eta) / 2.0);
    }
    CHECK(default_constants(ModelFamily::classical, 3).z_source == Provenance::paper);
    CHECK(default_constants(ModelFamily::classical, 3).eta_source == Provenance::literature_default);
    CHECK(default_constants(ModelFamily::classical, 2).z == 2.17);
    CHECK(to_string(Provenance::literature_default) == "literature-default");
}

TEST_CASE("reduced variables") {
    const auto q = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 1.0, 1.0);
    CHECK(reduced_time(0.0, 8, q) == 0.0);
    CHECK(reduced_time(8.0, 8, q) == doctest::Approx(1.0));
    CHECK_THROWS_AS(reduced_time(-1.0, 8, q), std::invalid_argument);
    const auto c3 = default_constants(ModelFamily::classical, 3);
    CHECK(reduced_time(100.0, 20, c3) == doctest::Approx(0.2355).epsilon(1e-3));
    CHECK(reduced_field(0.0, 20, c3) == 0.0);
    CHECK(reduced_field(0.3, 1, c3) == doctest::Approx(0.3));
    CHECK(reduced_field(0.1, 20, c3) == doctest::Approx(170.0).epsilon(0.01));
    auto q2 = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 2.0, 1.0);
    CHECK(reduced_field(0.5, 1, q2) == doctest::Approx(0.25));
}

namespace {

EnsembleSeries toy_series(ModelFamily f, int d, int L, double h) {
    EnsembleSeries s;
    s.label = {f, d, L, h, time_unit_for(f)};
    s.times = {0, 1, 2, 5, 10, 100};
    s.mean_M2 = {10, 11, 12, 15, 20, 50};
    s.stderr_M2 = {1, 1, 1, 1, 1, 1};
    return s;
}

}  // namespace

TEST_CASE("rescale curve") {
    const auto c3 = default_constants(ModelFamily::classical, 3);
    const auto s = toy_series(ModelFamily::classical, 3, 20, 0.1);
    const auto r = rescale_curve(s, c3, 0.854);
    REQUIRE(r.size() == s.size());
    CHECK(r.x_values[0] == 0.0);
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double want = 0.1 * std::pow(20.0, c3.y_h) * std::pow(s.times[k] * std::pow(20.0, -2.02), 0.854);
        CHECK(r.x_values[k] == doctest::Approx(want).epsilon(1e-12));
        CHECK(r.y_values[k] == doctest::Approx(s.mean_M2[k] * std::pow(20.0, -c3.kappa)).epsilon(1e-12));
        CHECK(r.x_values[k] > r.x_values[k - 1]);
    }
    CHECK_THROWS_AS(rescale_curve(s, c3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rescale_curve(s, default_constants(ModelFamily::classical, 4), 1.0), std::invalid_argument);
}

TEST_CASE("field doubling doubles x") {
    const auto c3 = default_constants(ModelFamily::classical, 3);
    const auto a = rescale_curve(toy_series(ModelFamily::classical, 3, 12, 0.05), c3, 0.9);
    const auto b = rescale_curve(toy_series(ModelFamily::classical, 3, 12, 0.10), c3, 0.9);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(b.x_values[k] == doctest::Approx(2.0 * a.x_values[k]));
        CHECK(b.y_values[k] == a.y_values[k]);
    }
}

TEST_CASE("pure time rescaling and reparameterization in w") {
    // h chosen so that h_hat = 1.
    const auto q = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 1.0, 1.0);
    const int L = 8;
    const double h = std::pow(static_cast<double>(L), -q.y_h);
    const auto s = toy_series(ModelFamily::quantum, 1, L, h);
    const auto r1 = rescale_curve(s, q, 1.0);
    const auto r2 = rescale_curve(s, q, 1.7);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(r1.x_values[k] == doctest::Approx(reduced_time(s.times[k], L, q)));
        CHECK(r2.x_values[k] == doctest::Approx(std::pow(r1.x_values[k], 1.7)));
        CHECK(r1.y_values[k] == r2.y_values[k]);
    }
}

TEST_CASE("quantum series times are already J t") {
    const auto q = derive_constants(ModelFamily::quantum, 1, 0.25, 1.0, 2.0, 1.0);
    const auto s = toy_series(ModelFamily::quantum, 1, 8, 0.1);
    const auto r = rescale_curve(s, q, 1.0);
    CHECK(r.x_values[3] == doctest::Approx(reduced_field(0.1, 8, q) * 5.0 / 8.0));
}
