#include "doctest.h"

#include <stdexcept>
#include <cmath>
#include <vector>

#include "quench/rng.hpp"

using namespace quench;

TEST_CASE("streams are reproducible and distinct") {
    auto a = RandomStream::for_stream(42, 3);
    auto b = RandomStream::for_stream(42, 3);
    auto c = RandomStream::for_stream(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a(), y = b(), z = c();
        CHECK(x == y);
        differs |= x != z;
    }
    CHECK(differs);
}

TEST_CASE("uniform and below moments") {
    RandomStream rng(7);
    const int n = 200000;
    double sum = 0.0;
    std::vector<int> counts(6, 0);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        ++counts[static_cast<std::size_t>(rng.below(6))];
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    for (int k : counts) CHECK(std::abs(k - n / 6.0) < 5.0 * std::sqrt(n / 6.0));
}

TEST_CASE("normal moments") {
    RandomStream rng(11);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        s1 += x;
        s2 += x * x;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("probability thresholds") {
    CHECK(probability_threshold(0.0) == 0);
    CHECK(probability_threshold(1.0) == RandomStream::max());
    CHECK(probability_threshold(2.0) == RandomStream::max());
    CHECK(static_cast<double>(probability_threshold(0.25)) == doctest::Approx(0x1.0p62));
}
