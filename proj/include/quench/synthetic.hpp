#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "quench/scaling.hpp"
#include "quench/series.hpp"

namespace quench {

enum class ScalingFunction {
    rational,    // x^2 / (1 + x)
    saturating,  // x^2 / (1 + x^2)
};

std::string_view to_string(ScalingFunction f);
ScalingFunction parse_scaling_function(std::string_view s);
double evaluate(ScalingFunction f, double x);

// Curves obeying L^-kappa <M^2> = F(h_hat * t_hat^w_star) exactly, optionally
// with multiplicative Gaussian noise y * (1 + noise * eps).
struct SyntheticSpec {
    CriticalConstants constants;
    double w_star = 1.0;
    std::vector<int> Ls;
    std::vector<double> hs;
    ScalingFunction function = ScalingFunction::rational;
    // Sampled range of the collapse variable, log-spaced.
    double x_min = 1e-3;
    double x_max = 1e3;
    int points_per_decade = 20;
    double noise = 0.0;
    std::uint64_t seed = 1;
    // t_hat -> t_hat^time_power before forming the collapse variable.
    double time_power = 1.0;
    // F evaluated at x^variable_power.
    double variable_power = 1.0;
};

void validate(const SyntheticSpec& spec);

// One series per (L, h), L major. Each starts with a t = 0 point.
std::vector<EnsembleSeries> make_synthetic(const SyntheticSpec& spec);

}  // namespace quench
